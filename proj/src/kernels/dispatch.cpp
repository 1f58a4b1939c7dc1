#include "tensrig/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace tensrig::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Backend* resolve_auto() {
  if (cpu_has_avx2()) {
    if (const Backend* b = avx2_backend()) return b;
  }
  return &scalar_backend();
}

const Backend* resolve_initial() {
  if (const char* env = std::getenv("TENSRIG_KERNELS")) {
    const std::string_view want(env);
    if (want == "scalar") return &scalar_backend();
    if (want == "avx2" && cpu_has_avx2()) {
      if (const Backend* b = avx2_backend()) return b;
    }
  }
  return resolve_auto();
}

std::atomic<const Backend*>& current() {
  static std::atomic<const Backend*> backend{resolve_initial()};
  return backend;
}

}  // namespace

const Backend& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  if (name == "scalar") {
    current().store(&scalar_backend(), std::memory_order_release);
    return true;
  }
  if (name == "avx2") {
    if (!cpu_has_avx2()) return false;
    const Backend* b = avx2_backend();
    if (!b) return false;
    current().store(b, std::memory_order_release);
    return true;
  }
  if (name == "auto") {
    current().store(resolve_auto(), std::memory_order_release);
    return true;
  }
  return false;
}

std::vector<std::string> available() {
  std::vector<std::string> names{"scalar"};
  if (cpu_has_avx2() && avx2_backend() != nullptr) names.emplace_back("avx2");
  return names;
}

}  // namespace tensrig::kernels
