#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Flat-array vector kernels used by the dynamics integrator and the
// residual checks. Every kernel has a scalar reference implementation;
// on x86-64 an AVX2/FMA variant is selected at runtime when the CPU
// supports it. The two backends are equivalence-tested against each
// other, so either may be active for any run.
//
// Nodal data layout: column-major 3 x n, i.e. x0,y0,z0,x1,y1,z1,...
// Member (edge) data uses precomputed flat gather indices so that
// out[i] = pos[idx1[i]] - pos[idx0[i]] runs over i = 0..3m-1.

namespace tensrig::kernels {

struct Backend {
  const char* name;

  // y += a * x
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  // out = x + a * y
  void (*xpay)(std::size_t n, const double* x, double a, const double* y,
               double* out);
  // out = x0 + (dt/6) * (k1 + 2 k2 + 2 k3 + k4)
  void (*rk4_combine)(std::size_t n, const double* x0, double dt,
                      const double* k1, const double* k2, const double* k3,
                      const double* k4, double* out);
  double (*dot)(std::size_t n, const double* x, const double* y);
  double (*max_abs)(std::size_t n, const double* x);
  // out[i] = pos[idx1[i]] - pos[idx0[i]], i over 0..3m-1
  void (*edge_deltas)(std::size_t m, const double* pos, const std::int32_t* idx0,
                      const std::int32_t* idx1, double* out);
  // out[j] = norm(deltas[3j..3j+2]), j over 0..m-1
  void (*edge_norms)(std::size_t m, const double* deltas, double* out);
  // Scatter-accumulate of per-member axial forces onto nodal forces:
  //   force[3*end0[j]+c] -= coeff[j] * deltas[3j+c]
  //   force[3*end1[j]+c] += coeff[j] * deltas[3j+c]
  // Members sharing a node alias the same output slots, so this stays
  // scalar on every backend.
  void (*scatter_edge_forces)(std::size_t m, const double* deltas,
                              const double* coeff, const std::int32_t* end0,
                              const std::int32_t* end1, double* force);
};

// The backend in effect. Resolved on first use: AVX2 when the CPU has it,
// scalar otherwise; the TENSRIG_KERNELS environment variable ("scalar",
// "avx2") overrides detection.
const Backend& active();

// Force a specific backend: "scalar", "avx2", or "auto". Returns false if
// the request cannot be honored on this machine.
bool select(std::string_view name);

// Backends usable on this machine.
std::vector<std::string> available();

const Backend& scalar_backend();
// nullptr when the build or the CPU lacks AVX2.
const Backend* avx2_backend();

}  // namespace tensrig::kernels
