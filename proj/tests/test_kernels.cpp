#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tensrig/kernels.hpp"

using namespace tensrig;

namespace {

std::vector<double> random_vec(std::mt19937& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

// sizes straddling the 4-wide vector width, including remainders
const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 33, 256, 1001};

}  // namespace

TEST_CASE("scalar kernels: reference semantics") {
  const auto& k = kernels::scalar_backend();
  std::vector<double> x{1.0, 2.0, 3.0};
  std::vector<double> y{10.0, 20.0, 30.0};
  k.axpy(3, 2.0, x.data(), y.data());
  CHECK(y[0] == 12.0);
  CHECK(y[2] == 36.0);

  std::vector<double> out(3);
  k.xpay(3, x.data(), -1.0, x.data(), out.data());
  CHECK(out[1] == 0.0);

  CHECK(k.dot(3, x.data(), x.data()) == doctest::Approx(14.0));
  std::vector<double> z{-5.0, 4.0, 0.5};
  CHECK(k.max_abs(3, z.data()) == 5.0);
}

TEST_CASE("scalar kernels: edge gather and norms") {
  const auto& k = kernels::scalar_backend();
  // two nodes, one edge
  std::vector<double> pos{0.0, 0.0, 0.0, 3.0, 4.0, 0.0};
  std::vector<std::int32_t> g0{0, 1, 2};
  std::vector<std::int32_t> g1{3, 4, 5};
  std::vector<double> delta(3), norm(1);
  k.edge_deltas(1, pos.data(), g0.data(), g1.data(), delta.data());
  CHECK(delta[0] == 3.0);
  CHECK(delta[1] == 4.0);
  k.edge_norms(1, delta.data(), norm.data());
  CHECK(norm[0] == doctest::Approx(5.0));
}

TEST_CASE("scatter accumulates equal and opposite forces") {
  const auto& k = kernels::scalar_backend();
  std::vector<double> deltas{1.0, 0.0, 0.0};
  std::vector<double> coeff{2.5};
  std::vector<std::int32_t> e0{0}, e1{1};
  std::vector<double> force(6, 0.0);
  k.scatter_edge_forces(1, deltas.data(), coeff.data(), e0.data(), e1.data(),
                        force.data());
  CHECK(force[0] == -2.5);
  CHECK(force[3] == 2.5);
  CHECK(force[1] == 0.0);
}

TEST_CASE("rk4_combine weights") {
  const auto& k = kernels::scalar_backend();
  std::vector<double> x0{1.0}, k1{1.0}, k2{2.0}, k3{3.0}, k4{4.0}, out(1);
  k.rk4_combine(1, x0.data(), 0.6, k1.data(), k2.data(), k3.data(), k4.data(),
                out.data());
  // 1 + 0.1 * (1 + 4 + 6 + 4)
  CHECK(out[0] == doctest::Approx(2.5));
}

TEST_CASE("avx2 backend matches scalar reference") {
  const kernels::Backend* avx = kernels::avx2_backend();
  bool runnable = false;
  for (const auto& name : kernels::available()) {
    if (name == "avx2") runnable = true;
  }
  if (avx == nullptr || !runnable) {
    MESSAGE("avx2 unavailable on this machine; equivalence suite skipped");
    return;
  }
  const auto& ref = kernels::scalar_backend();
  std::mt19937 rng(20260809);

  for (std::size_t n : kSizes) {
    CAPTURE(n);
    const auto x = random_vec(rng, n, 10.0);
    const auto y = random_vec(rng, n, 10.0);

    {
      auto y_ref = y;
      auto y_avx = y;
      ref.axpy(n, 1.75, x.data(), y_ref.data());
      avx->axpy(n, 1.75, x.data(), y_avx.data());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(y_avx[i] == doctest::Approx(y_ref[i]).epsilon(1e-14));
      }
    }
    {
      std::vector<double> o_ref(n), o_avx(n);
      ref.xpay(n, x.data(), -0.3, y.data(), o_ref.data());
      avx->xpay(n, x.data(), -0.3, y.data(), o_avx.data());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(o_avx[i] == doctest::Approx(o_ref[i]).epsilon(1e-14));
      }
    }
    {
      const auto k1 = random_vec(rng, n);
      const auto k2 = random_vec(rng, n);
      const auto k3 = random_vec(rng, n);
      const auto k4 = random_vec(rng, n);
      std::vector<double> o_ref(n), o_avx(n);
      ref.rk4_combine(n, x.data(), 1e-3, k1.data(), k2.data(), k3.data(),
                      k4.data(), o_ref.data());
      avx->rk4_combine(n, x.data(), 1e-3, k1.data(), k2.data(), k3.data(),
                       k4.data(), o_avx.data());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(o_avx[i] == doctest::Approx(o_ref[i]).epsilon(1e-14));
      }
    }
    {
      const double d_ref = ref.dot(n, x.data(), y.data());
      const double d_avx = avx->dot(n, x.data(), y.data());
      const double scale = std::max(1.0, std::abs(d_ref));
      CHECK(std::abs(d_avx - d_ref) <= 1e-12 * scale);
      CHECK(ref.max_abs(n, x.data()) == avx->max_abs(n, x.data()));
    }
  }

  // member-shaped data for gather/norm kernels
  std::uniform_int_distribution<int> node_pick(0, 63);
  for (std::size_t m : {std::size_t(1), std::size_t(3), std::size_t(4),
                        std::size_t(9), std::size_t(21)}) {
    CAPTURE(m);
    const auto pos = random_vec(rng, 64 * 3, 5.0);
    std::vector<std::int32_t> g0(3 * m), g1(3 * m);
    for (std::size_t j = 0; j < m; ++j) {
      const int a = node_pick(rng);
      const int b = node_pick(rng);
      for (int c = 0; c < 3; ++c) {
        g0[3 * j + c] = 3 * a + c;
        g1[3 * j + c] = 3 * b + c;
      }
    }
    std::vector<double> d_ref(3 * m), d_avx(3 * m);
    ref.edge_deltas(m, pos.data(), g0.data(), g1.data(), d_ref.data());
    avx->edge_deltas(m, pos.data(), g0.data(), g1.data(), d_avx.data());
    for (std::size_t i = 0; i < 3 * m; ++i) {
      CHECK(d_avx[i] == d_ref[i]);  // pure subtraction: bitwise equal
    }
    std::vector<double> n_ref(m), n_avx(m);
    ref.edge_norms(m, d_ref.data(), n_ref.data());
    avx->edge_norms(m, d_ref.data(), n_avx.data());
    for (std::size_t j = 0; j < m; ++j) {
      CHECK(n_avx[j] == doctest::Approx(n_ref[j]).epsilon(1e-14));
    }
  }
}

TEST_CASE("backend selection") {
  CHECK(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK_FALSE(kernels::select("nonsense"));
  CHECK(kernels::select("auto"));
  const auto names = kernels::available();
  CHECK(!names.empty());
  CHECK(names.front() == "scalar");
}
