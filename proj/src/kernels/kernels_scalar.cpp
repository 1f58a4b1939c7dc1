#include "tensrig/kernels.hpp"

#include <cmath>

namespace tensrig::kernels {
namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpay(std::size_t n, const double* x, double a, const double* y,
          double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
}

void rk4_combine(std::size_t n, const double* x0, double dt, const double* k1,
                 const double* k2, const double* k3, const double* k4,
                 double* out) {
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x0[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

double dot(std::size_t n, const double* x, const double* y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double max_abs(std::size_t n, const double* x) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

void edge_deltas(std::size_t m, const double* pos, const std::int32_t* idx0,
                 const std::int32_t* idx1, double* out) {
  for (std::size_t i = 0; i < 3 * m; ++i) out[i] = pos[idx1[i]] - pos[idx0[i]];
}

void edge_norms(std::size_t m, const double* deltas, double* out) {
  for (std::size_t j = 0; j < m; ++j) {
    const double dx = deltas[3 * j];
    const double dy = deltas[3 * j + 1];
    const double dz = deltas[3 * j + 2];
    out[j] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
}

void scatter_edge_forces(std::size_t m, const double* deltas,
                         const double* coeff, const std::int32_t* end0,
                         const std::int32_t* end1, double* force) {
  for (std::size_t j = 0; j < m; ++j) {
    const double c = coeff[j];
    const std::int32_t a = 3 * end0[j];
    const std::int32_t b = 3 * end1[j];
    for (int k = 0; k < 3; ++k) {
      const double f = c * deltas[3 * j + k];
      force[a + k] -= f;
      force[b + k] += f;
    }
  }
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{
      "scalar", axpy,       xpay,       rk4_combine,
      dot,      max_abs,    edge_deltas, edge_norms,
      scatter_edge_forces,
  };
  return backend;
}

}  // namespace tensrig::kernels
