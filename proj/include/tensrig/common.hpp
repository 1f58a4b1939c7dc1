#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace tensrig {

// Error taxonomy shared by all modules. The CLI maps each type to a
// distinct exit code.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when no force-density solution meets the residual tolerance.
// Carries the best residual found so callers can report how close it got.
struct InfeasibleError : std::runtime_error {
  double best_residual;
  explicit InfeasibleError(const std::string& msg, double residual)
      : std::runtime_error(msg), best_residual(residual) {}
};

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace constants {
inline constexpr double kPi = 3.14159265358979323846;
// Mechanical horsepower.
inline constexpr double kWattsPerHp = 745.699872;
// Latent heat of fusion of water ice at 0 degC, J/kg.
inline constexpr double kIceLatentHeatJPerKg = 334.0e3;
// Liquid water density used for cc <-> kg conversion.
inline constexpr double kWaterGramPerCc = 1.0;
inline constexpr double kStandardGravity = 9.80665;
}  // namespace constants

inline bool nearly_equal(double a, double b, double rel, double abs_floor = 0.0) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) <= std::max(abs_floor, rel * scale);
}

}  // namespace tensrig
