#pragma once

#include <vector>

#include "tensrig/materials.hpp"
#include "tensrig/statics.hpp"
#include "tensrig/topology.hpp"

namespace tensrig::sizing {

// The buckling branch radical uses pi * E by default. A first-principles
// Euler pin-ended derivation gives pi^3 * E instead; build with
// -DTENSRIG_BUCKLING_PI_CUBED=ON to select that variant.
#if defined(TENSRIG_BUCKLING_PI_CUBED)
inline constexpr double kBucklingPiFactor =
    constants::kPi * constants::kPi * constants::kPi;
#else
inline constexpr double kBucklingPiFactor = constants::kPi;
#endif

enum class GoverningMode { Yield, Buckling };

/// Minimum mass of a yield-sized string: (rho/sigma) * gamma * length^2.
double string_mass(double gamma, double length, const Material& material);

struct BarMass {
  double mass = 0.0;
  GoverningMode mode = GoverningMode::Yield;
};

/// Minimum mass of a bar sized by the worse of yield and Euler buckling:
/// max((rho/sigma) * lambda * L^2, 2 rho sqrt(lambda) * sqrt(L^5 / (pi E))).
/// Ties report Yield.
BarMass bar_mass(double lambda, double length, const Material& material);

/// Force density at which the yield and buckling branches cross for a bar
/// of the given length: 4 sigma^2 L / (pi E). Below it buckling governs.
double bar_mode_crossover(double length, const Material& material);

struct MemberMass {
  int member = 0;
  topo::MemberKind kind = topo::MemberKind::Bar;
  double length = 0.0;
  double force_density = 0.0;
  double mass = 0.0;
  GoverningMode mode = GoverningMode::Yield;  // strings always report Yield
};

struct MassReport {
  std::vector<MemberMass> members;
  double string_total = 0.0;
  double bar_total = 0.0;
  double grand_total = 0.0;
};

/// Per-member Eq.-style minimum masses for a solved force-density state.
/// Totals are accumulated over value-sorted addends so they are exactly
/// permutation-invariant under member reordering.
MassReport total_min_mass(const topo::Topology& topology,
                          const statics::EquilibriumSolution& solution,
                          const MaterialTable& materials);

struct ContinuumComparison {
  double continuum_mass = 0.0;
  GoverningMode continuum_mode = GoverningMode::Buckling;
  double best_system_mass = 0.0;
  double best_aspect = 0.0;
  double mass_ratio = 0.0;  // system / continuum at the best aspect
  bool yield_dominated = false;
  std::vector<double> skipped_aspects;  // statics infeasible at these
  std::vector<double> aspects;
  std::vector<double> system_masses;    // aligned with `aspects`
};

/// Mass of a T-bar or D-bar system under an axial end load, swept over
/// aspect ratios, against the single continuum bar carrying the same
/// load over the same span.
ContinuumComparison compare_to_continuum_bar(
    double load, double span, const Material& bar_material,
    const Material& string_material, topo::BarSystem system,
    const std::vector<double>& aspect_sweep);

}  // namespace tensrig::sizing
