#include "tensrig/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tensrig::sizing {

namespace {

// Exactly permutation-invariant accumulation: identical multisets of
// addends sum in an identical order.
double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

}  // namespace

double string_mass(double gamma, double length, const Material& material) {
  material.check();
  if (gamma < 0.0) {
    throw std::invalid_argument("string_mass: gamma must be >= 0");
  }
  if (length <= 0.0) {
    throw std::invalid_argument("string_mass: length must be > 0");
  }
  return material.density / material.yield_strength * gamma * length * length;
}

BarMass bar_mass(double lambda, double length, const Material& material) {
  material.check();
  if (lambda < 0.0) {
    throw std::invalid_argument(
        "bar_mass: lambda must be >= 0 (a bar in tension is flagged by the "
        "statics solver, not sized here)");
  }
  if (length <= 0.0) {
    throw std::invalid_argument("bar_mass: length must be > 0");
  }
  const double yield =
      material.density / material.yield_strength * lambda * length * length;
  const double buckling =
      2.0 * material.density * std::sqrt(lambda) *
      std::sqrt(std::pow(length, 5) / (kBucklingPiFactor * material.youngs_modulus));
  BarMass out;
  if (buckling > yield) {
    out.mass = buckling;
    out.mode = GoverningMode::Buckling;
  } else {
    out.mass = yield;
    out.mode = GoverningMode::Yield;
  }
  return out;
}

double bar_mode_crossover(double length, const Material& material) {
  material.check();
  if (length <= 0.0) {
    throw std::invalid_argument("bar_mode_crossover: length must be > 0");
  }
  const double s = material.yield_strength;
  return 4.0 * s * s * length / (kBucklingPiFactor * material.youngs_modulus);
}

MassReport total_min_mass(const topo::Topology& topology,
                          const statics::EquilibriumSolution& solution,
                          const MaterialTable& materials) {
  if (solution.gamma.size() != static_cast<Eigen::Index>(topology.string_count()) ||
      solution.lambda.size() != static_cast<Eigen::Index>(topology.bar_count())) {
    throw std::invalid_argument(
        "total_min_mass: solution does not match topology member counts");
  }
  MassReport report;
  std::vector<double> string_masses;
  std::vector<double> bar_masses;
  int s = 0;
  int b = 0;
  for (std::size_t i = 0; i < topology.members.size(); ++i) {
    const auto& m = topology.members[i];
    const Material& mat = lookup(materials, m.material);
    MemberMass mm;
    mm.member = static_cast<int>(i);
    mm.kind = m.kind;
    mm.length = topology.member_length(m);
    if (m.kind == topo::MemberKind::String) {
      mm.force_density = solution.gamma(s++);
      mm.mass = string_mass(mm.force_density, mm.length, mat);
      mm.mode = GoverningMode::Yield;
      string_masses.push_back(mm.mass);
    } else {
      mm.force_density = solution.lambda(b++);
      const BarMass bm = bar_mass(mm.force_density, mm.length, mat);
      mm.mass = bm.mass;
      mm.mode = bm.mode;
      bar_masses.push_back(mm.mass);
    }
    report.members.push_back(mm);
  }
  report.string_total = sorted_sum(string_masses);
  report.bar_total = sorted_sum(bar_masses);
  std::vector<double> all;
  all.reserve(string_masses.size() + bar_masses.size());
  all.insert(all.end(), string_masses.begin(), string_masses.end());
  all.insert(all.end(), bar_masses.begin(), bar_masses.end());
  report.grand_total = sorted_sum(std::move(all));
  return report;
}

ContinuumComparison compare_to_continuum_bar(
    double load, double span, const Material& bar_material,
    const Material& string_material, topo::BarSystem system,
    const std::vector<double>& aspect_sweep) {
  if (load <= 0.0) {
    throw std::invalid_argument("compare_to_continuum_bar: load must be > 0");
  }
  if (span <= 0.0) {
    throw std::invalid_argument("compare_to_continuum_bar: span must be > 0");
  }
  if (aspect_sweep.empty()) {
    throw std::invalid_argument("compare_to_continuum_bar: empty aspect sweep");
  }

  ContinuumComparison out;
  const BarMass continuum = bar_mass(load / span, span, bar_material);
  out.continuum_mass = continuum.mass;
  out.continuum_mode = continuum.mode;
  out.yield_dominated = continuum.mode == GoverningMode::Yield;

  MaterialTable materials;
  materials[topo::kDefaultBarMaterial] = bar_material;
  materials[topo::kDefaultStringMaterial] = string_material;
  // Rename-safe: builders tag members with the default material names.
  materials[topo::kDefaultBarMaterial].name = topo::kDefaultBarMaterial;
  materials[topo::kDefaultStringMaterial].name = topo::kDefaultStringMaterial;

  bool found = false;
  for (double aspect : aspect_sweep) {
    topo::Topology t;
    try {
      t = topo::build_bar_system(system, span, aspect);
    } catch (const GeometryError&) {
      out.skipped_aspects.push_back(aspect);
      continue;
    } catch (const std::invalid_argument&) {
      out.skipped_aspects.push_back(aspect);
      continue;
    }
    const auto terminals = topo::bar_system_terminals(t);
    statics::LoadCase end_load = statics::LoadCase::zero(t.node_count());
    end_load.forces.col(terminals.left) = Eigen::Vector3d(load, 0.0, 0.0);
    end_load.forces.col(terminals.right) = Eigen::Vector3d(-load, 0.0, 0.0);

    double mass = 0.0;
    try {
      const auto sol = statics::solve_force_densities(
          t, statics::positions_of(t), end_load);
      mass = total_min_mass(t, sol, materials).grand_total;
    } catch (const InfeasibleError&) {
      out.skipped_aspects.push_back(aspect);
      continue;
    }
    out.aspects.push_back(aspect);
    out.system_masses.push_back(mass);
    if (!found || mass < out.best_system_mass) {
      found = true;
      out.best_system_mass = mass;
      out.best_aspect = aspect;
    }
  }
  if (!found) {
    throw InfeasibleError(
        "compare_to_continuum_bar: statics infeasible at every sweep aspect",
        0.0);
  }
  out.mass_ratio = out.best_system_mass / out.continuum_mass;
  return out;
}

}  // namespace tensrig::sizing
