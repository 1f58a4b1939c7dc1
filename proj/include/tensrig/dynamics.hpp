#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tensrig/statics.hpp"
#include "tensrig/topology.hpp"

namespace tensrig::dyn {

/// Nodal state: column-major 3 x n flattened (x0,y0,z0,x1,...).
/// Anchored nodes keep zero velocity and never move.
struct DynamicsState {
  std::vector<double> positions;
  std::vector<double> velocities;
  double time = 0.0;

  std::size_t node_count() const { return positions.size() / 3; }
  Eigen::Map<const Eigen::Matrix3Xd> position_matrix() const {
    return {positions.data(), 3,
            static_cast<Eigen::Index>(positions.size() / 3)};
  }
};

/// Tension-only linear string with axial damping. The force density is
///   gamma = (k (len - rest) + c dlen/dt) / len
/// for len > rest, clamped at zero, and exactly zero for slack strings.
struct StringLaw {
  double stiffness = 0.0;     // N/m
  double rest_length = 0.0;   // m, > 0
  double damping = 0.0;       // N s/m
};

/// How member masses are lumped onto nodes: half of each member's mass
/// to either endpoint, plus optional per-node payload.
struct MassAssignment {
  double bar_mass = 1.0;             // kg per bar unless overridden
  double string_mass = 0.0;          // kg per string unless overridden
  std::map<int, double> member_overrides;  // by member index
  std::vector<double> node_payload;  // kg, empty or size node_count
};

struct Energy {
  double kinetic = 0.0;
  double gravitational = 0.0;
  double elastic = 0.0;
  double total() const { return kinetic + gravitational + elastic; }
};

/// Piecewise-constant external load: entries sorted by time, each active
/// from its time until the next entry.
struct LoadSchedule {
  struct Entry {
    double time = 0.0;
    Eigen::Matrix3Xd forces;
  };
  std::vector<Entry> entries;

  const Eigen::Matrix3Xd* active_at(double t) const {
    const Eigen::Matrix3Xd* out = nullptr;
    for (const auto& e : entries) {
      if (e.time <= t) out = &e.forces;
      else break;
    }
    return out;
  }
};

/// Assembled operators for one topology: lumped nodal masses, bar rest
/// lengths, member incidence in flat-gather form for the kernels, and
/// the anchoring constraint (applied as zero inverse mass).
class Model {
 public:
  Model(topo::Topology topology, std::vector<StringLaw> laws,
        const MassAssignment& masses,
        Eigen::Vector3d gravity = Eigen::Vector3d::Zero());

  const topo::Topology& topology() const { return topology_; }
  const std::vector<StringLaw>& laws() const { return laws_; }
  const std::vector<double>& node_masses() const { return node_masses_; }
  const Eigen::Vector3d& gravity() const { return gravity_; }
  const std::vector<double>& bar_rest_lengths() const { return bar_rest_; }
  int bar_count() const { return static_cast<int>(bar_end0_.size()); }
  int string_count() const { return static_cast<int>(string_end0_.size()); }

  DynamicsState initial_state() const;

  /// Tension-only force density per string at the given state.
  Eigen::VectorXd string_force_densities(const DynamicsState& state) const;

  /// Constraint force densities keeping every bar at its rest length,
  /// solved from the current state and the non-constraint forces
  /// (strings + gravity + external). Compression-positive.
  Eigen::VectorXd bar_force_densities(const DynamicsState& state,
                                      const Eigen::Matrix3Xd* external) const;

  struct StepInfo {
    double projection_displacement = 0.0;  // max nodal move in projection
    double constraint_drift = 0.0;         // max |len/rest - 1| post-projection
  };

  /// One explicit RK4 step of (positions, velocities) followed by a
  /// projection that restores bar lengths and anchored positions.
  /// Throws IntegrationError on non-finite state, leaving `state` at the
  /// last good value.
  StepInfo step(DynamicsState& state, double dt,
                const Eigen::Matrix3Xd* external = nullptr) const;

  Energy energy(const DynamicsState& state) const;

 private:
  struct Workspace;
  static Workspace& workspace_for(std::size_t n, std::size_t n_s, std::size_t n_b);
  void accelerations(const double* pos, const double* vel,
                     const Eigen::Matrix3Xd* external, double* acc,
                     Workspace& ws) const;
  void derivative(const double* y, const Eigen::Matrix3Xd* external, double* k,
                  Workspace& ws) const;
  void project(DynamicsState& state, StepInfo& info) const;

  topo::Topology topology_;
  std::vector<StringLaw> laws_;
  Eigen::Vector3d gravity_;
  std::vector<double> node_masses_;      // n
  std::vector<double> inv_masses_;       // n, 0 for anchored
  std::vector<double> bar_rest_;         // per bar
  // Flat gather indices (3m) and endpoint node ids (m) per member class.
  std::vector<std::int32_t> bar_gidx0_, bar_gidx1_, bar_end0_, bar_end1_;
  std::vector<std::int32_t> string_gidx0_, string_gidx1_, string_end0_, string_end1_;
  std::vector<int> string_member_ids_;
  std::vector<int> bar_member_ids_;
};

struct Sample {
  DynamicsState state;
  Energy energy;
  double max_constraint_drift = 0.0;          // since previous sample
  double max_projection_displacement = 0.0;   // since previous sample
};

struct Trajectory {
  std::vector<Sample> samples;
  bool completed = true;
  std::string error;  // non-empty when a step failed mid-run
};

struct SimulateParams {
  double dt = 1e-4;
  double duration = 0.0;
  int sample_stride = 1;
};

/// Fixed-step integration with periodic sampling. Step failures stop the
/// run and leave the partial trajectory with `completed = false`.
Trajectory simulate(const Model& model, DynamicsState state,
                    const LoadSchedule& schedule, const SimulateParams& params);

/// Uniform string laws derived from a topology's built geometry: rest
/// length = built length * rest_scale (scale < 1 pretensions the net).
std::vector<StringLaw> uniform_laws(const topo::Topology& topology,
                                    double stiffness, double damping,
                                    double rest_scale = 1.0);

/// Laws whose rest lengths realize the given force densities at the
/// built geometry: gamma = k (L - L0) / L => L0 = L (1 - gamma / k).
/// Lets a statics prestress mode become the dynamic equilibrium.
/// Requires gamma < stiffness per string.
std::vector<StringLaw> prestressed_laws(const topo::Topology& topology,
                                        double stiffness, double damping,
                                        const Eigen::VectorXd& gamma);

}  // namespace tensrig::dyn
