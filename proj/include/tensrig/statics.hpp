#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "tensrig/topology.hpp"

namespace tensrig::statics {

/// External nodal forces, 3 x node_count (the W matrix). Zero columns
/// allowed; entries must be finite.
struct LoadCase {
  Eigen::Matrix3Xd forces;

  static LoadCase zero(std::size_t node_count) {
    return LoadCase{Eigen::Matrix3Xd::Zero(3, static_cast<int>(node_count))};
  }
  double norm() const { return forces.norm(); }
};

/// Force densities split by member role: gamma per string (tension,
/// >= 0), lambda per bar (compression-positive). Residual is reported,
/// never hidden; nullspace_dim is the dimension of the homogeneous
/// (W = 0) solution space on the free nodes.
struct EquilibriumSolution {
  Eigen::VectorXd gamma;
  Eigen::VectorXd lambda;
  double residual_norm = 0.0;
  int nullspace_dim = 0;
  // Indices of bars with lambda < 0 (bar in tension): a modeling smell
  // worth surfacing, not an error.
  std::vector<int> bars_in_tension;
};

/// Default residual acceptance: scale-free in the load.
inline double residual_tolerance(double load_norm) {
  return 1e-8 * (1.0 + load_norm);
}

/// K = C_s^T diag(gamma) C_s - C_b^T diag(lambda) C_b and the residual
/// matrix W - N K (zero at equilibrium). lambda > 0 means compression.
struct EquilibriumOperator {
  Eigen::MatrixXd stiffness;   // node_count x node_count
  Eigen::Matrix3Xd residual;   // W - N K
};
EquilibriumOperator equilibrium_operator(const topo::Topology& topology,
                                         const Eigen::Matrix3Xd& positions,
                                         const Eigen::VectorXd& gamma,
                                         const Eigen::VectorXd& lambda,
                                         const LoadCase& load);

/// The member-space equilibrium matrix A over the free (non-anchored)
/// node rows: A * [gamma; lambda] = w, where w is the stacked free-node
/// load. Columns are ordered strings first (topology string order), then
/// bars. Exposed for oracles and the prestress analysis.
struct AssembledSystem {
  Eigen::MatrixXd matrix;       // (3 * free_count) x (n_strings + n_bars)
  Eigen::VectorXd rhs;          // stacked free-node loads
  std::vector<int> string_ids;  // member index per string column
  std::vector<int> bar_ids;     // member index per bar column
  std::vector<int> free_nodes;  // node index per row block
};
AssembledSystem assemble(const topo::Topology& topology,
                         const Eigen::Matrix3Xd& positions,
                         const LoadCase& load);

/// Least-squares solve of NK = W on the free nodes with gamma >= 0
/// (strings never push); bar densities are unconstrained in sign but
/// negative ones are reported in bars_in_tension. Throws InfeasibleError
/// (carrying the best residual) when the residual exceeds
/// residual_tolerance(|W|) and no feasible improvement exists.
EquilibriumSolution solve_force_densities(const topo::Topology& topology,
                                          const Eigen::Matrix3Xd& positions,
                                          const LoadCase& load);

/// Support reactions at anchored nodes, recovered from the full-residual
/// rows after a solve: reaction = (N K - W) at each anchored node.
Eigen::Matrix3Xd anchored_reactions(const topo::Topology& topology,
                                    const Eigen::Matrix3Xd& positions,
                                    const EquilibriumSolution& solution,
                                    const LoadCase& load);

/// Orthonormal basis of the homogeneous solution space (prestress modes)
/// over stacked (gamma, lambda) coordinates, plus whether some
/// combination of modes yields strictly positive string densities.
struct PrestressModes {
  Eigen::MatrixXd basis;  // (n_strings + n_bars) x nullspace_dim
  int string_count = 0;
  bool has_positive_string_mode = false;
};
PrestressModes prestress_modes(const topo::Topology& topology,
                               const Eigen::Matrix3Xd& positions);

/// Per-member axial force: string force = gamma * length (tension >= 0),
/// bar force = lambda * length (compression-positive). Indexed by member.
Eigen::VectorXd member_forces(const topo::Topology& topology,
                              const Eigen::Matrix3Xd& positions,
                              const EquilibriumSolution& solution);

/// Positions matrix from the topology's stored node coordinates.
Eigen::Matrix3Xd positions_of(const topo::Topology& topology);

namespace detail {
/// Mixed nonnegative least squares: minimize |A x - b| with x_i >= 0 for
/// i < n_nonneg and the remaining entries free. Lawson-Hanson active-set
/// with the free block permanently passive. Returns the solution; rank
/// deficiency is handled by column-pivoted QR in the inner solves.
Eigen::VectorXd mixed_nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           int n_nonneg, int max_iterations = 0);
}  // namespace detail

}  // namespace tensrig::statics
