#include "tensrig/statics.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace tensrig::statics {

namespace {

void check_dimensions(const topo::Topology& topology,
                      const Eigen::Matrix3Xd& positions, const LoadCase& load) {
  const auto n = static_cast<Eigen::Index>(topology.node_count());
  if (positions.cols() != n) {
    throw std::invalid_argument("positions have " +
                                std::to_string(positions.cols()) +
                                " columns, topology has " + std::to_string(n) +
                                " nodes");
  }
  if (load.forces.cols() != n) {
    throw std::invalid_argument("load case covers " +
                                std::to_string(load.forces.cols()) +
                                " nodes, topology has " + std::to_string(n));
  }
  if (!load.forces.allFinite()) {
    throw std::invalid_argument("load case contains non-finite entries");
  }
}

// Rank and right-nullspace of A by SVD. The tolerance follows the usual
// max(m,n) * eps * sigma_max convention.
struct NullspaceInfo {
  int dim = 0;
  Eigen::MatrixXd basis;  // cols x dim, orthonormal
};

NullspaceInfo nullspace_of(const Eigen::MatrixXd& A) {
  NullspaceInfo out;
  if (A.cols() == 0) return out;
  if (A.rows() == 0) {
    out.dim = static_cast<int>(A.cols());
    out.basis = Eigen::MatrixXd::Identity(A.cols(), A.cols());
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  const double tol = std::max(A.rows(), A.cols()) *
                     std::numeric_limits<double>::epsilon() * std::max(smax, 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol) ++rank;
  }
  out.dim = static_cast<int>(A.cols()) - rank;
  out.basis = svd.matrixV().rightCols(out.dim);
  return out;
}

}  // namespace

Eigen::Matrix3Xd positions_of(const topo::Topology& topology) {
  Eigen::Matrix3Xd p(3, static_cast<Eigen::Index>(topology.node_count()));
  for (std::size_t i = 0; i < topology.node_count(); ++i) {
    p.col(static_cast<Eigen::Index>(i)) = topology.nodes[i].position;
  }
  return p;
}

EquilibriumOperator equilibrium_operator(const topo::Topology& topology,
                                         const Eigen::Matrix3Xd& positions,
                                         const Eigen::VectorXd& gamma,
                                         const Eigen::VectorXd& lambda,
                                         const LoadCase& load) {
  check_dimensions(topology, positions, load);
  if (gamma.size() != static_cast<Eigen::Index>(topology.string_count()) ||
      lambda.size() != static_cast<Eigen::Index>(topology.bar_count())) {
    throw std::invalid_argument(
        "force-density vector sizes do not match string/bar counts");
  }
  const auto C = topo::connectivity_matrices(topology);
  EquilibriumOperator out;
  out.stiffness = C.strings.transpose() * gamma.asDiagonal() * C.strings -
                  C.bars.transpose() * lambda.asDiagonal() * C.bars;
  out.residual = load.forces - positions * out.stiffness;
  return out;
}

AssembledSystem assemble(const topo::Topology& topology,
                         const Eigen::Matrix3Xd& positions,
                         const LoadCase& load) {
  check_dimensions(topology, positions, load);
  AssembledSystem sys;
  std::vector<int> row_of(topology.node_count(), -1);
  for (std::size_t i = 0; i < topology.node_count(); ++i) {
    if (!topology.nodes[i].anchored) {
      row_of[i] = static_cast<int>(sys.free_nodes.size());
      sys.free_nodes.push_back(static_cast<int>(i));
    }
  }
  sys.string_ids = topology.members_of(topo::MemberKind::String);
  sys.bar_ids = topology.members_of(topo::MemberKind::Bar);
  const int n_s = static_cast<int>(sys.string_ids.size());
  const int n_b = static_cast<int>(sys.bar_ids.size());
  const int rows = 3 * static_cast<int>(sys.free_nodes.size());

  sys.matrix = Eigen::MatrixXd::Zero(rows, n_s + n_b);
  sys.rhs.resize(rows);
  for (std::size_t r = 0; r < sys.free_nodes.size(); ++r) {
    sys.rhs.segment<3>(3 * static_cast<Eigen::Index>(r)) =
        load.forces.col(sys.free_nodes[r]);
  }

  // Column convention from NK = W: a string contributes -s at end0 and +s
  // at end1; a bar contributes +b at end0 and -b at end1 (compression
  // pushes the ends apart).
  const auto add_column = [&](int col, int end0, int end1,
                              const Eigen::Vector3d& v, double sign0) {
    if (row_of[end0] >= 0) sys.matrix.block<3, 1>(3 * row_of[end0], col) = sign0 * v;
    if (row_of[end1] >= 0) sys.matrix.block<3, 1>(3 * row_of[end1], col) = -sign0 * v;
  };
  for (int j = 0; j < n_s; ++j) {
    const auto& m = topology.members[sys.string_ids[j]];
    const Eigen::Vector3d s = positions.col(m.end1) - positions.col(m.end0);
    add_column(j, m.end0, m.end1, s, -1.0);
  }
  for (int j = 0; j < n_b; ++j) {
    const auto& m = topology.members[sys.bar_ids[j]];
    const Eigen::Vector3d b = positions.col(m.end1) - positions.col(m.end0);
    add_column(n_s + j, m.end0, m.end1, b, +1.0);
  }
  return sys;
}

namespace detail {

Eigen::VectorXd mixed_nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           int n_nonneg, int max_iterations) {
  const int n = static_cast<int>(A.cols());
  if (n_nonneg < 0 || n_nonneg > n) {
    throw std::invalid_argument("mixed_nnls: bad nonnegative block size");
  }
  if (max_iterations <= 0) max_iterations = 3 * n + 50;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  for (int j = n_nonneg; j < n; ++j) passive[static_cast<std::size_t>(j)] = true;

  const auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<int> cols;
    for (int j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    z.setZero(n);
    if (cols.empty()) return;
    Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(cols[k]);
    const Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zp(static_cast<Eigen::Index>(k));
  };

  Eigen::VectorXd z(n);
  solve_passive(z);
  x = z;
  const double dual_scale =
      (A.size() ? A.cwiseAbs().maxCoeff() : 0.0) + 1.0;
  // Entering variables that leave again without progress are banned until
  // the iterate moves; this breaks the classic degenerate cycle.
  std::vector<bool> banned(static_cast<std::size_t>(n_nonneg), false);

  for (int iter = 0; iter < max_iterations; ++iter) {
    const Eigen::VectorXd resid = b - A * x;
    const Eigen::VectorXd dual = A.transpose() * resid;
    const double dual_tol = 1e-12 * dual_scale * (1.0 + resid.norm());

    int enter = -1;
    double best = dual_tol;
    for (int j = 0; j < n_nonneg; ++j) {
      if (!passive[static_cast<std::size_t>(j)] &&
          !banned[static_cast<std::size_t>(j)] && dual(j) > best) {
        best = dual(j);
        enter = j;
      }
    }
    if (enter < 0) break;
    passive[static_cast<std::size_t>(enter)] = true;
    bool moved = false;

    for (int inner = 0; inner <= n + 1; ++inner) {
      solve_passive(z);
      double alpha = 1.0;
      int blocker = -1;
      for (int j = 0; j < n_nonneg; ++j) {
        if (!passive[static_cast<std::size_t>(j)]) continue;
        if (z(j) > 0.0) continue;
        const double denom = x(j) - z(j);
        if (denom <= 0.0) {
          // z(j) >= x(j) with z(j) <= 0 means x(j) is already ~0.
          if (0.0 < alpha) {
            alpha = 0.0;
            blocker = j;
          }
          continue;
        }
        const double step = x(j) / denom;
        if (step < alpha) {
          alpha = step;
          blocker = j;
        }
      }
      if (blocker < 0) {
        if ((z - x).norm() > 0.0) moved = true;
        x = z;
        break;
      }
      if (alpha > 0.0) moved = true;
      x += alpha * (z - x);
      for (int j = 0; j < n_nonneg; ++j) {
        if (passive[static_cast<std::size_t>(j)] &&
            (j == blocker || x(j) <= 0.0)) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
    if (moved) {
      std::fill(banned.begin(), banned.end(), false);
    } else {
      banned[static_cast<std::size_t>(enter)] = true;
    }
  }
  // Exact zeros for active-set entries; inner solves keep passive strings
  // positive, so clamp only guards round-off.
  for (int j = 0; j < n_nonneg; ++j) x(j) = std::max(x(j), 0.0);
  return x;
}

}  // namespace detail

EquilibriumSolution solve_force_densities(const topo::Topology& topology,
                                          const Eigen::Matrix3Xd& positions,
                                          const LoadCase& load) {
  topo::require_valid(topology);
  const AssembledSystem sys = assemble(topology, positions, load);
  const int n_s = static_cast<int>(sys.string_ids.size());
  const int n_b = static_cast<int>(sys.bar_ids.size());

  const Eigen::VectorXd x = detail::mixed_nnls(sys.matrix, sys.rhs, n_s);
  const double residual = (sys.matrix * x - sys.rhs).norm();
  const double tol = residual_tolerance(load.norm());
  if (residual > tol) {
    throw InfeasibleError(
        "unstable under load: best residual " + std::to_string(residual) +
            " N exceeds tolerance " + std::to_string(tol) + " N",
        residual);
  }

  EquilibriumSolution sol;
  sol.gamma = x.head(n_s);
  sol.lambda = x.tail(n_b);
  sol.residual_norm = residual;
  sol.nullspace_dim = nullspace_of(sys.matrix).dim;
  const double lambda_tol =
      1e-12 * (1.0 + (n_b > 0 ? sol.lambda.cwiseAbs().maxCoeff() : 0.0));
  for (int j = 0; j < n_b; ++j) {
    if (sol.lambda(j) < -lambda_tol) sol.bars_in_tension.push_back(sys.bar_ids[j]);
  }
  return sol;
}

Eigen::Matrix3Xd anchored_reactions(const topo::Topology& topology,
                                    const Eigen::Matrix3Xd& positions,
                                    const EquilibriumSolution& solution,
                                    const LoadCase& load) {
  const EquilibriumOperator op = equilibrium_operator(
      topology, positions, solution.gamma, solution.lambda, load);
  Eigen::Matrix3Xd reactions =
      Eigen::Matrix3Xd::Zero(3, static_cast<Eigen::Index>(topology.node_count()));
  for (std::size_t i = 0; i < topology.node_count(); ++i) {
    if (topology.nodes[i].anchored) {
      reactions.col(static_cast<Eigen::Index>(i)) =
          -op.residual.col(static_cast<Eigen::Index>(i));
    }
  }
  return reactions;
}

PrestressModes prestress_modes(const topo::Topology& topology,
                               const Eigen::Matrix3Xd& positions) {
  topo::require_valid(topology);
  const AssembledSystem sys =
      assemble(topology, positions, LoadCase::zero(topology.node_count()));
  const int n_s = static_cast<int>(sys.string_ids.size());

  PrestressModes out;
  out.string_count = n_s;
  const NullspaceInfo ns = nullspace_of(sys.matrix);
  out.basis = ns.basis;

  if (ns.dim == 0 || n_s == 0) {
    out.has_positive_string_mode = false;
    return out;
  }
  // A strictly positive string mode exists iff the homogeneous system
  // admits gamma >= 1 (the feasible cone is open and scale-invariant).
  // Substituting gamma = 1 + u turns that into a mixed NNLS feasibility
  // problem with right-hand side -(sum of string columns).
  const Eigen::VectorXd rhs = -sys.matrix.leftCols(n_s).rowwise().sum();
  const Eigen::VectorXd x =
      detail::mixed_nnls(sys.matrix, rhs, n_s);
  const double feas_residual = (sys.matrix * x - rhs).norm();
  out.has_positive_string_mode =
      feas_residual <= 1e-8 * (1.0 + rhs.norm());
  return out;
}

Eigen::VectorXd member_forces(const topo::Topology& topology,
                              const Eigen::Matrix3Xd& positions,
                              const EquilibriumSolution& solution) {
  if (solution.gamma.size() != static_cast<Eigen::Index>(topology.string_count()) ||
      solution.lambda.size() != static_cast<Eigen::Index>(topology.bar_count())) {
    throw std::invalid_argument("solution does not match topology member counts");
  }
  Eigen::VectorXd forces(static_cast<Eigen::Index>(topology.members.size()));
  int s = 0;
  int b = 0;
  for (std::size_t i = 0; i < topology.members.size(); ++i) {
    const auto& m = topology.members[i];
    const double len =
        (positions.col(m.end1) - positions.col(m.end0)).norm();
    if (m.kind == topo::MemberKind::String) {
      forces(static_cast<Eigen::Index>(i)) = solution.gamma(s++) * len;
    } else {
      forces(static_cast<Eigen::Index>(i)) = solution.lambda(b++) * len;
    }
  }
  return forces;
}

}  // namespace tensrig::statics
