#include "tensrig/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "tensrig/kernels.hpp"

namespace tensrig::dyn {

namespace {

double dot3(const double* a, const double* b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

struct Model::Workspace {
  std::vector<double> string_deltas, string_vdeltas, string_norms, gamma;
  std::vector<double> bar_deltas, bar_vdeltas, bar_norms;
  std::vector<double> force;  // 3n, non-constraint forces then total
  Eigen::MatrixXd gram;
  Eigen::VectorXd lambda_rhs, lambda;
  std::vector<double> y0, y1, k1, k2, k3, k4, ynew, pre_projection;

  void resize(std::size_t n, std::size_t n_s, std::size_t n_b) {
    string_deltas.resize(3 * n_s);
    string_vdeltas.resize(3 * n_s);
    string_norms.resize(n_s);
    gamma.resize(n_s);
    bar_deltas.resize(3 * n_b);
    bar_vdeltas.resize(3 * n_b);
    bar_norms.resize(n_b);
    force.resize(3 * n);
    gram.resize(static_cast<Eigen::Index>(n_b), static_cast<Eigen::Index>(n_b));
    lambda_rhs.resize(static_cast<Eigen::Index>(n_b));
    lambda.resize(static_cast<Eigen::Index>(n_b));
    const std::size_t m = 6 * n;
    y0.resize(m);
    y1.resize(m);
    k1.resize(m);
    k2.resize(m);
    k3.resize(m);
    k4.resize(m);
    ynew.resize(m);
    pre_projection.resize(3 * n);
  }
};

Model::Workspace& Model::workspace_for(std::size_t n, std::size_t n_s,
                                       std::size_t n_b) {
  thread_local Workspace ws;
  ws.resize(n, n_s, n_b);
  return ws;
}

Model::Model(topo::Topology topology, std::vector<StringLaw> laws,
             const MassAssignment& masses, Eigen::Vector3d gravity)
    : topology_(std::move(topology)), laws_(std::move(laws)), gravity_(gravity) {
  topo::require_valid(topology_);
  const std::size_t n = topology_.node_count();
  if (laws_.size() != topology_.string_count()) {
    throw std::invalid_argument("need one string law per string");
  }
  for (const auto& law : laws_) {
    if (law.rest_length <= 0.0) {
      throw std::invalid_argument("string rest lengths must be > 0");
    }
    if (law.stiffness < 0.0 || law.damping < 0.0) {
      throw std::invalid_argument("string stiffness and damping must be >= 0");
    }
  }
  if (!masses.node_payload.empty() && masses.node_payload.size() != n) {
    throw std::invalid_argument("node_payload must be empty or cover all nodes");
  }

  node_masses_.assign(n, 0.0);
  if (!masses.node_payload.empty()) node_masses_ = masses.node_payload;

  for (std::size_t i = 0; i < topology_.members.size(); ++i) {
    const auto& m = topology_.members[i];
    const bool is_bar = m.kind == topo::MemberKind::Bar;
    double mass = is_bar ? masses.bar_mass : masses.string_mass;
    if (const auto it = masses.member_overrides.find(static_cast<int>(i));
        it != masses.member_overrides.end()) {
      mass = it->second;
    }
    if (mass < 0.0) throw std::invalid_argument("member masses must be >= 0");
    node_masses_[static_cast<std::size_t>(m.end0)] += 0.5 * mass;
    node_masses_[static_cast<std::size_t>(m.end1)] += 0.5 * mass;

    const auto push_member = [&](std::vector<std::int32_t>& g0,
                                 std::vector<std::int32_t>& g1,
                                 std::vector<std::int32_t>& e0,
                                 std::vector<std::int32_t>& e1) {
      for (int c = 0; c < 3; ++c) {
        g0.push_back(static_cast<std::int32_t>(3 * m.end0 + c));
        g1.push_back(static_cast<std::int32_t>(3 * m.end1 + c));
      }
      e0.push_back(static_cast<std::int32_t>(m.end0));
      e1.push_back(static_cast<std::int32_t>(m.end1));
    };
    if (is_bar) {
      const double rest = topology_.member_length(m);
      if (rest <= 0.0) {
        throw std::invalid_argument("zero-length bar: constraint system singular");
      }
      bar_rest_.push_back(rest);
      bar_member_ids_.push_back(static_cast<int>(i));
      push_member(bar_gidx0_, bar_gidx1_, bar_end0_, bar_end1_);
    } else {
      string_member_ids_.push_back(static_cast<int>(i));
      push_member(string_gidx0_, string_gidx1_, string_end0_, string_end1_);
    }
  }

  inv_masses_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (topology_.nodes[i].anchored) {
      inv_masses_[i] = 0.0;
    } else {
      if (node_masses_[i] <= 0.0) {
        throw std::invalid_argument("free node " + std::to_string(i) +
                                    " has zero mass; assign member or payload mass");
      }
      inv_masses_[i] = 1.0 / node_masses_[i];
    }
  }
}

DynamicsState Model::initial_state() const {
  DynamicsState s;
  const std::size_t n = topology_.node_count();
  s.positions.resize(3 * n);
  s.velocities.assign(3 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = topology_.nodes[i].position;
    s.positions[3 * i] = p.x();
    s.positions[3 * i + 1] = p.y();
    s.positions[3 * i + 2] = p.z();
  }
  return s;
}

Eigen::VectorXd Model::string_force_densities(const DynamicsState& state) const {
  const auto& k = kernels::active();
  const std::size_t n_s = laws_.size();
  Eigen::VectorXd gamma(static_cast<Eigen::Index>(n_s));
  if (n_s == 0) return gamma;
  std::vector<double> deltas(3 * n_s), vdeltas(3 * n_s), norms(n_s);
  k.edge_deltas(n_s, state.positions.data(), string_gidx0_.data(),
                string_gidx1_.data(), deltas.data());
  k.edge_deltas(n_s, state.velocities.data(), string_gidx0_.data(),
                string_gidx1_.data(), vdeltas.data());
  k.edge_norms(n_s, deltas.data(), norms.data());
  for (std::size_t j = 0; j < n_s; ++j) {
    const StringLaw& law = laws_[j];
    const double len = norms[j];
    if (len <= law.rest_length) {
      gamma(static_cast<Eigen::Index>(j)) = 0.0;  // slack: exactly zero
      continue;
    }
    const double ldot = dot3(&deltas[3 * j], &vdeltas[3 * j]) / len;
    const double tension = law.stiffness * (len - law.rest_length) + law.damping * ldot;
    gamma(static_cast<Eigen::Index>(j)) = std::max(0.0, tension / len);
  }
  return gamma;
}

void Model::accelerations(const double* pos, const double* vel,
                          const Eigen::Matrix3Xd* external, double* acc,
                          Workspace& ws) const {
  const auto& k = kernels::active();
  const std::size_t n = topology_.node_count();
  const std::size_t n_s = laws_.size();
  const std::size_t n_b = bar_rest_.size();

  // Non-constraint forces: external load, gravity, string tensions.
  for (std::size_t i = 0; i < n; ++i) {
    const double m = node_masses_[i];
    for (int c = 0; c < 3; ++c) {
      double f = m * gravity_[c];
      if (external != nullptr) f += (*external)(c, static_cast<Eigen::Index>(i));
      ws.force[3 * i + c] = f;
    }
  }

  if (n_s > 0) {
    k.edge_deltas(n_s, pos, string_gidx0_.data(), string_gidx1_.data(),
                  ws.string_deltas.data());
    k.edge_deltas(n_s, vel, string_gidx0_.data(), string_gidx1_.data(),
                  ws.string_vdeltas.data());
    k.edge_norms(n_s, ws.string_deltas.data(), ws.string_norms.data());
    for (std::size_t j = 0; j < n_s; ++j) {
      const StringLaw& law = laws_[j];
      const double len = ws.string_norms[j];
      double gamma = 0.0;
      if (len > law.rest_length) {
        const double ldot =
            dot3(&ws.string_deltas[3 * j], &ws.string_vdeltas[3 * j]) / len;
        gamma = std::max(
            0.0, (law.stiffness * (len - law.rest_length) + law.damping * ldot) / len);
      }
      // scatter convention: force[end0] -= c*delta, force[end1] += c*delta;
      // a string pulls end0 toward end1, so c = -gamma.
      ws.gamma[j] = -gamma;
    }
    k.scatter_edge_forces(n_s, ws.string_deltas.data(), ws.gamma.data(),
                          string_end0_.data(), string_end1_.data(),
                          ws.force.data());
  }

  if (n_b > 0) {
    k.edge_deltas(n_b, pos, bar_gidx0_.data(), bar_gidx1_.data(),
                  ws.bar_deltas.data());
    k.edge_deltas(n_b, vel, bar_gidx0_.data(), bar_gidx1_.data(),
                  ws.bar_vdeltas.data());

    // Rigid-bar force densities from the acceleration-level constraint
    // d^2/dt^2 |b_k|^2 = 0: a symmetric Gram system over the bars,
    // diagonal when no two bars share a node.
    for (std::size_t kk = 0; kk < n_b; ++kk) {
      const double* bk = &ws.bar_deltas[3 * kk];
      const double* bdk = &ws.bar_vdeltas[3 * kk];
      const int a = bar_end0_[kk];
      const int b = bar_end1_[kk];
      const double wa = inv_masses_[static_cast<std::size_t>(a)];
      const double wb = inv_masses_[static_cast<std::size_t>(b)];
      double rhs = dot3(bdk, bdk);
      rhs += wb * dot3(bk, &ws.force[3 * static_cast<std::size_t>(b)]) -
             wa * dot3(bk, &ws.force[3 * static_cast<std::size_t>(a)]);
      ws.lambda_rhs(static_cast<Eigen::Index>(kk)) = -rhs;
      for (std::size_t ll = 0; ll < n_b; ++ll) {
        double g = 0.0;
        const int la = bar_end0_[ll];
        const int lb = bar_end1_[ll];
        // sigma = -1 at end0, +1 at end1; entry only when bars share a node
        double coupling = 0.0;
        if (b == la) coupling -= wb;
        if (b == lb) coupling += wb;
        if (a == la) coupling += wa;
        if (a == lb) coupling -= wa;
        if (coupling != 0.0) g = coupling * dot3(bk, &ws.bar_deltas[3 * ll]);
        ws.gram(static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(ll)) = g;
      }
    }
    ws.lambda = ws.gram.completeOrthogonalDecomposition().solve(ws.lambda_rhs);
    k.scatter_edge_forces(n_b, ws.bar_deltas.data(), ws.lambda.data(),
                          bar_end0_.data(), bar_end1_.data(), ws.force.data());
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double w = inv_masses_[i];
    acc[3 * i] = w * ws.force[3 * i];
    acc[3 * i + 1] = w * ws.force[3 * i + 1];
    acc[3 * i + 2] = w * ws.force[3 * i + 2];
  }
}

Eigen::VectorXd Model::bar_force_densities(const DynamicsState& state,
                                           const Eigen::Matrix3Xd* external) const {
  const std::size_t n = topology_.node_count();
  const std::size_t n_b = bar_rest_.size();
  Workspace& ws = workspace_for(n, laws_.size(), n_b);
  std::vector<double> acc(3 * n);
  accelerations(state.positions.data(), state.velocities.data(), external,
                acc.data(), ws);
  return ws.lambda;
}

void Model::derivative(const double* y, const Eigen::Matrix3Xd* external,
                       double* k, Workspace& ws) const {
  const std::size_t n = topology_.node_count();
  const double* pos = y;
  const double* vel = y + 3 * n;
  // dx/dt = v (zero for anchored nodes), dv/dt = a
  for (std::size_t i = 0; i < n; ++i) {
    const bool anchored = inv_masses_[i] == 0.0;
    for (int c = 0; c < 3; ++c) {
      k[3 * i + c] = anchored ? 0.0 : vel[3 * i + c];
    }
  }
  accelerations(pos, vel, external, k + 3 * n, ws);
}

void Model::project(DynamicsState& state, StepInfo& info) const {
  const std::size_t n_b = bar_rest_.size();
  if (n_b == 0) {
    info.constraint_drift = 0.0;
    return;
  }
  double* pos = state.positions.data();
  double* vel = state.velocities.data();

  constexpr int kMaxSweeps = 64;
  constexpr double kTol = 1e-13;

  double worst = 0.0;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    worst = 0.0;
    for (std::size_t j = 0; j < n_b; ++j) {
      const int a = bar_end0_[j];
      const int b = bar_end1_[j];
      double d[3] = {pos[3 * b] - pos[3 * a], pos[3 * b + 1] - pos[3 * a + 1],
                     pos[3 * b + 2] - pos[3 * a + 2]};
      const double len = std::sqrt(dot3(d, d));
      const double rest = bar_rest_[j];
      const double rel = std::abs(len - rest) / rest;
      worst = std::max(worst, rel);
      if (rel <= kTol || len == 0.0) continue;
      const double wa = inv_masses_[static_cast<std::size_t>(a)];
      const double wb = inv_masses_[static_cast<std::size_t>(b)];
      const double wsum = wa + wb;
      if (wsum == 0.0) continue;  // both ends anchored
      const double e = (len - rest) / (len * wsum);
      for (int c = 0; c < 3; ++c) {
        pos[3 * a + c] += wa * e * d[c];
        pos[3 * b + c] -= wb * e * d[c];
      }
    }
    if (worst <= kTol) break;
  }
  info.constraint_drift = worst;

  // Remove relative radial velocity so the length constraint also holds
  // at the velocity level.
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double worst_v = 0.0;
    for (std::size_t j = 0; j < n_b; ++j) {
      const int a = bar_end0_[j];
      const int b = bar_end1_[j];
      const double d[3] = {pos[3 * b] - pos[3 * a], pos[3 * b + 1] - pos[3 * a + 1],
                           pos[3 * b + 2] - pos[3 * a + 2]};
      const double len2 = dot3(d, d);
      if (len2 == 0.0) continue;
      const double dv[3] = {vel[3 * b] - vel[3 * a], vel[3 * b + 1] - vel[3 * a + 1],
                            vel[3 * b + 2] - vel[3 * a + 2]};
      const double radial = dot3(d, dv) / len2;
      worst_v = std::max(worst_v, std::abs(radial) * std::sqrt(len2));
      const double wa = inv_masses_[static_cast<std::size_t>(a)];
      const double wb = inv_masses_[static_cast<std::size_t>(b)];
      const double wsum = wa + wb;
      if (wsum == 0.0) continue;
      const double s = radial / wsum;
      for (int c = 0; c < 3; ++c) {
        vel[3 * a + c] += wa * s * d[c];
        vel[3 * b + c] -= wb * s * d[c];
      }
    }
    if (worst_v <= 1e-13) break;
  }
}

Model::StepInfo Model::step(DynamicsState& state, double dt,
                            const Eigen::Matrix3Xd* external) const {
  if (dt <= 0.0) throw std::invalid_argument("step: dt must be > 0");
  const std::size_t n = topology_.node_count();
  if (state.positions.size() != 3 * n || state.velocities.size() != 3 * n) {
    throw std::invalid_argument("step: state size does not match topology");
  }
  const auto& k = kernels::active();
  Workspace& ws = workspace_for(n, laws_.size(), bar_rest_.size());

  // Anchored nodes hold still regardless of what the caller put in.
  for (std::size_t i = 0; i < n; ++i) {
    if (inv_masses_[i] == 0.0) {
      state.velocities[3 * i] = 0.0;
      state.velocities[3 * i + 1] = 0.0;
      state.velocities[3 * i + 2] = 0.0;
    }
  }

  const std::size_t m = 6 * n;
  std::copy(state.positions.begin(), state.positions.end(), ws.y0.begin());
  std::copy(state.velocities.begin(), state.velocities.end(), ws.y0.begin() + 3 * n);

  derivative(ws.y0.data(), external, ws.k1.data(), ws);
  k.xpay(m, ws.y0.data(), 0.5 * dt, ws.k1.data(), ws.y1.data());
  derivative(ws.y1.data(), external, ws.k2.data(), ws);
  k.xpay(m, ws.y0.data(), 0.5 * dt, ws.k2.data(), ws.y1.data());
  derivative(ws.y1.data(), external, ws.k3.data(), ws);
  k.xpay(m, ws.y0.data(), dt, ws.k3.data(), ws.y1.data());
  derivative(ws.y1.data(), external, ws.k4.data(), ws);
  k.rk4_combine(m, ws.y0.data(), dt, ws.k1.data(), ws.k2.data(), ws.k3.data(),
                ws.k4.data(), ws.ynew.data());

  for (double v : ws.ynew) {
    if (!std::isfinite(v)) {
      throw IntegrationError(
          "non-finite state at t = " + std::to_string(state.time) +
          "; state left at last good step");
    }
  }

  std::copy(ws.ynew.begin(), ws.ynew.begin() + 3 * n, state.positions.begin());
  std::copy(ws.ynew.begin() + 3 * n, ws.ynew.end(), state.velocities.begin());

  StepInfo info;
  std::copy(state.positions.begin(), state.positions.end(),
            ws.pre_projection.begin());
  project(state, info);
  double max_disp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = state.positions[3 * i] - ws.pre_projection[3 * i];
    const double dy = state.positions[3 * i + 1] - ws.pre_projection[3 * i + 1];
    const double dz = state.positions[3 * i + 2] - ws.pre_projection[3 * i + 2];
    max_disp = std::max(max_disp, std::sqrt(dx * dx + dy * dy + dz * dz));
  }
  info.projection_displacement = max_disp;
  state.time += dt;
  return info;
}

Energy Model::energy(const DynamicsState& state) const {
  Energy e;
  const std::size_t n = topology_.node_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double* v = &state.velocities[3 * i];
    const double* x = &state.positions[3 * i];
    e.kinetic += 0.5 * node_masses_[i] * dot3(v, v);
    e.gravitational -=
        node_masses_[i] * (gravity_.x() * x[0] + gravity_.y() * x[1] + gravity_.z() * x[2]);
  }
  const std::size_t n_s = laws_.size();
  if (n_s > 0) {
    std::vector<double> deltas(3 * n_s), norms(n_s);
    const auto& k = kernels::active();
    k.edge_deltas(n_s, state.positions.data(), string_gidx0_.data(),
                  string_gidx1_.data(), deltas.data());
    k.edge_norms(n_s, deltas.data(), norms.data());
    for (std::size_t j = 0; j < n_s; ++j) {
      const double stretch = norms[j] - laws_[j].rest_length;
      if (stretch > 0.0) {
        e.elastic += 0.5 * laws_[j].stiffness * stretch * stretch;
      }
    }
  }
  return e;
}

Trajectory simulate(const Model& model, DynamicsState state,
                    const LoadSchedule& schedule, const SimulateParams& params) {
  if (params.dt <= 0.0) throw std::invalid_argument("simulate: dt must be > 0");
  if (params.duration < 0.0) {
    throw std::invalid_argument("simulate: duration must be >= 0");
  }
  if (params.sample_stride < 1) {
    throw std::invalid_argument("simulate: sample_stride must be >= 1");
  }
  if (!all_finite(state.positions) || !all_finite(state.velocities)) {
    throw std::invalid_argument("simulate: initial state is not finite");
  }

  Trajectory traj;
  const auto push_sample = [&](double drift, double proj) {
    Sample s;
    s.state = state;
    s.energy = model.energy(state);
    s.max_constraint_drift = drift;
    s.max_projection_displacement = proj;
    traj.samples.push_back(std::move(s));
  };
  push_sample(0.0, 0.0);

  const long long steps = std::llround(params.duration / params.dt);
  double drift = 0.0;
  double proj = 0.0;
  for (long long i = 1; i <= steps; ++i) {
    const Eigen::Matrix3Xd* external = schedule.active_at(state.time);
    try {
      const Model::StepInfo info = model.step(state, params.dt, external);
      drift = std::max(drift, info.constraint_drift);
      proj = std::max(proj, info.projection_displacement);
    } catch (const IntegrationError& err) {
      traj.completed = false;
      traj.error = err.what();
      break;
    }
    if (i % params.sample_stride == 0 || i == steps) {
      push_sample(drift, proj);
      drift = 0.0;
      proj = 0.0;
    }
  }
  return traj;
}

std::vector<StringLaw> uniform_laws(const topo::Topology& topology,
                                    double stiffness, double damping,
                                    double rest_scale) {
  if (rest_scale <= 0.0) {
    throw std::invalid_argument("uniform_laws: rest_scale must be > 0");
  }
  std::vector<StringLaw> laws;
  for (const auto& m : topology.members) {
    if (m.kind != topo::MemberKind::String) continue;
    StringLaw law;
    law.stiffness = stiffness;
    law.damping = damping;
    law.rest_length = topology.member_length(m) * rest_scale;
    laws.push_back(law);
  }
  return laws;
}

std::vector<StringLaw> prestressed_laws(const topo::Topology& topology,
                                        double stiffness, double damping,
                                        const Eigen::VectorXd& gamma) {
  if (gamma.size() != static_cast<Eigen::Index>(topology.string_count())) {
    throw std::invalid_argument("prestressed_laws: gamma size mismatch");
  }
  std::vector<StringLaw> laws;
  int s = 0;
  for (const auto& m : topology.members) {
    if (m.kind != topo::MemberKind::String) continue;
    const double g = gamma(s++);
    if (g < 0.0 || g >= stiffness) {
      throw std::invalid_argument(
          "prestressed_laws: need 0 <= gamma < stiffness per string");
    }
    StringLaw law;
    law.stiffness = stiffness;
    law.damping = damping;
    law.rest_length = topology.member_length(m) * (1.0 - g / stiffness);
    laws.push_back(law);
  }
  return laws;
}

}  // namespace tensrig::dyn
