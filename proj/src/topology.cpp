#include "tensrig/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace tensrig::topo {

namespace {

std::string member_desc(const Member& m, std::size_t index) {
  std::ostringstream os;
  os << (m.kind == MemberKind::Bar ? "bar" : "string") << " #" << index << " ("
     << m.end0 << "," << m.end1 << ")";
  return os.str();
}

Node make_node(int id, double x, double y, double z, bool anchored = false) {
  return Node{id, Eigen::Vector3d(x, y, z), anchored};
}

void add_member(Topology& t, MemberKind kind, int a, int b) {
  const char* mat = kind == MemberKind::Bar ? kDefaultBarMaterial
                                            : kDefaultStringMaterial;
  t.members.push_back(Member{kind, a, b, mat});
}

}  // namespace

std::size_t Topology::bar_count() const {
  return static_cast<std::size_t>(std::count_if(
      members.begin(), members.end(),
      [](const Member& m) { return m.kind == MemberKind::Bar; }));
}

std::size_t Topology::string_count() const {
  return members.size() - bar_count();
}

std::vector<int> Topology::members_of(MemberKind kind) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].kind == kind) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<Violation> validate(const Topology& topology) {
  std::vector<Violation> out;
  const int n = static_cast<int>(topology.nodes.size());

  if (topology.nodes.empty()) {
    out.push_back({"empty", "topology has no nodes"});
    return out;
  }
  for (int i = 0; i < n; ++i) {
    const Node& node = topology.nodes[i];
    if (node.id != i) {
      out.push_back({"node-id", "node at index " + std::to_string(i) +
                                    " has id " + std::to_string(node.id) +
                                    "; ids must be contiguous from 0"});
    }
    if (!node.position.allFinite()) {
      out.push_back({"non-finite", "node " + std::to_string(i) +
                                       " has a non-finite position"});
    }
  }

  std::set<std::tuple<int, int, int>> seen;
  std::vector<int> degree(topology.nodes.size(), 0);
  for (std::size_t i = 0; i < topology.members.size(); ++i) {
    const Member& m = topology.members[i];
    if (m.end0 < 0 || m.end0 >= n || m.end1 < 0 || m.end1 >= n) {
      out.push_back({"dangling-id", member_desc(m, i) +
                                        " references a nonexistent node"});
      continue;
    }
    if (m.end0 == m.end1) {
      out.push_back({"zero-length", member_desc(m, i) + " is a self-loop"});
      continue;
    }
    degree[m.end0]++;
    degree[m.end1]++;
    if (topology.member_length(m) == 0.0) {
      out.push_back({"zero-length",
                     member_desc(m, i) + " joins coincident node positions"});
    }
    const auto key = std::make_tuple(static_cast<int>(m.kind),
                                     std::min(m.end0, m.end1),
                                     std::max(m.end0, m.end1));
    if (!seen.insert(key).second) {
      out.push_back({"duplicate-member", member_desc(m, i) + " is a duplicate"});
    }
  }
  for (int i = 0; i < n; ++i) {
    if (degree[i] == 0) {
      out.push_back(
          {"isolated-node", "node " + std::to_string(i) + " has no members"});
    }
  }
  return out;
}

void require_valid(const Topology& topology) {
  const auto violations = validate(topology);
  if (!violations.empty()) {
    throw StructuralError("invalid topology: " + violations.front().code +
                          ": " + violations.front().detail);
  }
}

ConnectivityMatrices connectivity_matrices(const Topology& topology) {
  const int n = static_cast<int>(topology.nodes.size());
  ConnectivityMatrices out;
  out.bars = Eigen::MatrixXd::Zero(static_cast<int>(topology.bar_count()), n);
  out.strings =
      Eigen::MatrixXd::Zero(static_cast<int>(topology.string_count()), n);
  int bar_row = 0;
  int string_row = 0;
  for (std::size_t i = 0; i < topology.members.size(); ++i) {
    const Member& m = topology.members[i];
    if (m.end0 < 0 || m.end0 >= n || m.end1 < 0 || m.end1 >= n) {
      throw StructuralError("connectivity_matrices: " + member_desc(m, i) +
                            " references a nonexistent node");
    }
    Eigen::MatrixXd& target =
        m.kind == MemberKind::Bar ? out.bars : out.strings;
    int& row = m.kind == MemberKind::Bar ? bar_row : string_row;
    target(row, m.end0) = -1.0;
    target(row, m.end1) = 1.0;
    ++row;
  }
  return out;
}

Topology build_prism(int n_struts, double radius, double height, double twist) {
  if (n_struts < 3) {
    throw std::invalid_argument("build_prism: n_struts must be >= 3");
  }
  if (radius <= 0.0 || height <= 0.0) {
    throw std::invalid_argument("build_prism: radius and height must be positive");
  }
  Topology t;
  t.name = "prism";
  const int n = n_struts;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * constants::kPi * k / n;
    t.nodes.push_back(make_node(k, radius * std::cos(a), radius * std::sin(a), 0.0));
  }
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * constants::kPi * k / n + twist;
    t.nodes.push_back(
        make_node(n + k, radius * std::cos(a), radius * std::sin(a), height));
  }
  for (int k = 0; k < n; ++k) add_member(t, MemberKind::Bar, k, n + k);
  for (int k = 0; k < n; ++k) add_member(t, MemberKind::String, k, (k + 1) % n);
  for (int k = 0; k < n; ++k) {
    add_member(t, MemberKind::String, n + k, n + (k + 1) % n);
  }
  for (int k = 0; k < n; ++k) add_member(t, MemberKind::String, (k + 1) % n, n + k);
  return t;
}

Topology build_bar_system(BarSystem kind, double span, double aspect,
                          double min_angle_rad) {
  if (span <= 0.0) {
    throw std::invalid_argument("build_bar_system: span must be positive");
  }
  if (aspect <= 0.0 || aspect >= 1.0) {
    throw std::invalid_argument("build_bar_system: aspect must be in (0,1)");
  }
  const double h = aspect * span / 2.0;
  if (std::atan2(h, span / 2.0) < min_angle_rad) {
    throw GeometryError(
        "build_bar_system: geometry degenerate below minimum-angle threshold");
  }

  Topology t;
  if (kind == BarSystem::TBar) {
    t.name = "tbar";
    t.nodes.push_back(make_node(0, -span / 2.0, 0.0, 0.0));  // left terminal
    t.nodes.push_back(make_node(1, span / 2.0, 0.0, 0.0));   // right terminal
    t.nodes.push_back(make_node(2, 0.0, 0.0, 0.0));          // center
    t.nodes.push_back(make_node(3, 0.0, h, 0.0));
    t.nodes.push_back(make_node(4, 0.0, -h, 0.0));
    add_member(t, MemberKind::Bar, 0, 2);
    add_member(t, MemberKind::Bar, 2, 1);
    add_member(t, MemberKind::Bar, 2, 3);
    add_member(t, MemberKind::Bar, 2, 4);
    add_member(t, MemberKind::String, 0, 3);
    add_member(t, MemberKind::String, 3, 1);
    add_member(t, MemberKind::String, 1, 4);
    add_member(t, MemberKind::String, 4, 0);
  } else {
    t.name = "dbar";
    t.nodes.push_back(make_node(0, -span / 2.0, 0.0, 0.0));
    t.nodes.push_back(make_node(1, span / 2.0, 0.0, 0.0));
    t.nodes.push_back(make_node(2, 0.0, h, 0.0));
    t.nodes.push_back(make_node(3, 0.0, -h, 0.0));
    add_member(t, MemberKind::Bar, 0, 2);
    add_member(t, MemberKind::Bar, 2, 1);
    add_member(t, MemberKind::Bar, 1, 3);
    add_member(t, MemberKind::Bar, 3, 0);
    add_member(t, MemberKind::String, 2, 3);
    add_member(t, MemberKind::String, 0, 1);
  }
  return t;
}

BarSystemTerminals bar_system_terminals(const Topology&) {
  // Builders place the terminals first, left then right.
  return BarSystemTerminals{0, 1};
}

Topology build_rig(const RigParams& p) {
  for (double r : p.ring_radii) {
    if (r <= 0.0) throw std::invalid_argument("build_rig: radii must be positive");
  }
  if (!(p.ring_heights[0] < p.ring_heights[1] &&
        p.ring_heights[1] < p.ring_heights[2])) {
    throw std::invalid_argument("build_rig: heights must be strictly increasing");
  }
  if (p.nodes_per_ring < 3) {
    throw std::invalid_argument("build_rig: nodes_per_ring must be >= 3");
  }
  if (!(p.stay_angle > 0.0) || p.stay_angle > constants::kPi / 2.0) {
    throw GeometryError(
        "build_rig: stay geometry infeasible, angle must lie in (0, pi/2]");
  }

  Topology t;
  t.name = "rig";
  const int m = p.nodes_per_ring;
  const double base_z = p.ring_heights[0];

  // Ring nodes: bottom, middle, top; azimuth 2*pi*k/m on each ring.
  int next_id = 0;
  for (int ring = 0; ring < 3; ++ring) {
    for (int k = 0; k < m; ++k) {
      const double a = 2.0 * constants::kPi * k / m;
      t.nodes.push_back(make_node(next_id++, p.ring_radii[ring] * std::cos(a),
                                  p.ring_radii[ring] * std::sin(a),
                                  p.ring_heights[ring], ring == 0));
    }
  }
  const auto ring_node = [m](int ring, int k) { return ring * m + ((k % m + m) % m); };

  // Rings are rigid hoops: model each as a polygon of bars.
  for (int ring = 0; ring < 3; ++ring) {
    for (int k = 0; k < m; ++k) {
      add_member(t, MemberKind::Bar, ring_node(ring, k), ring_node(ring, k + 1));
    }
  }
  // Connecting rods between consecutive rings (class-2 joint pattern).
  for (int k = 0; k < m; ++k) {
    add_member(t, MemberKind::Bar, ring_node(0, k), ring_node(1, k));
    add_member(t, MemberKind::Bar, ring_node(1, k), ring_node(2, k));
  }
  // Joint-to-joint diagonal stays between consecutive rings.
  if (p.diagonal_stays) {
    for (int k = 0; k < m; ++k) {
      add_member(t, MemberKind::String, ring_node(0, k + 1), ring_node(1, k));
      add_member(t, MemberKind::String, ring_node(0, k - 1), ring_node(1, k));
      add_member(t, MemberKind::String, ring_node(1, k + 1), ring_node(2, k));
      add_member(t, MemberKind::String, ring_node(1, k - 1), ring_node(2, k));
    }
  }
  // Base stays: one anchor node per stay, placed radially outward on the
  // base plane so the string meets it at exactly stay_angle.
  const double cot = std::cos(p.stay_angle) / std::sin(p.stay_angle);
  const auto add_base_stay = [&](int ring, int k) {
    const Node& from = t.nodes[ring_node(ring, k)];
    const double dz = from.position.z() - base_z;
    const double out = dz * cot;  // horizontal run toward the base plane
    const double a = 2.0 * constants::kPi * k / m;
    const double r = p.ring_radii[ring] + out;
    const int anchor_id = next_id++;
    t.nodes.push_back(
        make_node(anchor_id, r * std::cos(a), r * std::sin(a), base_z, true));
    add_member(t, MemberKind::String, anchor_id, from.id);
  };
  for (int k = 0; k < m; ++k) {
    if (p.base_stays_from_middle) add_base_stay(1, k);
    if (p.base_stays_from_top) add_base_stay(2, k);
  }
  return t;
}

}  // namespace tensrig::topo
