#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "tensrig/common.hpp"

namespace tensrig::topo {

enum class MemberKind { Bar, String };

struct Node {
  int id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  bool anchored = false;
};

struct Member {
  MemberKind kind = MemberKind::Bar;
  int end0 = 0;
  int end1 = 0;
  std::string material;  // name resolved against a material table
};

/// Immutable after construction; builders are pure functions of their
/// arguments, and node/member ordering is deterministic so that emitted
/// matrices and files are reproducible byte for byte.
struct Topology {
  std::vector<Node> nodes;
  std::vector<Member> members;
  std::string name;
  std::vector<std::string> tags;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t bar_count() const;
  std::size_t string_count() const;

  /// Indices into `members`, in member order, filtered by kind.
  std::vector<int> members_of(MemberKind kind) const;

  double member_length(const Member& m) const {
    return (nodes[m.end1].position - nodes[m.end0].position).norm();
  }

  /// 3-vector from end0 to end1.
  Eigen::Vector3d member_vector(const Member& m) const {
    return nodes[m.end1].position - nodes[m.end0].position;
  }
};

struct Violation {
  std::string code;     // "duplicate-member", "dangling-id", "zero-length", "isolated-node", ...
  std::string detail;
};

/// Diagnostics, not exceptions: empty result iff the topology is valid.
std::vector<Violation> validate(const Topology& topology);

/// Throws StructuralError on the first violation; convenience for
/// operations whose precondition is a valid topology.
void require_valid(const Topology& topology);

/// Incidence matrices with -1 at end0 and +1 at end1 of every member row.
/// Throws StructuralError for dangling node ids, naming the member.
struct ConnectivityMatrices {
  Eigen::MatrixXd bars;     // bar_count x node_count
  Eigen::MatrixXd strings;  // string_count x node_count
};
ConnectivityMatrices connectivity_matrices(const Topology& topology);

/// Prism tensegrity: n struts between two parallel circles. Bottom nodes
/// counterclockwise at azimuth 2*pi*k/n, then top nodes at the same order
/// rotated by `twist`. Bars (bottom_k, top_k); strings: bottom ring, top
/// ring, and the diagonal set (bottom_{k+1}, top_k). A strictly positive
/// prestress exists at twist = pi/2 + pi/n.
Topology build_prism(int n_struts, double radius, double height, double twist);

/// Twist at which an n-strut prism admits an all-positive prestress.
inline double prism_equilibrium_twist(int n_struts) {
  return constants::kPi / 2.0 + constants::kPi / n_struts;
}

enum class BarSystem { TBar, DBar };

/// Planar substitute for a single compressive member of length `span`
/// along x, terminals at (+-span/2, 0, 0). `aspect` sets the transverse
/// half-extent as aspect * span / 2. Geometry flatter than
/// `min_angle_rad` against the axis is rejected.
Topology build_bar_system(BarSystem kind, double span, double aspect,
                          double min_angle_rad = 1e-3);

/// Indices of the two terminal (load application) nodes of a bar system.
struct BarSystemTerminals {
  int left;
  int right;
};
BarSystemTerminals bar_system_terminals(const Topology& topology);

struct RigParams {
  // Paper defaults: middle ring inner diameter 6 in -> radius 0.0762 m.
  std::array<double, 3> ring_radii{0.0762, 0.0762, 0.0762};
  std::array<double, 3> ring_heights{0.0, 0.1524, 0.3048};
  double stay_angle = constants::kPi / 4.0;  // elevation toward the base
  int nodes_per_ring = 4;                    // four stability-rod holes
  // Cable multiplicity per joint is not pinned down by the source
  // description, so it stays configurable.
  bool base_stays_from_middle = true;
  bool base_stays_from_top = true;
  bool diagonal_stays = true;  // joint-to-joint cables between rings
};

/// Three stacked node rings (bottom, middle, top) tied by connecting-rod
/// bars, ring-edge bars, inter-ring diagonal stay strings, and base stay
/// strings. Each base stay runs from an upper node to a dedicated anchor
/// node on the base plane placed so the string makes exactly `stay_angle`
/// with that plane. Every base-plane node (bottom ring and stay anchors)
/// is anchored; nothing else is.
Topology build_rig(const RigParams& params = {});

/// Default material names used by the builders.
inline constexpr const char* kDefaultBarMaterial = "aluminum";
inline constexpr const char* kDefaultStringMaterial = "uhmwpe";

}  // namespace tensrig::topo
