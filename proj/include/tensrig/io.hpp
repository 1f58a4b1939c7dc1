#pragma once

#include <filesystem>
#include <string>

#include "tensrig/dynamics.hpp"
#include "tensrig/materials.hpp"
#include "tensrig/mission.hpp"
#include "tensrig/sizing.hpp"
#include "tensrig/statics.hpp"
#include "tensrig/topology.hpp"

// File formats. All writers are deterministic: identical inputs produce
// byte-identical files (shortest round-trip float formatting, ordered keys).

namespace tensrig::io {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Shortest representation that round-trips to the same double.
std::string format_double(double value);

// --- topology: {"nodes":[{"id","pos":[x,y,z],"anchored"}],
//                "members":[{"kind","ends":[i,j],"material"}]} ---
std::string topology_to_json(const topo::Topology& topology);
topo::Topology topology_from_json(const std::string& text);

// --- load case: {"forces": {"<node-id>": [fx,fy,fz]}}, absent = zero ---
std::string load_case_to_json(const statics::LoadCase& load);
statics::LoadCase load_case_from_json(const std::string& text,
                                      std::size_t node_count);

// --- equilibrium solution ---
std::string solution_to_json(const statics::EquilibriumSolution& solution);
statics::EquilibriumSolution solution_from_json(const std::string& text);

// --- materials table ---
std::string materials_to_json(const sizing::MaterialTable& table);
sizing::MaterialTable materials_from_json(const std::string& text);

// --- mass report ---
std::string mass_report_to_json(const sizing::MassReport& report);
std::string mass_report_to_csv(const sizing::MassReport& report);

// --- dynamics run configuration ---
struct DynConfig {
  Eigen::Vector3d gravity = Eigen::Vector3d::Zero();
  double string_stiffness = 1000.0;
  double string_damping = 0.0;
  double rest_scale = 1.0;
  dyn::MassAssignment masses;
  dyn::LoadSchedule schedule;  // forces keyed like load cases
};
DynConfig dyn_config_from_json(const std::string& text, std::size_t node_count);

// --- trajectory CSV: time, x/y/z per node, then diagnostics ---
std::string trajectory_to_csv(const dyn::Trajectory& trajectory);

// --- mission ---
std::string mission_config_to_json(const mission::MissionConfig& config);
mission::MissionConfig mission_config_from_json(const std::string& text);
std::string mission_log_to_csv(const mission::MissionLog& log);

}  // namespace tensrig::io
