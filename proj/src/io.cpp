#include "tensrig/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tensrig::io {

using nlohmann::json;

namespace {

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed JSON");
  return j;
}

double as_number(const json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string(what) + ": expected a number");
  return j.get<double>();
}

json vec3_to_json(const Eigen::Vector3d& v) {
  return json::array({v.x(), v.y(), v.z()});
}

Eigen::Vector3d vec3_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(std::string(what) + ": expected [x, y, z]");
  }
  return {as_number(j[0], what), as_number(j[1], what), as_number(j[2], what)};
}

Eigen::Matrix3Xd forces_from_json(const json& j, std::size_t node_count) {
  Eigen::Matrix3Xd forces =
      Eigen::Matrix3Xd::Zero(3, static_cast<Eigen::Index>(node_count));
  if (!j.is_object()) throw ParseError("forces: expected an object keyed by node id");
  for (const auto& [key, value] : j.items()) {
    std::size_t pos = 0;
    int id = -1;
    try {
      id = std::stoi(key, &pos);
    } catch (const std::exception&) {
      throw ParseError("forces: bad node id '" + key + "'");
    }
    if (pos != key.size() || id < 0 || id >= static_cast<int>(node_count)) {
      throw ParseError("forces: node id '" + key + "' out of range");
    }
    forces.col(id) = vec3_from_json(value, "forces");
  }
  return forces;
}

json forces_to_json(const Eigen::Matrix3Xd& forces) {
  json out = json::object();
  for (Eigen::Index i = 0; i < forces.cols(); ++i) {
    if (forces.col(i).isZero(0.0)) continue;
    out[std::to_string(i)] = vec3_to_json(forces.col(i));
  }
  return out;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string topology_to_json(const topo::Topology& topology) {
  json j;
  j["nodes"] = json::array();
  for (const auto& n : topology.nodes) {
    json jn;
    jn["id"] = n.id;
    jn["pos"] = vec3_to_json(n.position);
    jn["anchored"] = n.anchored;
    j["nodes"].push_back(jn);
  }
  j["members"] = json::array();
  for (const auto& m : topology.members) {
    json jm;
    jm["kind"] = m.kind == topo::MemberKind::Bar ? "bar" : "string";
    jm["ends"] = json::array({m.end0, m.end1});
    jm["material"] = m.material;
    j["members"].push_back(jm);
  }
  if (!topology.name.empty()) j["name"] = topology.name;
  if (!topology.tags.empty()) j["tags"] = topology.tags;
  return j.dump(2) + "\n";
}

topo::Topology topology_from_json(const std::string& text) {
  const json j = parse(text);
  topo::Topology t;
  if (!j.contains("nodes") || !j["nodes"].is_array()) {
    throw ParseError("topology: missing 'nodes' array");
  }
  if (!j.contains("members") || !j["members"].is_array()) {
    throw ParseError("topology: missing 'members' array");
  }
  for (const auto& jn : j["nodes"]) {
    topo::Node n;
    if (!jn.contains("id") || !jn["id"].is_number_integer()) {
      throw ParseError("topology node: missing integer 'id'");
    }
    n.id = jn["id"].get<int>();
    n.position = vec3_from_json(jn.at("pos"), "node pos");
    n.anchored = jn.value("anchored", false);
    t.nodes.push_back(n);
  }
  for (const auto& jm : j["members"]) {
    topo::Member m;
    const std::string kind = jm.value("kind", "");
    if (kind == "bar") {
      m.kind = topo::MemberKind::Bar;
    } else if (kind == "string") {
      m.kind = topo::MemberKind::String;
    } else {
      throw ParseError("topology member: kind must be 'bar' or 'string'");
    }
    const auto& ends = jm.at("ends");
    if (!ends.is_array() || ends.size() != 2) {
      throw ParseError("topology member: 'ends' must be [i, j]");
    }
    m.end0 = ends[0].get<int>();
    m.end1 = ends[1].get<int>();
    m.material = jm.value("material", "");
    t.members.push_back(m);
  }
  t.name = j.value("name", "");
  if (j.contains("tags")) {
    t.tags = j["tags"].get<std::vector<std::string>>();
  }
  return t;
}

std::string load_case_to_json(const statics::LoadCase& load) {
  json j;
  j["forces"] = forces_to_json(load.forces);
  return j.dump(2) + "\n";
}

statics::LoadCase load_case_from_json(const std::string& text,
                                      std::size_t node_count) {
  const json j = parse(text);
  statics::LoadCase load = statics::LoadCase::zero(node_count);
  if (j.contains("forces")) {
    load.forces = forces_from_json(j["forces"], node_count);
  }
  return load;
}

std::string solution_to_json(const statics::EquilibriumSolution& solution) {
  json j;
  j["gamma"] = std::vector<double>(solution.gamma.data(),
                                   solution.gamma.data() + solution.gamma.size());
  j["lambda"] = std::vector<double>(
      solution.lambda.data(), solution.lambda.data() + solution.lambda.size());
  j["residual_norm"] = solution.residual_norm;
  j["nullspace_dim"] = solution.nullspace_dim;
  j["bars_in_tension"] = solution.bars_in_tension;
  return j.dump(2) + "\n";
}

statics::EquilibriumSolution solution_from_json(const std::string& text) {
  const json j = parse(text);
  statics::EquilibriumSolution s;
  const auto to_vec = [&](const char* key) {
    const auto v = j.at(key).get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             static_cast<Eigen::Index>(v.size()))
        .eval();
  };
  s.gamma = to_vec("gamma");
  s.lambda = to_vec("lambda");
  s.residual_norm = j.value("residual_norm", 0.0);
  s.nullspace_dim = j.value("nullspace_dim", 0);
  if (j.contains("bars_in_tension")) {
    s.bars_in_tension = j["bars_in_tension"].get<std::vector<int>>();
  }
  return s;
}

std::string materials_to_json(const sizing::MaterialTable& table) {
  json j;
  for (const auto& [name, mat] : table) {
    j[name] = {{"density", mat.density},
               {"yield_strength", mat.yield_strength},
               {"youngs_modulus", mat.youngs_modulus}};
  }
  return j.dump(2) + "\n";
}

sizing::MaterialTable materials_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object()) throw ParseError("materials: expected an object");
  sizing::MaterialTable table;
  for (const auto& [name, props] : j.items()) {
    sizing::Material m;
    m.name = name;
    m.density = as_number(props.at("density"), "density");
    m.yield_strength = as_number(props.at("yield_strength"), "yield_strength");
    m.youngs_modulus = as_number(props.at("youngs_modulus"), "youngs_modulus");
    m.check();
    table[name] = m;
  }
  return table;
}

namespace {
const char* mode_name(sizing::GoverningMode mode) {
  return mode == sizing::GoverningMode::Yield ? "yield" : "buckling";
}
}  // namespace

std::string mass_report_to_json(const sizing::MassReport& report) {
  json j;
  j["members"] = json::array();
  for (const auto& m : report.members) {
    j["members"].push_back({{"member", m.member},
                            {"kind", m.kind == topo::MemberKind::Bar ? "bar" : "string"},
                            {"length", m.length},
                            {"force_density", m.force_density},
                            {"mass", m.mass},
                            {"mode", mode_name(m.mode)}});
  }
  j["string_total"] = report.string_total;
  j["bar_total"] = report.bar_total;
  j["grand_total"] = report.grand_total;
  return j.dump(2) + "\n";
}

std::string mass_report_to_csv(const sizing::MassReport& report) {
  std::string out = "member,kind,length,force_density,mass,mode\n";
  for (const auto& m : report.members) {
    out += std::to_string(m.member);
    out += m.kind == topo::MemberKind::Bar ? ",bar," : ",string,";
    out += format_double(m.length);
    out += ',';
    out += format_double(m.force_density);
    out += ',';
    out += format_double(m.mass);
    out += ',';
    out += mode_name(m.mode);
    out += '\n';
  }
  return out;
}

DynConfig dyn_config_from_json(const std::string& text, std::size_t node_count) {
  const json j = parse(text);
  DynConfig cfg;
  if (j.contains("gravity")) cfg.gravity = vec3_from_json(j["gravity"], "gravity");
  if (j.contains("strings")) {
    const auto& s = j["strings"];
    cfg.string_stiffness = s.value("stiffness", cfg.string_stiffness);
    cfg.string_damping = s.value("damping", cfg.string_damping);
    cfg.rest_scale = s.value("rest_scale", cfg.rest_scale);
  }
  if (j.contains("masses")) {
    const auto& m = j["masses"];
    cfg.masses.bar_mass = m.value("bar", cfg.masses.bar_mass);
    cfg.masses.string_mass = m.value("string", cfg.masses.string_mass);
    if (m.contains("overrides")) {
      for (const auto& [key, value] : m["overrides"].items()) {
        cfg.masses.member_overrides[std::stoi(key)] = as_number(value, "mass override");
      }
    }
    if (m.contains("payload")) {
      cfg.masses.node_payload = m["payload"].get<std::vector<double>>();
    }
  }
  if (j.contains("schedule")) {
    for (const auto& entry : j["schedule"]) {
      dyn::LoadSchedule::Entry e;
      e.time = as_number(entry.at("time"), "schedule time");
      e.forces = forces_from_json(entry.at("forces"), node_count);
      cfg.schedule.entries.push_back(std::move(e));
    }
  }
  return cfg;
}

std::string trajectory_to_csv(const dyn::Trajectory& trajectory) {
  std::string out = "time";
  if (!trajectory.samples.empty()) {
    const std::size_t n = trajectory.samples.front().state.node_count();
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = std::to_string(i);
      out += ",n" + id + "_x,n" + id + "_y,n" + id + "_z";
    }
  }
  out += ",kinetic,gravitational,elastic,constraint_drift,projection_disp\n";
  for (const auto& s : trajectory.samples) {
    out += format_double(s.state.time);
    for (double v : s.state.positions) {
      out += ',';
      out += format_double(v);
    }
    out += ',';
    out += format_double(s.energy.kinetic);
    out += ',';
    out += format_double(s.energy.gravitational);
    out += ',';
    out += format_double(s.energy.elastic);
    out += ',';
    out += format_double(s.max_constraint_drift);
    out += ',';
    out += format_double(s.max_projection_displacement);
    out += '\n';
  }
  return out;
}

std::string mission_config_to_json(const mission::MissionConfig& c) {
  json j;
  j["profile"] = c.profile;
  j["heater_power_w"] = c.heater_power_w;
  j["reference_power_w"] = c.reference_power_w;
  j["melt_rate_cc_per_hr"] = c.melt_rate_cc_per_hr;
  j["power_exponent"] = c.power_exponent;
  j["filter_rate_cc_per_hr"] = c.filter_rate_cc_per_hr;
  if (c.pump_rate_cc_per_hr) {
    j["pump_rate_cc_per_hr"] = *c.pump_rate_cc_per_hr;
  } else {
    j["pump_rate_cc_per_hr"] = nullptr;
  }
  j["pump_power_w"] = c.pump_power_w;
  j["top_drive_power_w"] = c.top_drive_power_w;
  j["stepper_power_w"] = c.stepper_power_w;
  j["grid_cap_w"] = c.grid_cap_w;
  j["phases"] = {{"drilling_s", c.drilling_s},
                 {"heating_s", c.heating_s},
                 {"extracting_s", c.extracting_s},
                 {"filtering_s", c.filtering_s}};
  j["filter_during_extracting"] = c.filter_during_extracting;
  j["heat_during_extracting"] = c.heat_during_extracting;
  return j.dump(2) + "\n";
}

mission::MissionConfig mission_config_from_json(const std::string& text) {
  const json j = parse(text);
  mission::MissionConfig c;
  c.profile = j.value("profile", c.profile);
  c.heater_power_w = j.value("heater_power_w", c.heater_power_w);
  c.reference_power_w = j.value("reference_power_w", c.reference_power_w);
  c.melt_rate_cc_per_hr = j.value("melt_rate_cc_per_hr", c.melt_rate_cc_per_hr);
  c.power_exponent = j.value("power_exponent", c.power_exponent);
  c.filter_rate_cc_per_hr = j.value("filter_rate_cc_per_hr", c.filter_rate_cc_per_hr);
  if (j.contains("pump_rate_cc_per_hr") && !j["pump_rate_cc_per_hr"].is_null()) {
    c.pump_rate_cc_per_hr = as_number(j["pump_rate_cc_per_hr"], "pump rate");
  }
  c.pump_power_w = j.value("pump_power_w", c.pump_power_w);
  c.top_drive_power_w = j.value("top_drive_power_w", c.top_drive_power_w);
  c.stepper_power_w = j.value("stepper_power_w", c.stepper_power_w);
  c.grid_cap_w = j.value("grid_cap_w", c.grid_cap_w);
  if (j.contains("phases")) {
    const auto& p = j["phases"];
    c.drilling_s = p.value("drilling_s", c.drilling_s);
    c.heating_s = p.value("heating_s", c.heating_s);
    c.extracting_s = p.value("extracting_s", c.extracting_s);
    c.filtering_s = p.value("filtering_s", c.filtering_s);
  }
  c.filter_during_extracting =
      j.value("filter_during_extracting", c.filter_during_extracting);
  c.heat_during_extracting =
      j.value("heat_during_extracting", c.heat_during_extracting);
  c.validate();
  return c;
}

std::string mission_log_to_csv(const mission::MissionLog& log) {
  std::string out = "time_s,phase,melted_cc,extracted_cc,filtered_cc,power_w,energy_j\n";
  for (const auto& s : log.samples) {
    out += format_double(s.elapsed_s);
    out += ',';
    out += mission::phase_name(s.phase);
    out += ',';
    out += format_double(s.melted_cc);
    out += ',';
    out += format_double(s.extracted_cc);
    out += ',';
    out += format_double(s.filtered_cc);
    out += ',';
    out += format_double(s.power_w);
    out += ',';
    out += format_double(s.energy_j);
    out += '\n';
  }
  return out;
}

}  // namespace tensrig::io
