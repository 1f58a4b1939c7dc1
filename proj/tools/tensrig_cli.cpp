// tensrig: tensegrity rig design toolkit
//
// Subcommands: topo (prism | tbar | dbar | rig), solve, mass, dyn, mission.
// All numerical defaults for mission profiles live in the versioned config
// files under configs/; --profile picks one, --config overrides it.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "tensrig/io.hpp"
#include "tensrig/kernels.hpp"

namespace fs = std::filesystem;
using namespace tensrig;

namespace {

// Exit codes: 0 ok, 2 file/JSON parse error, 3 bad arguments or geometry,
// 4 statics infeasible, 5 configuration error, 1 anything else.
enum ExitCode {
  kOk = 0,
  kOther = 1,
  kParseError = 2,
  kArgumentError = 3,
  kInfeasible = 4,
  kConfigError = 5,
};

struct CommandResult {
  int status = kOk;
  std::vector<std::string> artifacts;
  std::string summary;
};

void report(const CommandResult& r) {
  if (!r.summary.empty()) std::cout << r.summary << "\n";
  for (const auto& a : r.artifacts) std::cout << "wrote: " << a << "\n";
}

fs::path config_dir() {
#ifdef TENSRIG_CONFIG_DIR
  return fs::path(TENSRIG_CONFIG_DIR);
#else
  return fs::path("configs");
#endif
}

topo::Topology load_topology(const std::string& path) {
  return io::topology_from_json(io::read_file(path));
}

std::string count_summary(const topo::Topology& t) {
  std::size_t anchored = 0;
  for (const auto& n : t.nodes) {
    if (n.anchored) ++anchored;
  }
  std::string s = "nodes: " + std::to_string(t.nodes.size()) +
                  "  bars: " + std::to_string(t.bar_count()) +
                  "  strings: " + std::to_string(t.string_count()) +
                  "  anchored: " + std::to_string(anchored);
  return s;
}

int run_guarded(const std::function<CommandResult()>& fn) {
  try {
    report(fn());
    return kOk;
  } catch (const io::ParseError& e) {
    std::cerr << "error (parse): " << e.what() << "\n";
    return kParseError;
  } catch (const InfeasibleError& e) {
    std::cerr << "error (statics): " << e.what() << "\n";
    return kInfeasible;
  } catch (const ConfigError& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return kConfigError;
  } catch (const GeometryError& e) {
    std::cerr << "error (geometry): " << e.what() << "\n";
    return kArgumentError;
  } catch (const StructuralError& e) {
    std::cerr << "error (topology): " << e.what() << "\n";
    return kArgumentError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error (arguments): " << e.what() << "\n";
    return kArgumentError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensegrity rig design and simulation toolkit"};
  app.require_subcommand(1);

  std::string kernels_choice = "auto";
  app.add_option("--kernels", kernels_choice,
                 "vector kernel backend: auto, scalar, avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  int exit_code = kOk;
  // Subcommand callbacks fire at the end of parsing, after --kernels is set.
  const auto run = [&](const std::function<CommandResult()>& fn) {
    if (!kernels::select(kernels_choice)) {
      std::cerr << "error (arguments): kernel backend '" << kernels_choice
                << "' not available on this machine\n";
      exit_code = kArgumentError;
      return;
    }
    exit_code = run_guarded(fn);
  };

  // ---- topo ----------------------------------------------------------
  auto* topo_cmd = app.add_subcommand("topo", "build a topology and write it as JSON");
  topo_cmd->require_subcommand(1);

  struct {
    int n = 3;
    double radius = 1.0, height = 1.0;
    double twist = topo::prism_equilibrium_twist(3);
    std::string out = "prism.json";
  } prism_args;
  auto* prism = topo_cmd->add_subcommand("prism", "n-strut prism tensegrity");
  prism->add_option("--n", prism_args.n, "strut count (>= 3)");
  prism->add_option("--radius", prism_args.radius, "circle radius, m");
  prism->add_option("--height", prism_args.height, "prism height, m");
  prism->add_option("--twist", prism_args.twist,
                    "top-circle twist, rad (equilibrium: pi/2 + pi/n)");
  prism->add_option("--out", prism_args.out, "output JSON path");
  prism->callback([&] {
    run([&] {
      const auto t = topo::build_prism(prism_args.n, prism_args.radius,
                                       prism_args.height, prism_args.twist);
      io::write_file(prism_args.out, io::topology_to_json(t));
      return CommandResult{kOk, {prism_args.out}, count_summary(t)};
    });
  });

  struct {
    double span = 1.0, aspect = 0.5;
    std::string out;
  } bar_args;
  for (const auto& [name, kind, desc] :
       {std::tuple{"tbar", topo::BarSystem::TBar, "planar T-bar unit"},
        std::tuple{"dbar", topo::BarSystem::DBar, "planar D-bar unit"}}) {
    auto* sub = topo_cmd->add_subcommand(name, desc);
    sub->add_option("--span", bar_args.span, "terminal separation, m");
    sub->add_option("--aspect", bar_args.aspect, "transverse aspect in (0,1)");
    sub->add_option("--out", bar_args.out, "output JSON path");
    const topo::BarSystem k = kind;
    const std::string nm = name;
    sub->callback([&, k, nm] {
      run([&]() -> CommandResult {
        const auto t = topo::build_bar_system(k, bar_args.span, bar_args.aspect);
        const std::string out = bar_args.out.empty() ? nm + ".json" : bar_args.out;
        io::write_file(out, io::topology_to_json(t));
        return {kOk, {out}, count_summary(t)};
      });
    });
  }

  struct {
    std::vector<double> radii{0.0762, 0.0762, 0.0762};
    std::vector<double> heights{0.0, 0.1524, 0.3048};
    double stay_angle_deg = 45.0;
    int per_ring = 4;
    std::string out = "rig.json";
  } rig_args;
  auto* rig = topo_cmd->add_subcommand("rig", "three-ring drill rig structure");
  rig->add_option("--radii", rig_args.radii, "ring radii (bottom mid top), m")
      ->expected(3);
  rig->add_option("--heights", rig_args.heights, "ring heights (increasing), m")
      ->expected(3);
  rig->add_option("--stay-angle", rig_args.stay_angle_deg,
                  "stay elevation toward the base, degrees");
  rig->add_option("--nodes-per-ring", rig_args.per_ring, "nodes per ring (>= 3)");
  rig->add_option("--out", rig_args.out, "output JSON path");
  rig->callback([&] {
    run([&] {
      topo::RigParams p;
      std::copy(rig_args.radii.begin(), rig_args.radii.end(), p.ring_radii.begin());
      std::copy(rig_args.heights.begin(), rig_args.heights.end(),
                p.ring_heights.begin());
      p.stay_angle = rig_args.stay_angle_deg * constants::kPi / 180.0;
      p.nodes_per_ring = rig_args.per_ring;
      const auto t = topo::build_rig(p);
      io::write_file(rig_args.out, io::topology_to_json(t));
      return CommandResult{kOk, {rig_args.out}, count_summary(t)};
    });
  });

  // ---- solve ---------------------------------------------------------
  struct {
    std::string topo_path, load_path, out = "solution.json";
  } solve_args;
  auto* solve = app.add_subcommand("solve", "force-density equilibrium solve");
  solve->add_option("--topo", solve_args.topo_path, "topology JSON")->required();
  solve->add_option("--load", solve_args.load_path, "load case JSON (default: zero)");
  solve->add_option("--out", solve_args.out, "solution JSON path");
  solve->callback([&] {
    run([&] {
      const auto t = load_topology(solve_args.topo_path);
      statics::LoadCase load = statics::LoadCase::zero(t.node_count());
      if (!solve_args.load_path.empty()) {
        load = io::load_case_from_json(io::read_file(solve_args.load_path),
                                       t.node_count());
      }
      const auto sol = statics::solve_force_densities(t, statics::positions_of(t), load);
      io::write_file(solve_args.out, io::solution_to_json(sol));
      std::string summary =
          "residual: " + io::format_double(sol.residual_norm) +
          " N  nullspace_dim: " + std::to_string(sol.nullspace_dim);
      if (!sol.bars_in_tension.empty()) {
        summary += "  warning: " + std::to_string(sol.bars_in_tension.size()) +
                   " bar(s) in tension";
      }
      return CommandResult{kOk, {solve_args.out}, summary};
    });
  });

  // ---- mass ----------------------------------------------------------
  struct {
    std::string topo_path, solution_path, materials_path;
    std::string out = "mass.json";
    std::string csv;
  } mass_args;
  auto* mass = app.add_subcommand("mass", "minimum-mass report for a solved state");
  mass->add_option("--topo", mass_args.topo_path, "topology JSON")->required();
  mass->add_option("--solution", mass_args.solution_path, "solution JSON")->required();
  mass->add_option("--materials", mass_args.materials_path,
                   "materials JSON (default: built-in aluminum/uhmwpe)");
  mass->add_option("--out", mass_args.out, "report JSON path");
  mass->add_option("--csv", mass_args.csv, "report CSV path (default: out with .csv)");
  mass->callback([&] {
    run([&] {
      const auto t = load_topology(mass_args.topo_path);
      const auto sol = io::solution_from_json(io::read_file(mass_args.solution_path));
      sizing::MaterialTable mats = sizing::default_materials();
      if (!mass_args.materials_path.empty()) {
        mats = io::materials_from_json(io::read_file(mass_args.materials_path));
      }
      const auto report = sizing::total_min_mass(t, sol, mats);
      const std::string csv_path =
          mass_args.csv.empty()
              ? fs::path(mass_args.out).replace_extension(".csv").string()
              : mass_args.csv;
      io::write_file(mass_args.out, io::mass_report_to_json(report));
      io::write_file(csv_path, io::mass_report_to_csv(report));
      return CommandResult{
          kOk,
          {mass_args.out, csv_path},
          "total mass: " + io::format_double(report.grand_total) + " kg (strings " +
              io::format_double(report.string_total) + ", bars " +
              io::format_double(report.bar_total) + ")"};
    });
  });

  // ---- dyn -----------------------------------------------------------
  struct {
    std::string topo_path, config_path;
    double dt = 1e-4, duration = 1.0;
    int stride = 100;
    std::string out = "trajectory.csv";
  } dyn_args;
  auto* dyn_cmd = app.add_subcommand("dyn", "integrate the rigid-bar dynamics");
  dyn_cmd->add_option("--topo", dyn_args.topo_path, "topology JSON")->required();
  dyn_cmd->add_option("--config", dyn_args.config_path,
                      "dynamics config JSON (laws, masses, gravity, schedule)");
  dyn_cmd->add_option("--dt", dyn_args.dt, "time step, s");
  dyn_cmd->add_option("--duration", dyn_args.duration, "simulated time, s");
  dyn_cmd->add_option("--stride", dyn_args.stride, "sample every N steps");
  dyn_cmd->add_option("--out", dyn_args.out, "trajectory CSV path");
  dyn_cmd->callback([&] {
    run([&]() -> CommandResult {
      const auto t = load_topology(dyn_args.topo_path);
      io::DynConfig cfg;
      if (!dyn_args.config_path.empty()) {
        cfg = io::dyn_config_from_json(io::read_file(dyn_args.config_path),
                                       t.node_count());
      }
      const auto laws = dyn::uniform_laws(t, cfg.string_stiffness,
                                          cfg.string_damping, cfg.rest_scale);
      const dyn::Model model(t, laws, cfg.masses, cfg.gravity);
      dyn::SimulateParams params;
      params.dt = dyn_args.dt;
      params.duration = dyn_args.duration;
      params.sample_stride = dyn_args.stride;
      const auto traj = dyn::simulate(model, model.initial_state(), cfg.schedule, params);
      io::write_file(dyn_args.out, io::trajectory_to_csv(traj));
      CommandResult r{traj.completed ? kOk : kOther,
                      {dyn_args.out},
                      "samples: " + std::to_string(traj.samples.size())};
      if (!traj.completed) r.summary += "  aborted: " + traj.error;
      return r;
    });
  });

  // ---- mission -------------------------------------------------------
  struct {
    std::string profile = "as-designed";
    std::string config_path;
    double duration = 7200.0;
    double sample_interval = 60.0;
    std::string out = "mission.csv";
  } mission_args;
  auto* mission_cmd =
      app.add_subcommand("mission", "drill/heat/extract/filter cycle simulation");
  mission_cmd
      ->add_option("--profile", mission_args.profile,
                   "named profile from the configs directory")
      ->check(CLI::IsMember({"as-designed", "as-tested"}));
  mission_cmd->add_option("--config", mission_args.config_path,
                          "mission config JSON (overrides --profile)");
  mission_cmd->add_option("--duration", mission_args.duration, "simulated time, s");
  mission_cmd->add_option("--sample-interval", mission_args.sample_interval,
                          "log sampling interval, s");
  mission_cmd->add_option("--out", mission_args.out, "mission log CSV path");
  mission_cmd->callback([&] {
    run([&]() -> CommandResult {
      fs::path cfg_path = mission_args.config_path;
      if (cfg_path.empty()) {
        const std::string name = mission_args.profile == "as-tested"
                                     ? "mission_as_tested.json"
                                     : "mission_as_designed.json";
        cfg_path = config_dir() / name;
      }
      const auto cfg = io::mission_config_from_json(io::read_file(cfg_path));
      const auto log =
          mission::run_cycle(cfg, mission_args.duration, mission_args.sample_interval);
      io::write_file(mission_args.out, io::mission_log_to_csv(log));
      CommandResult r;
      r.artifacts = {mission_args.out};
      if (log.halted) {
        r.status = kConfigError;
        r.summary = "halted: " + log.diagnostic;
      } else if (!log.samples.empty()) {
        const auto& last = log.samples.back();
        r.summary = "melted: " + io::format_double(last.melted_cc) +
                    " cc  extracted: " + io::format_double(last.extracted_cc) +
                    " cc  filtered: " + io::format_double(last.filtered_cc) + " cc";
      }
      return r;
    });
  });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
