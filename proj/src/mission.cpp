#include "tensrig/mission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tensrig::mission {

namespace {

constexpr double kSecPerHr = 3600.0;

double device_power(const MissionConfig& c, Device d) {
  switch (d) {
    case Device::Heater: return c.heater_power_w;
    case Device::TopDrive: return c.top_drive_power_w;
    case Device::Stepper: return c.stepper_power_w;
    case Device::Pump: return c.pump_power_w;
  }
  return 0.0;
}

std::vector<Device> devices_for(const MissionConfig& c, Phase p) {
  switch (p) {
    case Phase::Drilling: return {Device::TopDrive, Device::Stepper};
    case Phase::Heating: return {Device::Heater};
    case Phase::Extracting: {
      std::vector<Device> out{Device::Pump};
      if (c.heat_during_extracting) out.insert(out.begin(), Device::Heater);
      return out;
    }
    case Phase::Filtering:  // gravity-fed
    case Phase::Idle: return {};
  }
  return {};
}

}  // namespace

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::Drilling: return "drilling";
    case Phase::Heating: return "heating";
    case Phase::Extracting: return "extracting";
    case Phase::Filtering: return "filtering";
    case Phase::Idle: return "idle";
  }
  return "?";
}

double thermo_ceiling_cc_per_hr(double power_w) {
  if (power_w < 0.0) {
    throw std::invalid_argument("thermo_ceiling: power must be >= 0");
  }
  // W / (J/kg) = kg/s; x1000 cc/kg at 1 g/cc, x3600 s/hr.
  return power_w / constants::kIceLatentHeatJPerKg * 1000.0 * kSecPerHr;
}

double MissionConfig::melt_rate_at(double power_w) const {
  if (power_w < 0.0) {
    throw std::invalid_argument("melt_rate_at: power must be >= 0");
  }
  if (power_w == reference_power_w) return melt_rate_cc_per_hr;
  return melt_rate_cc_per_hr * std::pow(power_w / reference_power_w, power_exponent);
}

void MissionConfig::validate() const {
  const auto fail = [](const std::string& why) { throw ConfigError("mission config: " + why); };
  if (reference_power_w <= 0.0) fail("reference power must be > 0");
  if (heater_power_w < 0.0 || heater_power_w > 600.0) {
    fail("heater power must lie in [0, 600] W");
  }
  if (melt_rate_cc_per_hr < 0.0 || filter_rate_cc_per_hr < 0.0) {
    fail("rates must be >= 0");
  }
  if (pump_rate_cc_per_hr && *pump_rate_cc_per_hr < 0.0) {
    fail("pump rate must be >= 0");
  }
  if (power_exponent < 0.0) fail("power exponent must be >= 0");
  if (pump_power_w < 0.0 || top_drive_power_w < 0.0 || stepper_power_w < 0.0) {
    fail("device powers must be >= 0");
  }
  if (grid_cap_w <= 0.0) fail("grid cap must be > 0");
  if (drilling_s < 0.0 || heating_s < 0.0 || extracting_s < 0.0 || filtering_s < 0.0) {
    fail("phase durations must be >= 0");
  }
  const double rate = melt_rate_at(heater_power_w);
  const double ceiling = thermo_ceiling_cc_per_hr(heater_power_w);
  if (rate > ceiling) {
    std::ostringstream os;
    os << "melt rate " << rate << " cc/hr exceeds the latent-heat ceiling "
       << ceiling << " cc/hr at " << heater_power_w << " W";
    fail(os.str());
  }
  for (Phase p : {Phase::Drilling, Phase::Heating, Phase::Extracting, Phase::Filtering}) {
    const PowerCheck pc = power_check(*this, devices_for(*this, p));
    if (!pc.ok) {
      std::ostringstream os;
      os << "phase " << phase_name(p) << " draws " << pc.total_w
         << " W, above the grid cap " << pc.cap_w << " W";
      fail(os.str());
    }
  }
}

PowerCheck power_check(const MissionConfig& config,
                       const std::vector<Device>& active) {
  PowerCheck out;
  out.cap_w = config.grid_cap_w;
  for (Device d : active) {
    const double p = device_power(config, d);
    out.contributors.emplace_back(d, p);
    out.total_w += p;
  }
  out.ok = out.total_w <= out.cap_w;
  return out;
}

MissionState melt_step(const MissionState& state, const MissionConfig& config,
                       double dt_s) {
  if (dt_s < 0.0) throw std::invalid_argument("melt_step: dt must be >= 0");
  if (state.phase != Phase::Heating) {
    throw std::invalid_argument("melt_step: only valid in the Heating phase");
  }
  MissionState out = state;
  if (dt_s == 0.0) return out;
  out.melted_cc += config.melt_rate_at(config.heater_power_w) * (dt_s / kSecPerHr);
  out.energy_j += config.heater_power_w * dt_s;
  out.elapsed_s += dt_s;
  return out;
}

MissionState filter_step(const MissionState& state, const MissionConfig& config,
                         double dt_s) {
  if (dt_s < 0.0) throw std::invalid_argument("filter_step: dt must be >= 0");
  const bool allowed =
      state.phase == Phase::Filtering ||
      (state.phase == Phase::Extracting && config.filter_during_extracting);
  if (!allowed) {
    throw std::invalid_argument(
        "filter_step: phase must be Filtering, or Extracting with concurrent "
        "filtering enabled");
  }
  MissionState out = state;
  if (dt_s == 0.0) return out;
  out.filtered_cc = std::min(
      out.filtered_cc + config.filter_rate_cc_per_hr * (dt_s / kSecPerHr),
      out.extracted_cc);
  out.elapsed_s += dt_s;
  return out;
}

namespace {

struct PhaseSpec {
  Phase phase;
  double length_s;
};

class CycleEngine {
 public:
  CycleEngine(const MissionConfig& config, double duration_s,
              double sample_interval_s, MissionLog& log)
      : cfg_(config), duration_(duration_s), interval_(sample_interval_s), log_(log) {}

  void run() {
    std::vector<PhaseSpec> cycle;
    for (const PhaseSpec spec : {PhaseSpec{Phase::Drilling, cfg_.drilling_s},
                                 PhaseSpec{Phase::Heating, cfg_.heating_s},
                                 PhaseSpec{Phase::Extracting, cfg_.extracting_s},
                                 PhaseSpec{Phase::Filtering, cfg_.filtering_s}}) {
      if (spec.length_s > 0.0) cycle.push_back(spec);
    }

    state_.phase = cycle.empty() ? Phase::Idle : cycle.front().phase;
    state_.power_w = power_check(cfg_, devices_for(cfg_, state_.phase)).total_w;
    sample(0.0);

    if (cycle.empty()) {
      run_phase(Phase::Idle, 0.0, duration_);
      return;
    }
    double t = 0.0;
    while (t < duration_ && !log_.halted) {
      for (const PhaseSpec& spec : cycle) {
        if (t >= duration_ || log_.halted) break;
        const double end = std::min(t + spec.length_s, duration_);
        run_phase(spec.phase, t, end);
        t = end;
      }
    }
  }

 private:
  // Volumes inside a phase are affine in time between branch switches;
  // each quantity carries its own (value, time) reference so that a
  // whole unbroken phase evaluates as one product, exact for
  // integer-second schedules.
  void run_phase(Phase phase, double t0, double t1) {
    state_.phase = phase;
    const PowerCheck pc = power_check(cfg_, devices_for(cfg_, phase));
    state_.power_w = pc.total_w;
    if (!pc.ok) {
      log_.halted = true;
      std::ostringstream os;
      os << "power budget violated at t = " << t0 << " s: phase "
         << phase_name(phase) << " draws " << pc.total_w << " W > cap "
         << pc.cap_w << " W";
      log_.diagnostic = os.str();
      return;
    }

    const bool melts =
        phase == Phase::Heating ||
        (phase == Phase::Extracting && cfg_.heat_during_extracting);
    const bool extracts = phase == Phase::Extracting;
    const bool filters =
        phase == Phase::Filtering ||
        (phase == Phase::Extracting && cfg_.filter_during_extracting);
    const bool pump_unlimited = extracts && !cfg_.pump_rate_cc_per_hr;

    const double mr = melts ? cfg_.melt_rate_at(cfg_.heater_power_w) : 0.0;
    const double pr = extracts && cfg_.pump_rate_cc_per_hr ? *cfg_.pump_rate_cc_per_hr : 0.0;
    const double fr = filters ? cfg_.filter_rate_cc_per_hr : 0.0;

    if (pump_unlimited) state_.extracted_cc = state_.melted_cc;

    const double m_ref = state_.melted_cc;
    double e_ref = state_.extracted_cc;
    double f_ref = state_.filtered_cc;
    double te_ref = t0;
    double tf_ref = t0;
    bool e_caught = state_.extracted_cc >= state_.melted_cc;
    bool f_caught = state_.filtered_cc >= state_.extracted_cc;

    double ts = t0;
    while (ts < t1) {
      const double er =
          !extracts ? 0.0
                    : (pump_unlimited ? mr : (e_caught ? std::min(pr, mr) : pr));

      double next = t1;
      // next sampling tick strictly after ts
      const double tick =
          (std::floor(ts / interval_ + 1e-9) + 1.0) * interval_;
      next = std::min(next, tick);
      bool e_crossing = false;
      bool f_crossing = false;
      if (!pump_unlimited && !e_caught && extracts && pr > mr) {
        const double dt_cross =
            (state_.melted_cc - state_.extracted_cc) / (pr - mr) * kSecPerHr;
        if (ts + dt_cross < next) {
          next = ts + dt_cross;
          e_crossing = true;
          f_crossing = false;
        }
      }
      if (filters && !f_caught && fr > er) {
        const double dt_cross =
            (state_.extracted_cc - state_.filtered_cc) / (fr - er) * kSecPerHr;
        if (ts + dt_cross < next) {
          next = ts + dt_cross;
          f_crossing = true;
          e_crossing = false;
        }
      }
      if (!(next > ts)) next = t1;  // degenerate guard: never stall

      // advance to `next` using the per-quantity references
      state_.melted_cc = m_ref + mr * ((next - t0) / kSecPerHr);
      if (extracts) {
        if (pump_unlimited || e_caught) {
          state_.extracted_cc = state_.melted_cc;
        } else {
          state_.extracted_cc = std::min(
              e_ref + pr * ((next - te_ref) / kSecPerHr), state_.melted_cc);
        }
      }
      if (filters) {
        if (f_caught && fr >= er) {
          state_.filtered_cc = state_.extracted_cc;
        } else {
          state_.filtered_cc = std::min(
              f_ref + fr * ((next - tf_ref) / kSecPerHr), state_.extracted_cc);
        }
      }

      const double dt = next - ts;
      state_.energy_j += state_.power_w * dt;
      log_.phase_energy_j[phase] += state_.power_w * dt;
      state_.elapsed_s = next;

      if (e_crossing) {
        state_.extracted_cc = state_.melted_cc;  // lands exactly on the line
        e_caught = true;
      } else if (!e_caught && state_.extracted_cc >= state_.melted_cc) {
        e_caught = true;
      }
      if (f_crossing) {
        state_.filtered_cc = state_.extracted_cc;
        f_caught = true;
      } else if (!f_caught && state_.filtered_cc >= state_.extracted_cc) {
        f_caught = true;
      }
      if (filters && f_caught && fr < er) {
        // filter falls behind again: restart its affine reference
        f_caught = false;
        f_ref = state_.filtered_cc;
        tf_ref = next;
      }
      if (extracts && e_caught && !pump_unlimited && pr < mr) {
        e_caught = false;
        e_ref = state_.extracted_cc;
        te_ref = next;
      }

      sample(next);
      ts = next;
    }
  }

  void sample(double t) {
    state_.elapsed_s = t;
    if (!log_.samples.empty() &&
        !(t > log_.samples.back().elapsed_s)) {
      log_.samples.back() = state_;  // refresh in place, keep times strict
      return;
    }
    log_.samples.push_back(state_);
  }

  const MissionConfig& cfg_;
  double duration_;
  double interval_;
  MissionLog& log_;
  MissionState state_;
};

}  // namespace

MissionLog run_cycle(const MissionConfig& config, double duration_s,
                     double sample_interval_s) {
  config.validate();
  if (duration_s < 0.0) {
    throw std::invalid_argument("run_cycle: duration must be >= 0");
  }
  if (sample_interval_s <= 0.0) {
    throw std::invalid_argument("run_cycle: sample interval must be > 0");
  }
  MissionLog log;
  CycleEngine engine(config, duration_s, sample_interval_s, log);
  engine.run();
  return log;
}

}  // namespace tensrig::mission
