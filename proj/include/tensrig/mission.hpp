#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tensrig/common.hpp"

namespace tensrig::mission {

enum class Phase { Drilling, Heating, Extracting, Filtering, Idle };

const char* phase_name(Phase phase);

/// Optimistic melt-rate bound from the latent heat of fusion alone
/// (sensible heating ignored): watts -> cc/hr of liquid water.
double thermo_ceiling_cc_per_hr(double power_w);

struct MissionConfig {
  std::string profile = "as-designed";

  double heater_power_w = 200.0;     // device range 200-600 W
  double reference_power_w = 200.0;  // power at which melt_rate was measured
  double melt_rate_cc_per_hr = 1570.0;
  double power_exponent = 1.0;  // melt rate ~ (P/Pref)^exponent

  double filter_rate_cc_per_hr = 750.0;
  // Pump volumetric rate; unset = non-binding (melted water reaches the
  // surface as soon as extraction runs).
  std::optional<double> pump_rate_cc_per_hr;

  double pump_power_w = 16.8;  // 12 V x 1.4 A
  double top_drive_power_w = 363.0;
  double stepper_power_w = 140.0;
  double grid_cap_w = 25.0 * constants::kWattsPerHp;

  // Cycle phase durations, seconds. Zero-length phases are skipped.
  double drilling_s = 0.0;
  double heating_s = 3600.0;
  double extracting_s = 3600.0;
  double filtering_s = 0.0;

  bool filter_during_extracting = true;
  bool heat_during_extracting = false;

  /// Melt rate at a given heater power under the configured scaling law.
  double melt_rate_at(double power_w) const;

  /// Rejects rates above the thermodynamic ceiling, device overloads and
  /// phase power draws beyond the grid cap. Never clamps.
  void validate() const;
};

enum class Device { Heater, TopDrive, Stepper, Pump };

struct PowerCheck {
  bool ok = true;
  double total_w = 0.0;
  double cap_w = 0.0;
  std::vector<std::pair<Device, double>> contributors;
};
PowerCheck power_check(const MissionConfig& config,
                       const std::vector<Device>& active);

struct MissionState {
  Phase phase = Phase::Idle;
  double melted_cc = 0.0;
  double extracted_cc = 0.0;
  double filtered_cc = 0.0;
  double elapsed_s = 0.0;
  double energy_j = 0.0;
  double power_w = 0.0;  // concurrent draw at this instant
};

/// Volume bookkeeping for one step of pure heating. Preconditions follow
/// the cycle semantics: only valid in the Heating phase.
MissionState melt_step(const MissionState& state, const MissionConfig& config,
                       double dt_s);

/// One step of filtration, limited by the extracted-but-unfiltered backlog.
MissionState filter_step(const MissionState& state, const MissionConfig& config,
                         double dt_s);

struct MissionLog {
  std::vector<MissionState> samples;  // strictly increasing timestamps
  std::map<Phase, double> phase_energy_j;
  bool halted = false;     // power violation stopped the run
  std::string diagnostic;  // set when halted
};

/// Drives the Drilling -> Heating -> Extracting (-> Filtering) cycle until
/// `duration_s` is exhausted. Volume updates use closed-form arithmetic
/// from phase-start snapshots, so integer-second schedules reproduce the
/// configured rates exactly and the run is bit-deterministic.
MissionLog run_cycle(const MissionConfig& config, double duration_s,
                     double sample_interval_s = 60.0);

}  // namespace tensrig::mission
