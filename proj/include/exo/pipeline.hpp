#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "exo/errors.hpp"
#include "exo/gait.hpp"
#include "exo/io.hpp"
#include "exo/kinematics.hpp"
#include "exo/overlay.hpp"

namespace exo {

struct RunConfig {
  /// Gait files per condition; synthesized from `seed` when unset.
  std::optional<std::filesystem::path> gait_noload;
  std::optional<std::filesystem::path> gait_loaded;
  /// Muscle fixture; the bundled set when unset.
  std::optional<std::filesystem::path> muscles;
  std::vector<ExoVariant> variants{ExoVariant::mono, ExoVariant::bi};
  std::vector<Condition> conditions{Condition::noload, Condition::loaded};
  OverlayParams overlay;
  std::filesystem::path out = "out";
  std::uint64_t seed = 7;
  double subject_height_m = 1.75;
  double exo_weight = kDefaultExoWeight;
  double reserve_weight = kDefaultReserveWeight;
  double c_act = kDefaultActivationHeat;
  unsigned threads = 1;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  io::KeyValues to_key_values() const;
};

/// Builds a config from key=value pairs. Unknown keys and malformed values
/// raise ConfigError naming the key. Relative paths resolve against `base`.
RunConfig parse_run_config(const io::KeyValues& kv, const std::filesystem::path& base = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Gait for one condition as the config describes it.
GaitCycle config_gait(const RunConfig& config, Condition condition);

struct PipelineSummary {
  std::filesystem::path out;
  std::vector<std::filesystem::path> written;
  std::size_t points = 0;
  double max_balance_residual = 0;
};

/// Sweep, filter, overlays, reactions, phase statistics and figure. Writes
///   points.csv, fronts.csv, fronts_overlay.csv, energy_reports.json,
///   reactions_<condition>_<case>.csv, reaction_peaks.csv, phase_stats.csv,
///   phase_summary.csv, fronts.svg and run.cfg
/// into `config.out`.
PipelineSummary run_pipeline(const RunConfig& config);

/// Machine-readable failure description.
std::string error_json(const Error& error);
std::string error_json(const std::string& kind, const std::string& message, int exit_code);

/// Extended per-point table: the front columns followed by
/// regen_power_w_kg, gross_metabolic_rate_w_kg, unassisted_metabolic_rate_w_kg,
/// pos_power_w_kg, maf_w_kg, max_balance_residual_nm.
std::vector<std::string> points_csv_header();
void write_points_csv(const std::vector<DesignPoint>& points, const std::vector<double>& maf_values,
                      double regen_eta, const std::filesystem::path& path);
/// Reads points.csv back into design points with their energy reports.
std::vector<DesignPoint> load_points_csv(const std::filesystem::path& path, double thigh_length_m);

}  // namespace exo
