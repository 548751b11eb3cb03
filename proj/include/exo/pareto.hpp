#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "exo/energetics.hpp"
#include "exo/gait.hpp"
#include "exo/kinematics.hpp"
#include "exo/redundancy.hpp"

namespace exo {

struct DesignPoint {
  std::string label;
  ExoDesign design;
  Condition condition = Condition::noload;
  EnergyReport report;
  /// Objective pair: maximize reduction, minimize power.
  double reduction_pct = 0;
  double power_w_kg = 0;
  /// Per-sample solver objective of the assisted stride.
  std::vector<double> step_objective;
  double max_balance_residual = 0;
  /// Actuator torque (N m) and power (W/kg) of one leg, columns hip, knee.
  Eigen::MatrixXd torque_profile;
  Eigen::MatrixXd power_profile;
};

struct SweepOptions {
  CycleOptions cycle;
  double thigh_length_m = 0.43;
  double c_act = kDefaultActivationHeat;
  /// Worker threads over grid cells; output order never depends on it.
  unsigned threads = 1;
};

struct SweepResult {
  double unassisted_rate_w_kg = 0;
  std::vector<DesignPoint> points;  // sorted by label
};

/// Solves the 5 x 5 peak-torque grid for one variant and condition.
SweepResult sweep(const GaitCycle& gait, const MuscleSet& muscles, ExoVariant variant,
                  const SweepOptions& options = {});

/// Same for several conditions; one entry per condition.
std::map<Condition, SweepResult> sweep(const std::map<Condition, GaitCycle>& gaits, const MuscleSet& muscles,
                                       ExoVariant variant, const SweepOptions& options = {});

/// True when `a` is at least as good as `b` in both objectives and strictly
/// better in one.
bool dominates(const DesignPoint& a, const DesignPoint& b);

/// Non-dominated subset, sorted by power then label. Points tied on both
/// objectives are all kept. O(n log n). Throws DomainError on empty input.
std::vector<DesignPoint> dominance_filter(std::vector<DesignPoint> points);

inline constexpr std::string_view kFrontCsvHeader =
    "label,variant,condition,hip_peak_nm,knee_peak_nm,metabolic_reduction_pct,abs_power_w_kg,"
    "hip_abs_power_w_kg,knee_abs_power_w_kg,neg_power_w_kg,max_pos_power_w_kg";

/// `abs_power_w_kg` carries the point's power objective, which differs from
/// the report total once regeneration is credited.
void write_front_csv(const std::vector<DesignPoint>& points, const std::filesystem::path& path);
std::vector<DesignPoint> load_front_csv(const std::filesystem::path& path);

}  // namespace exo
