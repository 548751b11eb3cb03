#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace exo {

enum class Condition { noload, loaded };

std::string_view to_string(Condition c);
Condition parse_condition(std::string_view text);

enum class Joint : int { hip = 0, knee = 1, ankle = 2 };
inline constexpr std::size_t kJointCount = 3;
inline constexpr std::array<Joint, kJointCount> kJoints{Joint::hip, Joint::knee, Joint::ankle};
std::string_view to_string(Joint j);

enum class Segment : int { foot = 0, shank = 1, thigh = 2 };
inline constexpr std::size_t kSegmentCount = 3;

inline constexpr double kGravity = 9.81;
inline constexpr std::size_t kDefaultSamples = 101;

/// Anthropometry of the simulated subject. Segment arrays are indexed by
/// `Segment` (foot, shank, thigh).
struct Subject {
  double mass_kg = 0;
  double height_m = 0;
  std::array<double, kSegmentCount> length_m{};
  std::array<double, kSegmentCount> mass_seg_kg{};
  /// Distance of the segment CoM from its proximal joint (foot: from the ankle
  /// along the foot axis).
  std::array<double, kSegmentCount> com_m{};
  std::array<double, kSegmentCount> inertia_proximal{};  // kg m^2
  /// Inertia of the whole unloaded leg about the hip, extended pose.
  double unloaded_leg_inertia = 0;

  double inertia_com(Segment s) const;
  void validate() const;

  /// Segment parameters from standard fractional anthropometric tables
  /// (mass fractions 0.100/0.0465/0.0145, length fractions 0.245/0.246/0.152
  /// of height, CoM at 0.433/0.433/0.5 and radius of gyration about the CoM
  /// at 0.323/0.302/0.475 of segment length for thigh/shank/foot).
  static Subject from_anthropometry(double mass_kg, double height_m);
};

/// One stride of sagittal-plane gait on a uniform percent grid.
///
/// Angles follow a planar chain convention: each joint angle is the
/// counter-clockwise rotation of the distal segment relative to the proximal
/// one for a subject walking toward +x. Hip flexion and ankle dorsiflexion are
/// positive; knee flexion is negative. Moments and velocities share the sign
/// of the angle they act on. Moments and GRF are normalized by body mass.
enum class MomentUnits { nm_per_kg, nm };

struct GaitCycle {
  std::vector<double> pct;
  std::array<std::vector<double>, kJointCount> angle;     // rad
  std::array<std::vector<double>, kJointCount> velocity;  // rad/s
  std::array<std::vector<double>, kJointCount> moment;    // N m/kg
  std::vector<double> grf_x;                              // N/kg
  std::vector<double> grf_y;                              // N/kg
  double toe_off_pct = 60;
  double stride_s = 1;
  Condition condition = Condition::noload;
  double subject_mass_kg = 75;
  MomentUnits moment_units = MomentUnits::nm_per_kg;

  std::size_t size() const { return pct.size(); }
  /// Time between consecutive samples in seconds.
  double time_step() const;
  const std::vector<double>& angle_of(Joint j) const { return angle[static_cast<int>(j)]; }
  const std::vector<double>& velocity_of(Joint j) const { return velocity[static_cast<int>(j)]; }
  const std::vector<double>& moment_of(Joint j) const { return moment[static_cast<int>(j)]; }

  /// Throws DataError/FormatError on length mismatch, non-monotone grid, NaN
  /// samples or an implausible toe-off.
  void validate() const;
};

/// Moments given in raw N m are divided by the subject mass; trajectories
/// already in N m/kg are returned unchanged, so normalizing is idempotent.
GaitCycle normalize_moments(GaitCycle gait);

struct GaitLoadOptions {
  /// Target grid size; 0 keeps the file's own grid.
  std::size_t resample_to = kDefaultSamples;
};

/// Exact header of the gait CSV schema.
inline constexpr std::string_view kGaitCsvHeader =
    "pct,hip_angle_rad,knee_angle_rad,ankle_angle_rad,hip_vel_rad_s,knee_vel_rad_s,"
    "ankle_vel_rad_s,hip_moment_nm_kg,knee_moment_nm_kg,ankle_moment_nm_kg,grf_x_n_kg,grf_y_n_kg";

/// Sidecar metadata lives next to the CSV with the extension replaced by ".meta".
std::filesystem::path gait_meta_path(const std::filesystem::path& csv);

GaitCycle load_gait_csv(const std::filesystem::path& path, const GaitLoadOptions& options = {});
void write_gait_csv(const GaitCycle& gait, const std::filesystem::path& path);

struct SynthOptions {
  std::size_t samples = kDefaultSamples;
  double subject_mass_kg = 75;
};

/// Deterministic, walking-shaped stride built from a few harmonics per joint
/// angle and smooth bumps for moments and ground reaction force.
GaitCycle synth_gait(std::uint64_t seed, Condition condition, const SynthOptions& options = {});

/// Linear-interpolation resampling onto `samples` evenly spaced points in [0, 100].
GaitCycle resample(const GaitCycle& gait, std::size_t samples);

/// Angular accelerations from second-order finite differences of the
/// velocity trajectories, per joint, rad/s^2.
std::array<std::vector<double>, kJointCount> joint_accelerations(const GaitCycle& gait);

enum class GaitPhase {
  loading_response,
  mid_stance,
  terminal_stance,
  pre_swing,
  initial_swing,
  mid_swing,
  terminal_swing,
};
inline constexpr std::size_t kPhaseCount = 7;
std::string_view to_string(GaitPhase p);

struct PhaseInterval {
  GaitPhase phase;
  double start_pct;  // inclusive
  double end_pct;    // exclusive

  bool contains(double pct) const { return pct >= start_pct && pct < end_pct; }
};

using PhaseTable = std::array<PhaseInterval, kPhaseCount>;

/// Seven gait phases anchored at toe-off. Stance sub-phases are the
/// 0/10/30/50/60 % boundaries scaled by toe_off/60; swing is split in thirds.
PhaseTable phase_bounds(double toe_off_pct);

}  // namespace exo
