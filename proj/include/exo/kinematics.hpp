#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "exo/gait.hpp"

namespace exo {

enum class ExoVariant { mono, bi, mono_knee_on_thigh, mono_knee_on_shank };

std::string_view to_string(ExoVariant v);
ExoVariant parse_variant(std::string_view text);

/// True for every variant whose knee actuator acts between femur and tibia.
bool is_mono(ExoVariant v);

/// A (hip, knee) pair: angular velocities in rad/s or torques in N m.
struct JointVec {
  double hip = 0;
  double knee = 0;

  double dot(const JointVec& o) const { return hip * o.hip + knee * o.knee; }
  friend bool operator==(const JointVec&, const JointVec&) = default;
};

/// Mono-articular actuator velocities from bi-articular ones,
/// omega_mono = J omega_bi with J = [[1, 0], [-1, 1]].
JointVec velocity_map(const JointVec& bi_velocity);
/// omega_bi = J^-1 omega_mono: the bi knee actuator turns with hip + knee.
JointVec inverse_velocity_map(const JointVec& mono_velocity);
/// Bi-articular actuator torques from mono-articular ones, tau_bi = J^T tau_mono.
JointVec torque_map(const JointVec& mono_torque);
/// tau_mono = J^-T tau_bi, i.e. the joint-space moment produced by bi actuators.
JointVec inverse_torque_map(const JointVec& bi_torque);

/// Exoskeleton link lengths: the upper-leg link and the combined lower link
/// (the two lower parallelogram bars for the bi-articular device).
struct LinkLengths {
  double thigh_m = 0;
  double shank_m = 0;
};

inline constexpr double kRotorInertia = 5.06e-4;  // kg m^2
inline constexpr double kMotorPeakTorque = 2.0;   // N m, direct drive
inline constexpr double kActuatorModuleMass = 1.5;  // kg, one actuation unit

struct ExoDesign {
  ExoVariant variant = ExoVariant::mono;
  double hip_peak_nm = 70;
  double knee_peak_nm = 70;
  std::optional<LinkLengths> links;

  // Added mass. Thigh and shank entries are per leg, the waist entry is total.
  double waist_mass_kg = 0;
  double thigh_mass_kg = 0;
  double shank_mass_kg = 0;
  // CoM of the added thigh/shank mass measured from the hip.
  double thigh_com_m = 0;
  double shank_com_m = 0;

  double rotor_inertia = kRotorInertia;
  double motor_peak_nm = kMotorPeakTorque;

  double peak(Joint j) const;
  /// Gear ratio needed to reach the joint peak torque with the motor peak.
  double transmission_ratio(Joint j) const;
  /// Rotor inertia seen at the joint, rotor_inertia * ratio^2.
  double reflected_inertia(Joint j) const;
  /// Joint-space moments (hip, knee, ankle) produced by unit actuator torques
  /// (hip actuator, knee actuator).
  Eigen::Matrix<double, 3, 2> joint_map() const;
  /// Two-character grid code, e.g. "Db" for 40 N m hip and 60 N m knee.
  std::string label() const;

  void validate() const;
};

/// Peak torque grid swept by the design study, strongest first.
inline constexpr std::array<double, 5> kPeakGrid{70, 60, 50, 40, 30};

/// Grid letter for a peak torque: 70 -> A ... 30 -> E (lowercase for the knee).
char grid_letter(double peak_nm, bool upper);
std::string grid_label(double hip_peak_nm, double knee_peak_nm);
/// Inverse of grid_label; throws DomainError for unknown codes.
std::pair<double, double> parse_grid_label(std::string_view label);

/// Device with the inertial layout of the reference designs: waist, thigh and
/// shank masses and CoM for mono (knee unit at the knee) and bi (both units at
/// the waist), plus the two alternative knee-unit placements for mono.
ExoDesign reference_design(ExoVariant variant, double hip_peak_nm, double knee_peak_nm,
                           double thigh_length_m);

/// Massless, torque-unlimited device.
ExoDesign ideal_design(ExoVariant variant);

/// Reads a key=value design file. Recognised keys: variant, hip_peak_nm,
/// knee_peak_nm, thigh_link_m, shank_link_m, waist_mass_kg, thigh_mass_kg,
/// shank_mass_kg, thigh_com_m, shank_com_m. Unset inertial keys fall back to
/// reference_design() for the variant.
ExoDesign load_design_file(const std::filesystem::path& path, double thigh_length_m);

struct Point2 {
  double x = 0;
  double y = 0;
};

/// Endpoint position of the exoskeleton linkage. For the bi device q_b is the
/// absolute angle of the lower parallelogram link; for mono devices it is the
/// relative knee angle and the lower link points along q_a - q_b.
Point2 forward_kinematics(const ExoDesign& design, double q_a, double q_b);
Eigen::Matrix2d kinematic_jacobian(const ExoDesign& design, double q_a, double q_b);

/// Actuator angular velocities over the cycle (columns hip, knee). Mono
/// actuators read the joint velocities; bi actuators follow J^-1.
Eigen::MatrixX2d actuator_velocities(const ExoDesign& design, const GaitCycle& gait);

}  // namespace exo
