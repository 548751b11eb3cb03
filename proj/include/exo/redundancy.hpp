#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "exo/gait.hpp"
#include "exo/kinematics.hpp"
#include "exo/qp.hpp"

namespace exo {

/// Lumped sagittal muscle group: a linear torque generator whose joint
/// moments are activation times the signed capacity at each joint.
struct MuscleGroup {
  std::string name;
  double mass_kg = 0;
  std::array<double, kJointCount> capacity_nm{};  // hip, knee, ankle
};

struct MuscleSet {
  std::vector<MuscleGroup> groups;

  std::size_t size() const { return groups.size(); }
  /// 3 x M capacity matrix R.
  Eigen::MatrixXd capacity_matrix() const;
  Eigen::VectorXd masses() const;
  /// Throws DataError for non-positive masses, non-finite capacities or a
  /// capacity matrix that cannot span all three joints.
  void validate() const;
};

inline constexpr std::string_view kMuscleCsvHeader = "name,mass_kg,cap_hip_nm,cap_knee_nm,cap_ankle_nm";

MuscleSet load_muscles_csv(const std::filesystem::path& path);
void write_muscles_csv(const MuscleSet& muscles, const std::filesystem::path& path);
/// The bundled nine-group set (data/muscles_default.csv).
MuscleSet default_muscles();

inline constexpr double kDefaultExoWeight = 1000;   // N m
inline constexpr double kDefaultReserveWeight = 1e-3;  // N m

/// One time step of the load-sharing problem
///
///   minimize   sum a_i^2 + sum (tau_exo,k / w_exo)^2 + sum (tau_r,j / w_r)^2
///   subject to R a + E tau_exo + tau_r = tau_net,
///              0 <= a <= 1,  |tau_exo,k| <= exo_bound_k.
///
/// Any number of joints is accepted. Without a reserve weight the reserve
/// actuators are dropped.
struct StepProblem {
  Eigen::VectorXd tau_net;   // N m
  Eigen::MatrixXd capacity;  // joints x muscles, N m
  Eigen::MatrixXd exo_map;   // joints x actuators
  Eigen::VectorXd exo_bound; // N m, may be +inf
  double exo_weight = kDefaultExoWeight;
  std::optional<double> reserve_weight = kDefaultReserveWeight;

  void validate() const;
};

struct StepSolution {
  Eigen::VectorXd activation;
  Eigen::VectorXd exo_torque;
  Eigen::VectorXd reserve;
  double objective = 0;
  double balance_residual = 0;
  double kkt_residual = 0;
  int iterations = 0;
};

StepSolution solve_step(const StepProblem& problem, const QpOptions& options = {});

struct CycleOptions {
  double exo_weight = kDefaultExoWeight;
  double reserve_weight = kDefaultReserveWeight;
  /// Worker threads for the per-sample solves; 0 picks the hardware count.
  /// Results do not depend on this value.
  unsigned threads = 1;
  QpOptions qp;
};

/// Per-sample solutions stacked over one stride of one leg. The other leg is
/// taken as its mirror image, so whole-body quantities use `legs` = 2.
struct AssistSolution {
  std::vector<double> pct;
  double stride_s = 1;
  double subject_mass_kg = 75;
  int legs = 2;
  Condition condition = Condition::noload;

  std::vector<std::string> muscle_names;
  Eigen::VectorXd muscle_mass;   // kg
  Eigen::MatrixXd capacity;      // 3 x M
  Eigen::MatrixXd activation;    // N x M
  Eigen::MatrixXd exo_torque;    // N x 2 (hip, knee actuator), empty without a device
  Eigen::MatrixXd reserve;       // N x 3
  Eigen::MatrixXd actuator_velocity;  // N x 2
  Eigen::MatrixXd joint_velocity;     // N x 3
  std::optional<ExoDesign> design;

  std::vector<double> objective;
  std::vector<double> balance_residual;
  std::vector<double> kkt_residual;

  std::size_t samples() const { return pct.size(); }
  bool assisted() const { return design.has_value(); }
  /// Joint-space moments (N x 3, N m) delivered by the device.
  Eigen::MatrixXd joint_assist() const;
  double max_balance_residual() const;
};

/// Solves every sample of the stride. Without a design the device columns are
/// absent (unassisted effort objective).
AssistSolution solve_cycle(const GaitCycle& gait, const MuscleSet& muscles,
                           const std::optional<ExoDesign>& design, const CycleOptions& options = {});

}  // namespace exo
