#pragma once

#include <array>
#include <string>
#include <vector>

#include "exo/redundancy.hpp"

namespace exo {

/// Activation heat of fully active muscle, W per kg of muscle. Set so the
/// bundled muscle set walks at roughly 3 W/kg unassisted on level ground.
inline constexpr double kDefaultActivationHeat = 350;

/// Whole-body muscle metabolic rate of a solved stride, W/kg.
class MetabolicModel {
 public:
  virtual ~MetabolicModel() = default;
  virtual double rate(const AssistSolution& sol) const = 0;
};

/// Activation-squared heat plus positive mechanical work:
///   Edot_i = c_act a_i^2 + max(0, sum_j a_i R_ji qdot_j) / m_i   (W per kg muscle)
/// averaged over the stride, weighted by muscle mass, summed over muscles and
/// legs and divided by the subject mass.
class SurrogateMetabolicModel final : public MetabolicModel {
 public:
  explicit SurrogateMetabolicModel(double c_act = kDefaultActivationHeat) : c_act_(c_act) {}
  double rate(const AssistSolution& sol) const override;
  /// Per-muscle stride-averaged power of one leg, W.
  std::vector<double> muscle_power(const AssistSolution& sol) const;
  double c_act() const { return c_act_; }

 private:
  double c_act_;
};

double muscle_metabolic_rate(const AssistSolution& sol, const MetabolicModel& model = SurrogateMetabolicModel{});

/// Power series of each actuator of one leg, tau * omega / subject mass (W/kg).
/// Columns hip, knee; empty matrix for unassisted solutions.
Eigen::MatrixXd actuator_power(const AssistSolution& sol);

struct PowerIntegrals {
  double absolute = 0;
  double positive = 0;
  double negative = 0;
  double max_positive = 0;
};

/// Trapezoidal averages of |P|, max(P,0) and max(-P,0) over `duration_s`.
/// Since |P| = max(P,0) + max(-P,0) samplewise, `absolute` is stored as
/// positive + negative.
PowerIntegrals power_integrals(const std::vector<double>& power, double duration_s);

/// 100 (unassisted - assisted) / unassisted. Throws DomainError unless
/// unassisted > 0.
double metabolic_reduction(double assisted, double unassisted);

struct EnergyReport {
  double gross_metabolic_rate_w_kg = 0;
  double unassisted_metabolic_rate_w_kg = 0;
  double metabolic_reduction_pct = 0;
  double hip_abs_power_w_kg = 0;
  double knee_abs_power_w_kg = 0;
  double abs_power_w_kg = 0;
  double pos_power_w_kg = 0;
  double neg_power_w_kg = 0;
  double max_pos_power_w_kg = 0;
};

/// Device totals add both actuators of both legs. The cost of carrying is the
/// peak of the summed device power with the second leg half a stride behind.
EnergyReport energy_report(const AssistSolution& assisted, double unassisted_rate,
                           const MetabolicModel& model = SurrogateMetabolicModel{});

std::string to_json(const EnergyReport& report, int indent = 2);
EnergyReport energy_report_from_json(const std::string& text);

}  // namespace exo
