#include "exo/energetics.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "exo/errors.hpp"

namespace exo {

namespace {

double trapezoid_mean(const std::vector<double>& y, double dt, double duration) {
  if (y.size() < 2) return 0;
  double s = 0;
  for (std::size_t i = 1; i < y.size(); ++i) s += 0.5 * (y[i - 1] + y[i]) * dt;
  return s / duration;
}

double sample_step(const AssistSolution& sol) {
  if (sol.pct.size() < 2) throw DataError("a stride needs at least two samples");
  return (sol.pct.back() - sol.pct.front()) / 100.0 * sol.stride_s / static_cast<double>(sol.pct.size() - 1);
}

}  // namespace

std::vector<double> SurrogateMetabolicModel::muscle_power(const AssistSolution& sol) const {
  const double dt = sample_step(sol);
  const auto n = static_cast<Eigen::Index>(sol.samples());
  std::vector<double> out(static_cast<std::size_t>(sol.activation.cols()), 0.0);
  std::vector<double> edot(static_cast<std::size_t>(n));
  for (Eigen::Index m = 0; m < sol.activation.cols(); ++m) {
    const double mass = sol.muscle_mass(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = sol.activation(i, m);
      double work = 0;
      for (Eigen::Index j = 0; j < sol.capacity.rows(); ++j) work += a * sol.capacity(j, m) * sol.joint_velocity(i, j);
      edot[static_cast<std::size_t>(i)] = mass * c_act_ * a * a + std::max(0.0, work);
    }
    out[static_cast<std::size_t>(m)] = trapezoid_mean(edot, dt, sol.stride_s);
  }
  return out;
}

double SurrogateMetabolicModel::rate(const AssistSolution& sol) const {
  double total = 0;
  for (double p : muscle_power(sol)) total += p;
  return total * sol.legs / sol.subject_mass_kg;
}

double muscle_metabolic_rate(const AssistSolution& sol, const MetabolicModel& model) { return model.rate(sol); }

Eigen::MatrixXd actuator_power(const AssistSolution& sol) {
  if (sol.exo_torque.size() == 0) return Eigen::MatrixXd(static_cast<Eigen::Index>(sol.samples()), 0);
  return sol.exo_torque.cwiseProduct(sol.actuator_velocity) / sol.subject_mass_kg;
}

PowerIntegrals power_integrals(const std::vector<double>& power, double duration_s) {
  if (!(duration_s > 0)) throw DomainError("integration window must be positive");
  PowerIntegrals out;
  if (power.empty()) return out;
  const double dt = duration_s / static_cast<double>(std::max<std::size_t>(power.size() - 1, 1));
  std::vector<double> pos(power.size()), neg(power.size());
  for (std::size_t i = 0; i < power.size(); ++i) {
    pos[i] = std::max(power[i], 0.0);
    neg[i] = std::max(-power[i], 0.0);
    out.max_positive = std::max(out.max_positive, pos[i]);
  }
  out.positive = trapezoid_mean(pos, dt, duration_s);
  out.negative = trapezoid_mean(neg, dt, duration_s);
  out.absolute = out.positive + out.negative;
  return out;
}

double metabolic_reduction(double assisted, double unassisted) {
  if (!(unassisted > 0)) throw DomainError("unassisted metabolic rate must be positive");
  return 100 * (unassisted - assisted) / unassisted;
}

EnergyReport energy_report(const AssistSolution& sol, double unassisted_rate, const MetabolicModel& model) {
  EnergyReport r;
  r.gross_metabolic_rate_w_kg = model.rate(sol);
  r.unassisted_metabolic_rate_w_kg = unassisted_rate;
  r.metabolic_reduction_pct = metabolic_reduction(r.gross_metabolic_rate_w_kg, unassisted_rate);
  const Eigen::MatrixXd p = actuator_power(sol);
  if (p.cols() == 0) return r;

  const double span = (sol.pct.back() - sol.pct.front()) / 100.0 * sol.stride_s;
  const auto n = static_cast<std::size_t>(p.rows());
  std::vector<double> series(n);
  std::array<PowerIntegrals, 2> per{};
  for (Eigen::Index k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < n; ++i) series[i] = p(static_cast<Eigen::Index>(i), k);
    per[static_cast<std::size_t>(k)] = power_integrals(series, span);
  }
  const double legs = sol.legs;
  r.hip_abs_power_w_kg = legs * per[0].absolute;
  r.knee_abs_power_w_kg = legs * per[1].absolute;
  r.pos_power_w_kg = legs * (per[0].positive + per[1].positive);
  r.neg_power_w_kg = legs * (per[0].negative + per[1].negative);
  r.abs_power_w_kg = r.pos_power_w_kg + r.neg_power_w_kg;

  // Device power with the contralateral leg shifted by half a stride. The grid
  // closes on itself (first and last samples are the same instant).
  const std::size_t period = n > 1 ? n - 1 : 1;
  for (std::size_t i = 0; i < n; ++i) {
    double total = p(static_cast<Eigen::Index>(i), 0) + p(static_cast<Eigen::Index>(i), 1);
    if (sol.legs > 1) {
      const auto o = static_cast<Eigen::Index>((i % period + period / 2) % period);
      total += (sol.legs - 1) * (p(o, 0) + p(o, 1));
    }
    r.max_pos_power_w_kg = std::max(r.max_pos_power_w_kg, total);
  }
  return r;
}

std::string to_json(const EnergyReport& r, int indent) {
  nlohmann::ordered_json j;
  j["gross_metabolic_rate_w_kg"] = r.gross_metabolic_rate_w_kg;
  j["unassisted_metabolic_rate_w_kg"] = r.unassisted_metabolic_rate_w_kg;
  j["metabolic_reduction_pct"] = r.metabolic_reduction_pct;
  j["hip_abs_power_w_kg"] = r.hip_abs_power_w_kg;
  j["knee_abs_power_w_kg"] = r.knee_abs_power_w_kg;
  j["abs_power_w_kg"] = r.abs_power_w_kg;
  j["pos_power_w_kg"] = r.pos_power_w_kg;
  j["neg_power_w_kg"] = r.neg_power_w_kg;
  j["max_pos_power_w_kg"] = r.max_pos_power_w_kg;
  return j.dump(indent);
}

EnergyReport energy_report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("energy report: ") + e.what());
  }
  auto get = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw SchemaError(std::string("energy report: missing field '") + key + "'");
    return j[key].get<double>();
  };
  EnergyReport r;
  r.gross_metabolic_rate_w_kg = get("gross_metabolic_rate_w_kg");
  r.unassisted_metabolic_rate_w_kg = get("unassisted_metabolic_rate_w_kg");
  r.metabolic_reduction_pct = get("metabolic_reduction_pct");
  r.hip_abs_power_w_kg = get("hip_abs_power_w_kg");
  r.knee_abs_power_w_kg = get("knee_abs_power_w_kg");
  r.abs_power_w_kg = get("abs_power_w_kg");
  r.pos_power_w_kg = get("pos_power_w_kg");
  r.neg_power_w_kg = get("neg_power_w_kg");
  r.max_pos_power_w_kg = get("max_pos_power_w_kg");
  return r;
}

}  // namespace exo
