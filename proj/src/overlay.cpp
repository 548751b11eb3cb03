#include "exo/overlay.hpp"

#include <cmath>

#include "exo/errors.hpp"

namespace exo {

void OverlayParams::validate() const {
  if (!(regen_eta >= 0 && regen_eta <= kMaxRegenEta)) {
    throw DomainError("regen_eta must lie in [0, 0.65]");
  }
  if (!(muscle_tendon_eta > 0)) throw DomainError("muscle_tendon_eta must be positive");
  for (double b : beta) {
    if (!(b > 0)) throw DomainError("beta factors must be positive");
  }
  for (double g : gamma) {
    if (!(g > 0)) throw DomainError("gamma factors must be positive");
  }
}

InertiaSpec InertiaSpec::from_design(const ExoDesign& d) {
  InertiaSpec s;
  s.waist_mass_kg = d.waist_mass_kg;
  s.thigh_mass_kg = d.thigh_mass_kg;
  s.shank_mass_kg = d.shank_mass_kg;
  s.thigh_com_m = d.thigh_com_m;
  s.shank_com_m = d.shank_com_m;
  s.thigh_inertia = d.thigh_mass_kg * d.thigh_com_m * d.thigh_com_m;
  s.shank_inertia = d.shank_mass_kg * d.shank_com_m * d.shank_com_m;
  if (std::isfinite(d.hip_peak_nm)) s.thigh_inertia += d.reflected_inertia(Joint::hip);
  if (std::isfinite(d.knee_peak_nm)) s.shank_inertia += d.reflected_inertia(Joint::knee);
  return s;
}

InertiaSpec InertiaSpec::operator+(const InertiaSpec& o) const {
  auto merge_com = [](double m1, double c1, double m2, double c2) {
    return m1 + m2 > 0 ? (m1 * c1 + m2 * c2) / (m1 + m2) : 0.0;
  };
  InertiaSpec s;
  s.waist_mass_kg = waist_mass_kg + o.waist_mass_kg;
  s.thigh_mass_kg = thigh_mass_kg + o.thigh_mass_kg;
  s.shank_mass_kg = shank_mass_kg + o.shank_mass_kg;
  s.foot_mass_kg = foot_mass_kg + o.foot_mass_kg;
  s.thigh_com_m = merge_com(thigh_mass_kg, thigh_com_m, o.thigh_mass_kg, o.thigh_com_m);
  s.shank_com_m = merge_com(shank_mass_kg, shank_com_m, o.shank_mass_kg, o.shank_com_m);
  s.thigh_inertia = thigh_inertia + o.thigh_inertia;
  s.shank_inertia = shank_inertia + o.shank_inertia;
  s.foot_inertia = foot_inertia + o.foot_inertia;
  return s;
}

double browning_mass_delta(const InertiaSpec& s) {
  return 0.045 * s.waist_mass_kg + 2 * (0.075 * s.thigh_mass_kg + 0.076 * s.shank_mass_kg);
}

InertiaDelta browning_inertia_delta(const InertiaSpec& spec, const Subject& subject, double mc) {
  const double iu = subject.unloaded_leg_inertia;
  if (!(iu > 0)) throw DomainError("unloaded leg inertia must be positive");
  const double r_thigh = (spec.thigh_inertia + iu) / iu;
  const double r_shank = (spec.shank_inertia + iu) / iu;
  InertiaDelta d;
  d.thigh = (-0.74 + 1.81 * r_thigh) * mc - mc;
  d.shank = (0.63749 + 0.40916 * r_shank) * mc - mc;
  d.total = 2 * (d.thigh + d.shank);
  return d;
}

double location_factor(double a_i, double subject_mass_kg, double mc_unloaded, double i_unloaded) {
  if (!(i_unloaded > 0)) throw DomainError("unloaded leg inertia must be positive");
  return a_i * subject_mass_kg * mc_unloaded / i_unloaded;
}

double dissipated_power(double p_plus, double p_minus) { return p_plus < p_minus ? p_minus - p_plus : 0.0; }

double maf(double p_plus, double p_minus, const std::array<double, 4>& masses, const std::array<double, 3>& inertias,
           const OverlayParams& params, double subject_mass_kg) {
  if (!(subject_mass_kg > 0)) throw DomainError("subject mass must be positive");
  double penalty = 0;
  for (std::size_t i = 0; i < masses.size(); ++i) penalty += params.beta[i] * masses[i];
  for (std::size_t j = 0; j < inertias.size(); ++j) penalty += params.gamma[j] * inertias[j];
  return (p_plus + dissipated_power(p_plus, p_minus)) / params.muscle_tendon_eta - penalty / subject_mass_kg;
}

double maf(const DesignPoint& point, const InertiaSpec& s, const OverlayParams& params, double subject_mass_kg) {
  params.validate();
  const std::array<double, 4> masses{2 * s.foot_mass_kg, 2 * s.shank_mass_kg, 2 * s.thigh_mass_kg, s.waist_mass_kg};
  const std::array<double, 3> inertias{2 * s.foot_inertia, 2 * s.shank_inertia, 2 * s.thigh_inertia};
  const double p_minus = (1 - params.regen_eta) * point.report.neg_power_w_kg;
  return maf(point.report.pos_power_w_kg, p_minus, masses, inertias, params, subject_mass_kg);
}

double regen_adjust(const EnergyReport& report, double eta) {
  if (!(eta >= 0 && eta <= kMaxRegenEta)) throw DomainError("regeneration efficiency must lie in [0, 0.65]");
  return report.abs_power_w_kg - eta * report.neg_power_w_kg;
}

std::vector<DesignPoint> overlay_points(const std::vector<DesignPoint>& points, const Subject& subject,
                                        const OverlayParams& params, const OverlayOptions& options) {
  params.validate();
  std::vector<DesignPoint> out = points;
  for (auto& p : out) {
    const InertiaSpec spec = options.spec_of ? options.spec_of(p.design) : InertiaSpec::from_design(p.design);
    const double mc = p.report.unassisted_metabolic_rate_w_kg;
    double added = 0;
    if (options.mass) added += browning_mass_delta(spec);
    if (options.inertia) {
      const InertiaDelta d = browning_inertia_delta(spec, subject, mc);
      if (spec.thigh_inertia > 0) added += 2 * d.thigh;
      if (spec.shank_inertia > 0) added += 2 * d.shank;
    }
    p.report.gross_metabolic_rate_w_kg += added;
    p.report.metabolic_reduction_pct = metabolic_reduction(p.report.gross_metabolic_rate_w_kg, mc);
    p.reduction_pct = p.report.metabolic_reduction_pct;
    p.power_w_kg = regen_adjust(p.report, params.regen_eta);
  }
  return out;
}

std::vector<DesignPoint> apply_overlays(const std::vector<DesignPoint>& points, const Subject& subject,
                                        const OverlayParams& params, const OverlayOptions& options) {
  return dominance_filter(overlay_points(points, subject, params, options));
}

}  // namespace exo
