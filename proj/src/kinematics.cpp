#include "exo/kinematics.hpp"

#include <cmath>

#include "exo/errors.hpp"
#include "exo/io.hpp"

namespace exo {

std::string_view to_string(ExoVariant v) {
  switch (v) {
    case ExoVariant::mono: return "mono";
    case ExoVariant::bi: return "bi";
    case ExoVariant::mono_knee_on_thigh: return "mono_knee_on_thigh";
    case ExoVariant::mono_knee_on_shank: return "mono_knee_on_shank";
  }
  return "?";
}

ExoVariant parse_variant(std::string_view text) {
  for (auto v : {ExoVariant::mono, ExoVariant::bi, ExoVariant::mono_knee_on_thigh,
                 ExoVariant::mono_knee_on_shank}) {
    if (text == to_string(v)) return v;
  }
  throw ConfigError("unknown variant '" + std::string(text) + "'");
}

bool is_mono(ExoVariant v) { return v != ExoVariant::bi; }

JointVec velocity_map(const JointVec& bi) { return {bi.hip, -bi.hip + bi.knee}; }
JointVec inverse_velocity_map(const JointVec& mono) { return {mono.hip, mono.hip + mono.knee}; }
JointVec torque_map(const JointVec& mono) { return {mono.hip - mono.knee, mono.knee}; }
JointVec inverse_torque_map(const JointVec& bi) { return {bi.hip + bi.knee, bi.knee}; }

// ---------------------------------------------------------------------------

double ExoDesign::peak(Joint j) const {
  switch (j) {
    case Joint::hip: return hip_peak_nm;
    case Joint::knee: return knee_peak_nm;
    case Joint::ankle: break;
  }
  throw DomainError("the exoskeleton has no ankle actuator");
}

double ExoDesign::transmission_ratio(Joint j) const { return peak(j) / motor_peak_nm; }

double ExoDesign::reflected_inertia(Joint j) const {
  const double r = transmission_ratio(j);
  return rotor_inertia * r * r;
}

Eigen::Matrix<double, 3, 2> ExoDesign::joint_map() const {
  Eigen::Matrix<double, 3, 2> e = Eigen::Matrix<double, 3, 2>::Zero();
  e(0, 0) = 1;
  e(1, 1) = 1;
  // The bi knee actuator pulls the tibia against the torso, so it spans the hip too.
  if (variant == ExoVariant::bi) e(0, 1) = 1;
  return e;
}

std::string ExoDesign::label() const {
  if (std::isinf(hip_peak_nm) && std::isinf(knee_peak_nm)) return "ideal";
  return grid_label(hip_peak_nm, knee_peak_nm);
}

void ExoDesign::validate() const {
  for (double p : {hip_peak_nm, knee_peak_nm}) {
    if (!(p >= 0)) throw DomainError("peak torques must be non-negative");
    if (std::isfinite(p) && p < motor_peak_nm) {
      throw DomainError("peak torque below the motor peak gives a transmission ratio < 1");
    }
  }
  for (double m : {waist_mass_kg, thigh_mass_kg, shank_mass_kg, thigh_com_m, shank_com_m}) {
    if (!(m >= 0) || !std::isfinite(m)) throw DomainError("design masses and CoM must be >= 0");
  }
  if (!(rotor_inertia >= 0) || !(motor_peak_nm > 0)) {
    throw DomainError("rotor inertia must be >= 0 and motor peak > 0");
  }
  if (links && !(links->thigh_m > 0 && links->shank_m > 0)) {
    throw ConfigError("link lengths must be positive");
  }
}

char grid_letter(double peak_nm, bool upper) {
  for (std::size_t i = 0; i < kPeakGrid.size(); ++i) {
    if (peak_nm == kPeakGrid[i]) return static_cast<char>((upper ? 'A' : 'a') + i);
  }
  throw DomainError("peak torque " + io::format_number(peak_nm) + " N m is not on the 30..70 grid");
}

std::string grid_label(double hip_peak_nm, double knee_peak_nm) {
  return {grid_letter(hip_peak_nm, true), grid_letter(knee_peak_nm, false)};
}

std::pair<double, double> parse_grid_label(std::string_view label) {
  if (label.size() != 2 || label[0] < 'A' || label[0] > 'E' || label[1] < 'a' || label[1] > 'e') {
    throw DomainError("invalid design label '" + std::string(label) + "'");
  }
  return {kPeakGrid[static_cast<std::size_t>(label[0] - 'A')],
          kPeakGrid[static_cast<std::size_t>(label[1] - 'a')]};
}

ExoDesign reference_design(ExoVariant variant, double hip_peak_nm, double knee_peak_nm,
                           double thigh_length_m) {
  ExoDesign d;
  d.variant = variant;
  d.hip_peak_nm = hip_peak_nm;
  d.knee_peak_nm = knee_peak_nm;
  d.shank_mass_kg = 0.9;
  d.shank_com_m = 0.18 + thigh_length_m;

  // Bare thigh link without an actuation unit.
  constexpr double kThighLinkMass = 1.0;
  constexpr double kThighLinkCom = 0.23;
  switch (variant) {
    case ExoVariant::bi:
      d.waist_mass_kg = 4.5;
      d.thigh_mass_kg = kThighLinkMass;
      d.thigh_com_m = kThighLinkCom;
      break;
    case ExoVariant::mono:
      d.waist_mass_kg = 3.0;
      d.thigh_mass_kg = 2.5;
      d.thigh_com_m = 0.30;
      break;
    case ExoVariant::mono_knee_on_thigh: {
      // Knee unit on the upper thigh, 0.10 m below the hip.
      d.waist_mass_kg = 3.0;
      d.thigh_mass_kg = kThighLinkMass + kActuatorModuleMass;
      d.thigh_com_m = (kThighLinkMass * kThighLinkCom + kActuatorModuleMass * 0.10) / d.thigh_mass_kg;
      break;
    }
    case ExoVariant::mono_knee_on_shank: {
      // Knee unit on the upper shank, 0.05 m below the knee.
      d.waist_mass_kg = 3.0;
      d.thigh_mass_kg = kThighLinkMass;
      d.thigh_com_m = kThighLinkCom;
      const double unit_com = thigh_length_m + 0.05;
      const double m = d.shank_mass_kg + kActuatorModuleMass;
      d.shank_com_m = (d.shank_mass_kg * d.shank_com_m + kActuatorModuleMass * unit_com) / m;
      d.shank_mass_kg = m;
      break;
    }
  }
  d.validate();
  return d;
}

ExoDesign ideal_design(ExoVariant variant) {
  ExoDesign d;
  d.variant = variant;
  d.hip_peak_nm = std::numeric_limits<double>::infinity();
  d.knee_peak_nm = std::numeric_limits<double>::infinity();
  return d;
}

ExoDesign load_design_file(const std::filesystem::path& path, double thigh_length_m) {
  const auto kv = io::read_key_values(path);
  auto get = [&](const char* key) -> std::optional<double> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return io::parse_double(it->second, path.string() + ":" + key);
  };
  const auto var = kv.find("variant");
  if (var == kv.end()) throw ConfigError(path.string() + ": missing key 'variant'");
  const auto hip = get("hip_peak_nm");
  const auto knee = get("knee_peak_nm");
  if (!hip || !knee) throw ConfigError(path.string() + ": hip_peak_nm and knee_peak_nm are required");

  ExoDesign d = reference_design(parse_variant(var->second), *hip, *knee, thigh_length_m);
  if (auto v = get("waist_mass_kg")) d.waist_mass_kg = *v;
  if (auto v = get("thigh_mass_kg")) d.thigh_mass_kg = *v;
  if (auto v = get("shank_mass_kg")) d.shank_mass_kg = *v;
  if (auto v = get("thigh_com_m")) d.thigh_com_m = *v;
  if (auto v = get("shank_com_m")) d.shank_com_m = *v;
  const auto lt = get("thigh_link_m");
  const auto ls = get("shank_link_m");
  if (lt.has_value() != ls.has_value()) {
    throw ConfigError(path.string() + ": set both thigh_link_m and shank_link_m or neither");
  }
  if (lt) d.links = LinkLengths{*lt, *ls};
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------

namespace {

const LinkLengths& require_links(const ExoDesign& design) {
  if (!design.links) throw ConfigError("exoskeleton link lengths are not set");
  return *design.links;
}

}  // namespace

Point2 forward_kinematics(const ExoDesign& design, double q_a, double q_b) {
  const auto& l = require_links(design);
  const double lower = design.variant == ExoVariant::bi ? q_b : q_a - q_b;
  return {l.thigh_m * std::cos(q_a) + l.shank_m * std::cos(lower),
          l.thigh_m * std::sin(q_a) + l.shank_m * std::sin(lower)};
}

Eigen::Matrix2d kinematic_jacobian(const ExoDesign& design, double q_a, double q_b) {
  const auto& l = require_links(design);
  Eigen::Matrix2d j;
  if (design.variant == ExoVariant::bi) {
    j << -l.thigh_m * std::sin(q_a), -l.shank_m * std::sin(q_b),
          l.thigh_m * std::cos(q_a),  l.shank_m * std::cos(q_b);
  } else {
    const double s = std::sin(q_a - q_b);
    const double c = std::cos(q_a - q_b);
    j << -l.thigh_m * std::sin(q_a) - l.shank_m * s, l.shank_m * s,
          l.thigh_m * std::cos(q_a) + l.shank_m * c, -l.shank_m * c;
  }
  return j;
}

Eigen::MatrixX2d actuator_velocities(const ExoDesign& design, const GaitCycle& gait) {
  const std::size_t n = gait.size();
  Eigen::MatrixX2d out(static_cast<Eigen::Index>(n), 2);
  const auto& hip = gait.velocity_of(Joint::hip);
  const auto& knee = gait.velocity_of(Joint::knee);
  for (std::size_t i = 0; i < n; ++i) {
    JointVec v{hip[i], knee[i]};
    if (design.variant == ExoVariant::bi) v = inverse_velocity_map(v);
    out(static_cast<Eigen::Index>(i), 0) = v.hip;
    out(static_cast<Eigen::Index>(i), 1) = v.knee;
  }
  return out;
}

}  // namespace exo
