#pragma once

#include <array>
#include <functional>
#include <vector>

#include "exo/energetics.hpp"
#include "exo/gait.hpp"
#include "exo/kinematics.hpp"
#include "exo/pareto.hpp"

namespace exo {

inline constexpr double kMaxRegenEta = 0.65;

struct OverlayParams {
  double regen_eta = 0;
  double muscle_tendon_eta = 0.41;
  /// Mass location factors, foot, shank, thigh, waist (W/kg per kg).
  std::array<double, 4> beta{14.8, 5.6, 5.6, 3.3};
  /// Inertia location factors, foot, shank, thigh (W/kg per kg m^2).
  std::array<double, 3> gamma{47.22, 27.78, 125.07};

  void validate() const;
};

/// Added mass and inertia of one device. Thigh, shank and foot entries are
/// per leg; the waist mass is carried once.
struct InertiaSpec {
  double waist_mass_kg = 0;
  double thigh_mass_kg = 0;
  double shank_mass_kg = 0;
  double foot_mass_kg = 0;
  double thigh_com_m = 0;
  double shank_com_m = 0;
  /// Device inertia about the hip including the reflected rotor inertia.
  double thigh_inertia = 0;
  double shank_inertia = 0;
  double foot_inertia = 0;

  /// Point masses at the design's CoM plus rotor inertia reflected through
  /// the transmission of the actuator driving each segment.
  static InertiaSpec from_design(const ExoDesign& design);

  InertiaSpec operator+(const InertiaSpec& o) const;
};

/// Walking cost of carried mass, whole body, both legs (W/kg):
/// 0.045 m_waist + 2 (0.075 m_thigh + 0.076 m_shank).
double browning_mass_delta(const InertiaSpec& spec);

struct InertiaDelta {
  double thigh = 0;  // per leg
  double shank = 0;  // per leg
  double total = 0;  // both legs
};

/// Walking cost of added segment inertia relative to the unloaded leg:
///   thigh: ((-0.74 + 1.81 I_ratio) - 1) MC,  shank: ((0.63749 + 0.40916 I_ratio) - 1) MC
/// with I_ratio = (I_exo + I_unloaded) / I_unloaded. Throws DomainError for
/// a non-positive unloaded inertia.
InertiaDelta browning_inertia_delta(const InertiaSpec& spec, const Subject& subject, double mc_unassisted);

/// Inertia multipliers of the regression above (foot, shank, thigh). The foot
/// value is not part of the thigh/shank regression and is scaled from the shank
/// value by the ratio of the foot and shank location factors.
inline constexpr std::array<double, 3> kInertiaMultiplier{0.40916 * 47.22 / 27.78, 0.40916, 1.81};

/// gamma_i = A_i m_subjects MC_unloaded / I_unloaded.
double location_factor(double a_i, double subject_mass_kg, double mc_unloaded, double i_unloaded);

/// Dissipated power: p_minus - p_plus when the device absorbs more than it
/// delivers, else 0.
double dissipated_power(double p_plus, double p_minus);

/// Modified augmentation factor. Masses (foot, shank, thigh, waist, kg) and
/// inertias (foot, shank, thigh, kg m^2) are whole-device totals; their
/// penalties are divided by `subject_mass_kg` so every term is in W/kg.
/// Pass a subject mass of 1 for the raw sums.
double maf(double p_plus, double p_minus, const std::array<double, 4>& masses,
           const std::array<double, 3>& inertias, const OverlayParams& params, double subject_mass_kg = 1);

/// Whole-device MAF of a design point. Regeneration recovers a share
/// `regen_eta` of the negative power before the dissipated power is formed.
double maf(const DesignPoint& point, const InertiaSpec& spec, const OverlayParams& params, double subject_mass_kg);

/// absolute - eta * negative. Throws DomainError for eta outside [0, 0.65].
double regen_adjust(const EnergyReport& report, double eta);

struct OverlayOptions {
  bool mass = true;
  bool inertia = true;
  /// Inertial layout of a design; InertiaSpec::from_design unless replaced.
  std::function<InertiaSpec(const ExoDesign&)> spec_of;
};

/// Adds the carried-mass and inertia penalties to each assisted metabolic
/// rate, recomputes the reduction against the point's unassisted rate,
/// replaces the power objective with the regeneration-adjusted power and
/// returns all points (same order). Only segments that carry device inertia
/// receive an inertia penalty.
std::vector<DesignPoint> overlay_points(const std::vector<DesignPoint>& points, const Subject& subject,
                                        const OverlayParams& params, const OverlayOptions& options = {});

/// overlay_points followed by the dominance filter.
std::vector<DesignPoint> apply_overlays(const std::vector<DesignPoint>& points, const Subject& subject,
                                        const OverlayParams& params, const OverlayOptions& options = {});

}  // namespace exo
