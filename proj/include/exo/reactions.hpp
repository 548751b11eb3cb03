#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "exo/gait.hpp"
#include "exo/redundancy.hpp"

namespace exo {

/// Intersegmental loads at one joint, normalized by body mass. Forces act on
/// the proximal segment from the distal one; F_x is anterior, F_y upward.
/// M_z is the moment the biological tissue carries about the joint, i.e. the
/// net joint moment minus the share delivered by the device.
struct JointLoad {
  double fx = 0;  // N/kg
  double fy = 0;  // N/kg
  double mz = 0;  // N m/kg

  friend bool operator==(const JointLoad&, const JointLoad&) = default;
};

/// Loads per joint, indexed by `Joint` (hip, knee, ankle).
using ReactionSample = std::array<JointLoad, kJointCount>;

struct ReactionSeries {
  std::vector<double> pct;
  std::vector<ReactionSample> samples;

  std::size_t size() const { return pct.size(); }
};

/// Planar three-segment leg hanging from a hip fixed in space. Segment
/// kinematics come from the joint angles and their derivatives; the recursion
/// runs foot -> shank -> thigh with the ground reaction force as the external
/// load on the foot. `gravity` is exposed so static checks can switch it off.
ReactionSeries newton_euler_reactions(const GaitCycle& gait, const Subject& subject,
                                      const AssistSolution* sol = nullptr, double gravity = kGravity);

enum class LoadComponent { fx, fy, mz };
inline constexpr std::array<LoadComponent, 3> kLoadComponents{LoadComponent::fx, LoadComponent::fy, LoadComponent::mz};
std::string_view to_string(LoadComponent c);
double component(const JointLoad& load, LoadComponent c);

struct PeakReduction {
  Joint joint;
  LoadComponent component;
  GaitPhase phase;
  std::optional<double> percent;  // undefined when the unassisted peak is zero
};

/// 100 (peak|unassisted| - peak|assisted|) / peak|unassisted| per joint,
/// component and phase.
std::vector<PeakReduction> peak_reduction(const ReactionSeries& assisted, const ReactionSeries& unassisted,
                                          const PhaseTable& phases);

/// `pct` followed by <joint>_fx_n_kg, <joint>_fy_n_kg, <joint>_mz_nm_kg for
/// ankle, knee and hip.
std::vector<std::string> reaction_csv_header();
void write_reactions_csv(const ReactionSeries& series, const std::filesystem::path& path);
ReactionSeries load_reactions_csv(const std::filesystem::path& path);

}  // namespace exo
