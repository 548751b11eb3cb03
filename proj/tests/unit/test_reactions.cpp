#include <cmath>
#include <complex>
#include <cstring>

#include "exo/errors.hpp"
#include "exo/io.hpp"
#include "exo/reactions.hpp"
#include "support.hpp"

using namespace exo;
using exo::testing::TempDir;

namespace {

const Subject& subject() {
  static const Subject s = Subject::from_anthropometry(75, 1.75);
  return s;
}

GaitCycle standing(double grf_y) {
  GaitCycle g = synth_gait(7, Condition::noload);
  for (auto* series : {&g.angle, &g.velocity, &g.moment}) {
    for (auto& v : *series) std::fill(v.begin(), v.end(), 0.0);
  }
  std::fill(g.grf_x.begin(), g.grf_x.end(), 0.0);
  std::fill(g.grf_y.begin(), g.grf_y.end(), grf_y);
  return g;
}

const JointLoad& at(const ReactionSample& s, Joint j) { return s[static_cast<int>(j)]; }

}  // namespace

TEST(NewtonEuler, StaticStandingCarriesWeightAboveHip) {
  // One leg carries half the body weight.
  const auto r = newton_euler_reactions(standing(kGravity / 2), subject());
  double leg = 0;
  for (double m : subject().mass_seg_kg) leg += m;
  const double expected = kGravity * (0.5 - leg / subject().mass_kg);
  for (const auto& s : r.samples) {
    EXPECT_NEAR(at(s, Joint::hip).fy, expected, 1e-9);
    EXPECT_NEAR(at(s, Joint::hip).fx, 0.0, 1e-9);
    EXPECT_NEAR(at(s, Joint::ankle).fy,
                kGravity * (0.5 - subject().mass_seg_kg[static_cast<int>(Segment::foot)] / subject().mass_kg), 1e-9);
  }
}

TEST(NewtonEuler, NoLoadsGiveExactZeros) {
  const auto r = newton_euler_reactions(standing(0), subject(), nullptr, 0.0);
  for (const auto& s : r.samples) {
    for (Joint j : kJoints) {
      EXPECT_EQ(at(s, j), (JointLoad{0, 0, 0}));
      EXPECT_FALSE(std::signbit(at(s, j).fy));
    }
  }
}

TEST(NewtonEuler, WholeLegForceBalance) {
  // Independent oracle: segment CoM accelerations from complex phasors,
  // z'' = sum r (i alpha - w^2) e^{i phi}, summed down the chain.
  using C = std::complex<double>;
  const C i1(0, 1);
  for (auto c : {Condition::noload, Condition::loaded}) {
    const auto g = synth_gait(11, c);
    const auto acc = joint_accelerations(g);
    const auto r = newton_euler_reactions(g, subject());
    const auto& sub = subject();
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double phi[3] = {g.angle[0][k], g.angle[0][k] + g.angle[1][k],
                             g.angle[0][k] + g.angle[1][k] + g.angle[2][k]};
      const double w[3] = {g.velocity[0][k], w[0] + g.velocity[1][k], w[1] + g.velocity[2][k]};
      const double al[3] = {acc[0][k], al[0] + acc[1][k], al[1] + acc[2][k]};
      // Thigh and shank hang down at zero angle: direction -i e^{i phi}.
      auto dir = [&](int s) { return s < 2 ? -i1 * std::exp(i1 * phi[s]) : std::exp(i1 * phi[s]); };
      auto term = [&](int s, double len) { return len * (i1 * al[s] - w[s] * w[s]) * dir(s); };
      const double lt = sub.length_m[static_cast<int>(Segment::thigh)];
      const double ls = sub.length_m[static_cast<int>(Segment::shank)];
      const C a_thigh = term(0, sub.com_m[static_cast<int>(Segment::thigh)]);
      const C a_shank = term(0, lt) + term(1, sub.com_m[static_cast<int>(Segment::shank)]);
      const C a_foot = term(0, lt) + term(1, ls) + term(2, sub.com_m[static_cast<int>(Segment::foot)]);
      C sum_ma = sub.mass_seg_kg[static_cast<int>(Segment::thigh)] * a_thigh +
                 sub.mass_seg_kg[static_cast<int>(Segment::shank)] * a_shank +
                 sub.mass_seg_kg[static_cast<int>(Segment::foot)] * a_foot;
      double leg = 0;
      for (double m : sub.mass_seg_kg) leg += m;
      const C external = C(g.grf_x[k], g.grf_y[k]) * sub.mass_kg + C(0, -kGravity * leg);
      const C hip = (external - sum_ma) / sub.mass_kg;
      EXPECT_NEAR(at(r.samples[k], Joint::hip).fx, hip.real(), 1e-9);
      EXPECT_NEAR(at(r.samples[k], Joint::hip).fy, hip.imag(), 1e-9);
    }
  }
}

TEST(NewtonEuler, AssistOnlyChangesMoments) {
  const auto g = synth_gait(7, Condition::loaded);
  const auto none = newton_euler_reactions(g, subject());
  for (auto v : {ExoVariant::mono, ExoVariant::bi}) {
    const auto sol = solve_cycle(g, default_muscles(), reference_design(v, 70, 50, 0.43));
    const auto with = newton_euler_reactions(g, subject(), &sol);
    const Eigen::MatrixXd assist = sol.joint_assist();
    for (std::size_t k = 0; k < g.size(); ++k) {
      for (Joint j : kJoints) {
        EXPECT_EQ(at(with.samples[k], j).fx, at(none.samples[k], j).fx);
        EXPECT_EQ(at(with.samples[k], j).fy, at(none.samples[k], j).fy);
        const double delta = assist(static_cast<Eigen::Index>(k), static_cast<int>(j)) / g.subject_mass_kg;
        EXPECT_NEAR(at(none.samples[k], j).mz - at(with.samples[k], j).mz, delta, 1e-12);
      }
      EXPECT_EQ(at(with.samples[k], Joint::ankle).mz, at(none.samples[k], Joint::ankle).mz);
    }
  }
}

TEST(NewtonEuler, BiKneeActuatorLoadsBothJoints) {
  const auto g = synth_gait(7, Condition::noload);
  auto sol = solve_cycle(g, default_muscles(), reference_design(ExoVariant::bi, 70, 70, 0.43));
  sol.exo_torque.setZero();
  sol.exo_torque.col(1).setConstant(7.5);
  const auto none = newton_euler_reactions(g, subject());
  const auto with = newton_euler_reactions(g, subject(), &sol);
  const double d = 7.5 / g.subject_mass_kg;
  EXPECT_NEAR(at(none.samples[10], Joint::hip).mz - at(with.samples[10], Joint::hip).mz, d, 1e-12);
  EXPECT_NEAR(at(none.samples[10], Joint::knee).mz - at(with.samples[10], Joint::knee).mz, d, 1e-12);
}

TEST(NewtonEuler, ZeroDeviceTorqueMatchesNoDeviceBitwise) {
  const auto g = synth_gait(3, Condition::noload);
  auto sol = solve_cycle(g, default_muscles(), reference_design(ExoVariant::mono, 40, 40, 0.43));
  sol.exo_torque.setZero();
  const auto a = newton_euler_reactions(g, subject());
  const auto b = newton_euler_reactions(g, subject(), &sol);
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (Joint j : kJoints) {
      EXPECT_EQ(std::memcmp(&at(a.samples[k], j), &at(b.samples[k], j), sizeof(JointLoad)), 0);
    }
  }
}

TEST(NewtonEuler, GridMismatchIsDataError) {
  const auto g = synth_gait(3, Condition::noload);
  const auto sol = solve_cycle(synth_gait(3, Condition::noload, {.samples = 51}), default_muscles(), std::nullopt);
  EXPECT_THROW(newton_euler_reactions(g, subject(), &sol), DataError);
}

TEST(PeakReduction, IdenticalAndHalvedSeries) {
  const auto g = synth_gait(5, Condition::loaded);
  const auto u = newton_euler_reactions(g, subject());
  auto half = u;
  for (auto& s : half.samples) {
    for (auto& l : s) l = {0.5 * l.fx, 0.5 * l.fy, 0.5 * l.mz};
  }
  const auto phases = phase_bounds(g.toe_off_pct);
  for (const auto& r : peak_reduction(u, u, phases)) {
    ASSERT_TRUE(r.percent.has_value());
    EXPECT_EQ(*r.percent, 0.0);
  }
  for (const auto& r : peak_reduction(half, u, phases)) {
    ASSERT_TRUE(r.percent.has_value());
    EXPECT_NEAR(*r.percent, 50.0, 1e-12);
  }
}

TEST(PeakReduction, HandBuiltThreeSamples) {
  ReactionSeries u, a;
  u.pct = a.pct = {0, 50, 100};
  u.samples.resize(3);
  a.samples.resize(3);
  const double uf[3] = {-4, 2, 5}, af[3] = {-3, 2, 1};
  for (int k = 0; k < 3; ++k) {
    u.samples[static_cast<std::size_t>(k)][static_cast<int>(Joint::hip)].fy = uf[k];
    a.samples[static_cast<std::size_t>(k)][static_cast<int>(Joint::hip)].fy = af[k];
  }
  const auto out = peak_reduction(a, u, phase_bounds(60));
  auto find = [&](Joint j, LoadComponent c, GaitPhase p) {
    for (const auto& r : out) {
      if (r.joint == j && r.component == c && r.phase == p) return r.percent;
    }
    ADD_FAILURE() << "missing entry";
    return std::optional<double>{};
  };
  EXPECT_NEAR(*find(Joint::hip, LoadComponent::fy, GaitPhase::loading_response), 25.0, 1e-12);
  EXPECT_NEAR(*find(Joint::hip, LoadComponent::fy, GaitPhase::pre_swing), 0.0, 1e-12);
  EXPECT_NEAR(*find(Joint::hip, LoadComponent::fy, GaitPhase::terminal_swing), 80.0, 1e-12);
  EXPECT_FALSE(find(Joint::hip, LoadComponent::fy, GaitPhase::mid_stance).has_value());
  EXPECT_FALSE(find(Joint::knee, LoadComponent::fx, GaitPhase::loading_response).has_value());
  EXPECT_EQ(out.size(), kJointCount * 3 * kPhaseCount);
}

TEST(PeakReduction, MismatchedSeriesAreDataErrors) {
  ReactionSeries u, a;
  u.pct = {0, 50, 100};
  a.pct = {0, 40, 100};
  u.samples.resize(3);
  a.samples.resize(3);
  EXPECT_THROW(peak_reduction(a, u, phase_bounds(60)), DataError);
  a.pct = {0, 100};
  a.samples.resize(2);
  EXPECT_THROW(peak_reduction(a, u, phase_bounds(60)), DataError);
}

TEST(ReactionCsv, RoundTrip) {
  TempDir dir;
  const auto r = newton_euler_reactions(synth_gait(5, Condition::loaded), subject());
  write_reactions_csv(r, dir / "r.csv");
  const auto back = load_reactions_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), r.size());
  EXPECT_EQ(io::read_csv(dir / "r.csv").header, reaction_csv_header());
  for (std::size_t k = 0; k < r.size(); ++k) {
    for (Joint j : kJoints) {
      EXPECT_NEAR(at(back.samples[k], j).fy, at(r.samples[k], j).fy, 1e-8 * std::max(1.0, std::abs(at(r.samples[k], j).fy)));
      EXPECT_NEAR(at(back.samples[k], j).mz, at(r.samples[k], j).mz, 1e-8);
    }
  }
}
