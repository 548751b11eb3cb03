#include <random>
#include <set>

#include "exo/errors.hpp"
#include "exo/overlay.hpp"
#include "support.hpp"

using namespace exo;

namespace {

const Subject& subject() {
  static const Subject s = Subject::from_anthropometry(75, 1.75);
  return s;
}

const std::vector<DesignPoint>& grid(ExoVariant v) {
  static const auto mono = sweep(synth_gait(7, Condition::loaded), default_muscles(), ExoVariant::mono).points;
  static const auto bi = sweep(synth_gait(7, Condition::loaded), default_muscles(), ExoVariant::bi).points;
  return v == ExoVariant::mono ? mono : bi;
}

std::set<std::string> labels(const std::vector<DesignPoint>& pts) {
  std::set<std::string> s;
  for (const auto& p : pts) s.insert(p.label);
  return s;
}

}  // namespace

TEST(BrowningMass, DeviceMassTerms) {
  InertiaSpec bi;
  bi.waist_mass_kg = 4.5;
  EXPECT_NEAR(browning_mass_delta(bi), 0.2025, 1e-12);
  InertiaSpec mono;
  mono.thigh_mass_kg = 2.5;
  // Carried on both legs.
  EXPECT_NEAR(browning_mass_delta(mono), 2 * 0.1875, 1e-12);
  EXPECT_EQ(browning_mass_delta(InertiaSpec{}), 0.0);
  InertiaSpec shank;
  shank.shank_mass_kg = 0.9;
  EXPECT_NEAR(browning_mass_delta(shank), 2 * 0.076 * 0.9, 1e-12);
}

TEST(BrowningMass, Additive) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 5);
  for (int i = 0; i < 1000; ++i) {
    InertiaSpec a, b;
    a.waist_mass_kg = u(rng), a.thigh_mass_kg = u(rng), a.shank_mass_kg = u(rng);
    b.waist_mass_kg = u(rng), b.thigh_mass_kg = u(rng), b.shank_mass_kg = u(rng);
    EXPECT_NEAR(browning_mass_delta(a + b), browning_mass_delta(a) + browning_mass_delta(b), 1e-12);
  }
}

TEST(BrowningInertia, UnitRatioConstants) {
  const double mc = 3.2;
  const auto d = browning_inertia_delta(InertiaSpec{}, subject(), mc);
  EXPECT_NEAR(d.thigh, 0.07 * mc, 1e-12);
  EXPECT_NEAR(d.shank, 0.04665 * mc, 1e-12);
  EXPECT_NEAR(d.total, 2 * (0.07 + 0.04665) * mc, 1e-12);
}

TEST(BrowningInertia, LinearInRatio) {
  const double mc = 2.5;
  const double iu = subject().unloaded_leg_inertia;
  InertiaSpec one, two;
  one.thigh_inertia = iu;      // ratio 2
  two.thigh_inertia = 3 * iu;  // ratio 4
  const double d1 = browning_inertia_delta(one, subject(), mc).thigh;
  const double d2 = browning_inertia_delta(two, subject(), mc).thigh;
  EXPECT_NEAR((d2 - d1) / 2, 1.81 * mc, 1e-12);
  EXPECT_NEAR(browning_inertia_delta(one, subject(), mc).shank, 0.04665 * mc, 1e-12);
}

TEST(BrowningInertia, NeedsPositiveLegInertia) {
  Subject s = subject();
  s.unloaded_leg_inertia = 0;
  EXPECT_THROW(browning_inertia_delta(InertiaSpec{}, s, 3), DomainError);
}

TEST(LocationFactor, Examples) {
  EXPECT_EQ(location_factor(0, 75, 3, 1.2), 0.0);
  EXPECT_NEAR(location_factor(1.81, 75, 6, 1.2), 2 * location_factor(1.81, 75, 3, 1.2), 1e-12);
  EXPECT_NEAR(location_factor(2, 10, 3, 4), 15.0, 1e-12);
  EXPECT_THROW(location_factor(1, 75, 3, 0), DomainError);
}

TEST(LocationFactor, RecoversDefaultFactorsFromInvertedInertia) {
  const std::array<double, 3> factors{47.22, 27.78, 125.07};
  const double mass = 75, mc = 3.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double iu = kInertiaMultiplier[i] * mass * mc / factors[i];
    EXPECT_GT(iu, 0);
    EXPECT_NEAR(location_factor(kInertiaMultiplier[i], mass, mc, iu), factors[i], 0.005 * factors[i]);
  }
  // Foot and shank share one leg inertia by construction.
  EXPECT_NEAR(kInertiaMultiplier[0] / factors[0], kInertiaMultiplier[1] / factors[1], 1e-15);
}

TEST(Maf, Examples) {
  const OverlayParams p;
  EXPECT_NEAR(maf(0.3, 0.1, {}, {}, p), 0.3 / 0.41, 1e-12);
  EXPECT_NEAR(maf(0.3, 0.1, {}, {}, p), 0.73171, 1e-5);
  EXPECT_NEAR(maf(0.1, 0.3, {}, {}, p), 0.3 / 0.41, 1e-12);
  EXPECT_EQ(maf(0, 0, {}, {}, p), 0.0);
  // Penalties: one kg at the waist, 0.1 kg m^2 on the thigh, per 10 kg subject.
  EXPECT_NEAR(maf(0, 0, {0, 0, 0, 1}, {0, 0, 0.1}, p, 10), -(3.3 + 12.507) / 10, 1e-12);
}

TEST(Maf, DissipationGateIsContinuous) {
  for (double x : {0.0, 0.2, 1.5}) {
    EXPECT_EQ(dissipated_power(x, x), 0.0);
    EXPECT_GT(dissipated_power(x, x + 1e-9), 0.0);
    EXPECT_EQ(dissipated_power(x + 1e-9, x), 0.0);
    EXPECT_NEAR(maf(x, x + 1e-9, {}, {}, OverlayParams{}), maf(x, x, {}, {}, OverlayParams{}), 1e-8);
  }
}

TEST(Regen, Examples) {
  EnergyReport r;
  r.abs_power_w_kg = 2.0;
  r.neg_power_w_kg = 0.4;
  EXPECT_NEAR(regen_adjust(r, 0.65), 1.74, 1e-12);
  EXPECT_EQ(regen_adjust(r, 0), 2.0);
  r.neg_power_w_kg = 0;
  for (double eta : {0.0, 0.3, 0.65}) EXPECT_EQ(regen_adjust(r, eta), 2.0);
  EXPECT_THROW(regen_adjust(r, 0.66), DomainError);
  EXPECT_THROW(regen_adjust(r, -0.01), DomainError);
}

TEST(Regen, AffineAndNonIncreasing) {
  for (const auto& p : grid(ExoVariant::bi)) {
    double prev = regen_adjust(p.report, 0);
    EXPECT_EQ(prev, p.report.abs_power_w_kg);
    for (int k = 1; k <= 13; ++k) {
      const double eta = 0.05 * k;
      const double v = regen_adjust(p.report, eta);
      EXPECT_LE(v, prev);
      EXPECT_NEAR(v, p.report.abs_power_w_kg - eta * p.report.neg_power_w_kg, 1e-12);
      prev = v;
    }
  }
}

TEST(OverlaySettings, Validation) {
  OverlayParams p;
  EXPECT_NO_THROW(p.validate());
  p.regen_eta = 0.7;
  EXPECT_THROW(p.validate(), DomainError);
  p = {};
  p.gamma[1] = 0;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(Overlay, IdentityWithoutMassOrRegen) {
  OverlayOptions none;
  none.spec_of = [](const ExoDesign&) { return InertiaSpec{}; };
  none.inertia = false;
  const auto& pts = grid(ExoVariant::mono);
  const auto out = overlay_points(pts, subject(), OverlayParams{}, none);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(out[i].reduction_pct, pts[i].reduction_pct, 1e-12);
    EXPECT_EQ(out[i].power_w_kg, pts[i].power_w_kg);
  }
  EXPECT_EQ(labels(apply_overlays(pts, subject(), OverlayParams{}, none)), labels(dominance_filter(pts)));
}

TEST(Overlay, PositiveMassLowersEveryReduction) {
  for (auto v : {ExoVariant::mono, ExoVariant::bi}) {
    const auto& pts = grid(v);
    const auto out = overlay_points(pts, subject(), OverlayParams{});
    for (std::size_t i = 0; i < pts.size(); ++i) {
      EXPECT_LT(out[i].reduction_pct, pts[i].reduction_pct) << pts[i].label;
      EXPECT_EQ(out[i].label, pts[i].label);
    }
  }
}

TEST(Overlay, RegenNeverRaisesPower) {
  const auto& pts = grid(ExoVariant::bi);
  OverlayParams lo, hi;
  hi.regen_eta = 0.65;
  const auto a = overlay_points(pts, subject(), lo);
  const auto b = overlay_points(pts, subject(), hi);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_LE(b[i].power_w_kg, a[i].power_w_kg);
    EXPECT_EQ(b[i].reduction_pct, a[i].reduction_pct);
  }
}

TEST(Overlay, RefilterMatchesPairwiseOracle) {
  for (auto v : {ExoVariant::mono, ExoVariant::bi}) {
    for (double eta : {0.0, 0.3, 0.65}) {
      OverlayParams p;
      p.regen_eta = eta;
      const auto all = overlay_points(grid(v), subject(), p);
      std::set<std::string> oracle;
      for (const auto& a : all) {
        bool dominated = false;
        for (const auto& b : all) dominated = dominated || dominates(b, a);
        if (!dominated) oracle.insert(a.label);
      }
      EXPECT_EQ(labels(apply_overlays(grid(v), subject(), p)), oracle);
    }
  }
}

TEST(Overlay, SpecFromDesign) {
  const auto bi = InertiaSpec::from_design(reference_design(ExoVariant::bi, 50, 50, 0.43));
  EXPECT_EQ(bi.waist_mass_kg, 4.5);
  EXPECT_GT(bi.thigh_inertia, 0);
  EXPECT_GT(bi.shank_inertia, 0);
  const auto mono = InertiaSpec::from_design(reference_design(ExoVariant::mono, 50, 50, 0.43));
  EXPECT_EQ(mono.thigh_mass_kg, 2.5);
  EXPECT_GT(mono.thigh_inertia, bi.thigh_inertia);
}

TEST(Overlay, DesignMafMatchesHandSum) {
  const auto& p = grid(ExoVariant::bi)[12];
  const auto s = InertiaSpec::from_design(p.design);
  OverlayParams params;
  const double expected = (p.report.pos_power_w_kg + dissipated_power(p.report.pos_power_w_kg, p.report.neg_power_w_kg)) / 0.41 -
                          (5.6 * 2 * s.shank_mass_kg + 5.6 * 2 * s.thigh_mass_kg + 3.3 * s.waist_mass_kg +
                           27.78 * 2 * s.shank_inertia + 125.07 * 2 * s.thigh_inertia) / 75;
  EXPECT_NEAR(maf(p, s, params, 75), expected, 1e-12);
}
