#include <algorithm>
#include <random>
#include <set>

#include "exo/errors.hpp"
#include "exo/pareto.hpp"
#include "support.hpp"

using namespace exo;
using exo::testing::TempDir;

namespace {

DesignPoint point(std::string label, double reduction, double power) {
  DesignPoint p;
  p.label = std::move(label);
  p.reduction_pct = reduction;
  p.power_w_kg = power;
  return p;
}

std::set<std::string> labels(const std::vector<DesignPoint>& pts) {
  std::set<std::string> s;
  for (const auto& p : pts) s.insert(p.label);
  return s;
}

// Pairwise oracle written from the definition.
std::set<std::string> brute_force(const std::vector<DesignPoint>& pts) {
  std::set<std::string> keep;
  for (const auto& p : pts) {
    bool dominated = false;
    for (const auto& q : pts) {
      const bool ge = q.reduction_pct >= p.reduction_pct && q.power_w_kg <= p.power_w_kg;
      const bool strict = q.reduction_pct > p.reduction_pct || q.power_w_kg < p.power_w_kg;
      if (ge && strict) dominated = true;
    }
    if (!dominated) keep.insert(p.label);
  }
  return keep;
}

std::vector<DesignPoint> random_points(std::mt19937_64& rng, std::size_t n, bool coarse) {
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> grid(0, 9);
  std::vector<DesignPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = coarse ? grid(rng) : 40 * u(rng);
    const double w = coarse ? grid(rng) * 0.1 : 2 * u(rng);
    pts.push_back(point("p" + std::to_string(i), r, w));
  }
  return pts;
}

}  // namespace

TEST(Dominance, Examples) {
  EXPECT_EQ(labels(dominance_filter({point("a", 10, 1.0), point("b", 12, 0.9)})), (std::set<std::string>{"b"}));
  EXPECT_EQ(labels(dominance_filter({point("a", 10, 1.0), point("b", 12, 1.2)})),
            (std::set<std::string>{"a", "b"}));
}

TEST(Dominance, TiesOnBothObjectivesAreKept) {
  const auto f = dominance_filter({point("a", 5, 1), point("b", 5, 1), point("c", 5, 1.5), point("d", 4, 1)});
  EXPECT_EQ(labels(f), (std::set<std::string>{"a", "b"}));
}

TEST(Dominance, EmptyInputIsDomainError) { EXPECT_THROW(dominance_filter({}), DomainError); }

TEST(Dominance, MatchesBruteForce) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const bool coarse = trial % 2 == 1;  // coarse grids force ties
    const auto pts = random_points(rng, trial < 2 ? 1000 : 200, coarse);
    EXPECT_EQ(labels(dominance_filter(pts)), brute_force(pts)) << "trial " << trial;
  }
}

TEST(Dominance, IdempotentAndOrderFree) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = random_points(rng, 300, trial % 2 == 0);
    const auto front = dominance_filter(pts);
    EXPECT_EQ(labels(dominance_filter(front)), labels(front));
    std::shuffle(pts.begin(), pts.end(), rng);
    const auto again = dominance_filter(pts);
    ASSERT_EQ(again.size(), front.size());
    for (std::size_t i = 0; i < front.size(); ++i) EXPECT_EQ(again[i].label, front[i].label);
  }
}

TEST(Dominance, EveryPointIsCoveredAndFrontIsAStaircase) {
  std::mt19937_64 rng(3);
  const auto pts = random_points(rng, 500, false);
  const auto front = dominance_filter(pts);
  for (const auto& p : pts) {
    bool covered = false;
    for (const auto& f : front) covered = covered || f.label == p.label || dominates(f, p);
    EXPECT_TRUE(covered) << p.label;
  }
  for (std::size_t i = 1; i < front.size(); ++i) {
    EXPECT_LT(front[i - 1].power_w_kg, front[i].power_w_kg);
    EXPECT_LT(front[i - 1].reduction_pct, front[i].reduction_pct);
  }
}

class SweepTest : public ::testing::Test {
 protected:
  static const SweepResult& result(ExoVariant v) {
    static const SweepResult mono = sweep(synth_gait(7, Condition::noload), default_muscles(), ExoVariant::mono);
    static const SweepResult bi = sweep(synth_gait(7, Condition::noload), default_muscles(), ExoVariant::bi);
    return v == ExoVariant::mono ? mono : bi;
  }
};

TEST_F(SweepTest, GridHasTwentyFivePointsSortedByLabel) {
  for (auto v : {ExoVariant::mono, ExoVariant::bi}) {
    const auto& r = result(v);
    ASSERT_EQ(r.points.size(), 25u);
    EXPECT_TRUE(std::is_sorted(r.points.begin(), r.points.end(),
                               [](const auto& a, const auto& b) { return a.label < b.label; }));
    EXPECT_EQ(r.points.front().label, "Aa");
    EXPECT_EQ(r.points.front().design.hip_peak_nm, 70);
    EXPECT_EQ(r.points.front().design.knee_peak_nm, 70);
    EXPECT_EQ(r.points.back().label, "Ee");
    for (const auto& p : r.points) {
      EXPECT_EQ(p.label, grid_label(p.design.hip_peak_nm, p.design.knee_peak_nm));
      EXPECT_EQ(p.design.variant, v);
      EXPECT_GT(r.unassisted_rate_w_kg, 0);
    }
  }
}

TEST_F(SweepTest, LooserCapsNeverCostMore) {
  for (auto v : {ExoVariant::mono, ExoVariant::bi}) {
    const auto& pts = result(v).points;
    const auto& aa = pts.front();
    const auto& ee = pts.back();
    for (std::size_t k = 0; k < aa.step_objective.size(); ++k) {
      EXPECT_LE(aa.step_objective[k], ee.step_objective[k] * (1 + 1e-9) + 1e-12) << k;
    }
  }
}

TEST_F(SweepTest, ThreadCountDoesNotChangeResults) {
  SweepOptions opt;
  opt.threads = 3;
  const auto par = sweep(synth_gait(7, Condition::noload), default_muscles(), ExoVariant::mono, opt);
  const auto& ser = result(ExoVariant::mono);
  ASSERT_EQ(par.points.size(), ser.points.size());
  for (std::size_t i = 0; i < par.points.size(); ++i) {
    EXPECT_EQ(par.points[i].reduction_pct, ser.points[i].reduction_pct);
    EXPECT_EQ(par.points[i].power_w_kg, ser.points[i].power_w_kg);
  }
}

TEST_F(SweepTest, FrontCsvRoundTrip) {
  TempDir dir;
  const auto front = dominance_filter(result(ExoVariant::bi).points);
  write_front_csv(front, dir / "front.csv");
  const auto back = load_front_csv(dir / "front.csv");
  ASSERT_EQ(back.size(), front.size());
  for (std::size_t i = 0; i < front.size(); ++i) {
    EXPECT_EQ(back[i].label, front[i].label);
    EXPECT_EQ(back[i].design.variant, ExoVariant::bi);
    EXPECT_NEAR(back[i].reduction_pct, front[i].reduction_pct, 1e-7 * std::abs(front[i].reduction_pct));
    EXPECT_NEAR(back[i].power_w_kg, front[i].power_w_kg, 1e-8 * front[i].power_w_kg);
  }
  EXPECT_EQ(exo::testing::slurp(dir / "front.csv").substr(0, kFrontCsvHeader.size()), kFrontCsvHeader);
}

TEST(FrontCsv, LabelMustMatchCaps) {
  TempDir dir;
  exo::testing::spit(dir / "f.csv", std::string(kFrontCsvHeader) + "\nAb,mono,noload,70,70,10,1,0.5,0.5,0.1,2\n");
  EXPECT_THROW(load_front_csv(dir / "f.csv"), Error);
}
