#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "exo/errors.hpp"
#include "exo/gait.hpp"
#include "exo/io.hpp"
#include "support.hpp"

using namespace exo;
using exo::testing::TempDir;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double peak_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool same_cycle(const GaitCycle& a, const GaitCycle& b) {
  return a.pct == b.pct && a.angle == b.angle && a.velocity == b.velocity &&
         a.moment == b.moment && a.grf_x == b.grf_x && a.grf_y == b.grf_y &&
         a.toe_off_pct == b.toe_off_pct && a.stride_s == b.stride_s;
}

// Writes the synthetic stride with one column rewritten by `edit`.
void write_edited(const std::filesystem::path& p, const GaitCycle& g,
                  const std::function<void(io::CsvTable&)>& edit) {
  write_gait_csv(g, p);
  auto t = io::read_csv(p);
  edit(t);
  io::write_csv(p, t);
}

}  // namespace

TEST(Synth, IsDeterministic) {
  const auto a = synth_gait(7, Condition::noload);
  const auto b = synth_gait(7, Condition::noload);
  EXPECT_TRUE(same_cycle(a, b));
  EXPECT_EQ(a.size(), 101u);
  EXPECT_FALSE(same_cycle(a, synth_gait(8, Condition::noload)));
}

TEST(Synth, LoadedMomentsPeakHigher) {
  const auto n = synth_gait(7, Condition::noload);
  const auto l = synth_gait(7, Condition::loaded);
  for (Joint j : kJoints) {
    EXPECT_GT(peak_abs(l.moment_of(j)), peak_abs(n.moment_of(j))) << to_string(j);
  }
  EXPECT_NE(l.toe_off_pct, n.toe_off_pct);
}

TEST(Synth, AnglesStayInWalkingBands) {
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    for (auto c : {Condition::noload, Condition::loaded}) {
      const auto g = synth_gait(seed, c);
      for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_LE(std::abs(g.angle_of(Joint::hip)[i]), 30 * kDeg);
        EXPECT_LE(g.angle_of(Joint::knee)[i], 0.0);
        EXPECT_GE(g.angle_of(Joint::knee)[i], -60 * kDeg);
        EXPECT_LE(std::abs(g.angle_of(Joint::ankle)[i]), 20 * kDeg);
      }
      EXPECT_GT(g.toe_off_pct, 50);
      EXPECT_LT(g.toe_off_pct, 75);
    }
  }
}

TEST(Synth, VelocityMatchesFiniteDifferenceOfAngle) {
  for (auto c : {Condition::noload, Condition::loaded}) {
    const auto g = synth_gait(7, c, {.samples = 10001});
    const double h = g.time_step();
    const std::size_t n = g.size();
    double worst = 0;
    for (Joint j : kJoints) {
      const auto& q = g.angle_of(j);
      const auto& v = g.velocity_of(j);
      // Fourth-order central stencil; the stride is periodic so indices wrap
      // over the duplicated endpoint.
      auto at = [&](long k) {
        const long m = static_cast<long>(n) - 1;
        return q[static_cast<std::size_t>(((k % m) + m) % m)];
      };
      for (long i = 0; i < static_cast<long>(n) - 1; ++i) {
        const double fd = (-at(i + 2) + 8 * at(i + 1) - 8 * at(i - 1) + at(i - 2)) / (12 * h);
        worst = std::max(worst, std::abs(fd - v[static_cast<std::size_t>(i)]));
      }
    }
    EXPECT_LT(worst, 1e-6);
  }
}

TEST(Phases, DefaultToeOff) {
  const auto t = phase_bounds(60);
  EXPECT_EQ(t[3].phase, GaitPhase::pre_swing);
  EXPECT_DOUBLE_EQ(t[3].start_pct, 50);
  EXPECT_DOUBLE_EQ(t[3].end_pct, 60);
  EXPECT_NEAR(t[4].end_pct, 73.333333333, 1e-8);
  EXPECT_NEAR(t[5].end_pct, 86.666666667, 1e-8);
  EXPECT_DOUBLE_EQ(t[6].end_pct, 100);
}

TEST(Phases, StanceScalesWithToeOff) {
  const auto t = phase_bounds(66);
  EXPECT_DOUBLE_EQ(t[0].start_pct, 0);
  EXPECT_NEAR(t[0].end_pct, 11, 1e-12);
  EXPECT_NEAR(t[1].end_pct, 33, 1e-12);
  EXPECT_NEAR(t[2].end_pct, 55, 1e-12);
  EXPECT_DOUBLE_EQ(t[3].end_pct, 66);
}

TEST(Phases, PartitionForRandomToeOff) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> toe(50.0, 75.0);
  std::uniform_real_distribution<double> probe(0.0, 100.0);
  for (int trial = 0; trial < 1000; ++trial) {
    double to = toe(rng);
    if (to <= 50) to = std::nextafter(50.0, 51.0);
    const auto t = phase_bounds(to);
    ASSERT_EQ(t.front().start_pct, 0.0);
    ASSERT_EQ(t.back().end_pct, 100.0);
    for (std::size_t k = 0; k < kPhaseCount; ++k) {
      ASSERT_EQ(t[k].phase, static_cast<GaitPhase>(k));
      ASSERT_LT(t[k].start_pct, t[k].end_pct);
      if (k > 0) ASSERT_EQ(t[k].start_pct, t[k - 1].end_pct);
    }
    const double p = probe(rng);
    ASSERT_EQ(std::count_if(t.begin(), t.end(), [&](const auto& iv) { return iv.contains(p); }), 1);
  }
}

TEST(Phases, RejectsToeOffOutsideRange) {
  EXPECT_THROW(phase_bounds(50), DomainError);
  EXPECT_THROW(phase_bounds(75), DomainError);
  EXPECT_THROW(phase_bounds(std::nan("")), DomainError);
}

TEST(GaitCsv, LoadsWellFormedFile) {
  TempDir dir;
  const auto g = synth_gait(3, Condition::loaded);
  write_gait_csv(g, dir / "g.csv");
  const auto back = load_gait_csv(dir / "g.csv");
  EXPECT_EQ(back.size(), 101u);
  EXPECT_EQ(back.condition, Condition::loaded);
  EXPECT_DOUBLE_EQ(back.subject_mass_kg, g.subject_mass_kg);
  EXPECT_NEAR(back.toe_off_pct, g.toe_off_pct, 1e-8);
}

TEST(GaitCsv, RoundTripPreservesPayload) {
  TempDir dir;
  write_gait_csv(synth_gait(5, Condition::noload), dir / "a.csv");
  const auto first = load_gait_csv(dir / "a.csv");
  write_gait_csv(first, dir / "b.csv");
  const auto ta = io::read_csv(dir / "a.csv");
  const auto tb = io::read_csv(dir / "b.csv");
  ASSERT_EQ(ta.header, tb.header);
  ASSERT_EQ(ta.rows.size(), tb.rows.size());
  for (std::size_t r = 0; r < ta.rows.size(); ++r) {
    for (std::size_t c = 0; c < ta.header.size(); ++c) {
      const double x = io::parse_double(ta.rows[r][c], "a");
      const double y = io::parse_double(tb.rows[r][c], "b");
      EXPECT_LE(std::abs(x - y), 1e-12 * std::max(1.0, std::abs(x)));
    }
  }
}

TEST(GaitCsv, MissingColumnIsSchemaErrorNamingIt) {
  TempDir dir;
  write_edited(dir / "g.csv", synth_gait(1, Condition::noload), [](io::CsvTable& t) {
    const auto c = t.column("knee_moment_nm_kg");
    t.header.erase(t.header.begin() + static_cast<long>(c));
    for (auto& row : t.rows) row.erase(row.begin() + static_cast<long>(c));
  });
  try {
    load_gait_csv(dir / "g.csv");
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("'knee_moment_nm_kg'"), std::string::npos) << e.what();
  }
}

TEST(GaitCsv, DuplicatePercentIsFormatError) {
  TempDir dir;
  write_edited(dir / "g.csv", synth_gait(1, Condition::noload),
               [](io::CsvTable& t) { t.rows[2][0] = t.rows[1][0]; });
  EXPECT_THROW(load_gait_csv(dir / "g.csv"), FormatError);
}

TEST(GaitCsv, NaNReportsRow) {
  TempDir dir;
  write_edited(dir / "g.csv", synth_gait(1, Condition::noload),
               [](io::CsvTable& t) { t.rows[42][t.column("ankle_vel_rad_s")] = "nan"; });
  try {
    load_gait_csv(dir / "g.csv");
    FAIL() << "expected a data error";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("row 42"), std::string::npos) << what;
    EXPECT_NE(what.find("ankle_vel_rad_s"), std::string::npos) << what;
  }
}

TEST(GaitCsv, RawMomentsAreNormalizedOnLoad) {
  TempDir dir;
  const auto g = synth_gait(2, Condition::noload);
  write_edited(dir / "g.csv", g, [&](io::CsvTable& t) {
    for (const char* col : {"hip_moment_nm_kg", "knee_moment_nm_kg", "ankle_moment_nm_kg"}) {
      const auto c = t.column(col);
      for (auto& row : t.rows) {
        row[c] = io::format_number(io::parse_double(row[c], col) * g.subject_mass_kg);
      }
    }
  });
  auto meta = io::read_key_values(gait_meta_path(dir / "g.csv"));
  meta["moment_units"] = "nm";
  io::write_key_values(gait_meta_path(dir / "g.csv"), meta);
  const auto back = load_gait_csv(dir / "g.csv");
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(back.moment_of(Joint::hip)[i], g.moment_of(Joint::hip)[i], 1e-8);
  }
}

TEST(GaitCsv, ResamplesOtherGrids) {
  TempDir dir;
  write_gait_csv(synth_gait(4, Condition::noload, {.samples = 51}), dir / "g.csv");
  const auto g = load_gait_csv(dir / "g.csv");
  EXPECT_EQ(g.size(), 101u);
  EXPECT_DOUBLE_EQ(g.pct[1], 1.0);
  EXPECT_EQ(load_gait_csv(dir / "g.csv", {.resample_to = 0}).size(), 51u);
}

TEST(Normalize, IsIdempotent) {
  auto raw = synth_gait(9, Condition::loaded);
  for (auto& m : raw.moment) {
    for (auto& v : m) v *= raw.subject_mass_kg;
  }
  raw.moment_units = MomentUnits::nm;
  const auto once = normalize_moments(raw);
  const auto twice = normalize_moments(once);
  EXPECT_EQ(once.moment, twice.moment);
  EXPECT_EQ(once.moment_units, MomentUnits::nm_per_kg);
}
