#include "exo/reactions.hpp"

#include <algorithm>
#include <cmath>

#include "exo/errors.hpp"
#include "exo/io.hpp"

namespace exo {

namespace {

struct Vec2 {
  double x = 0;
  double y = 0;
};

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
Vec2 rot90(Vec2 a) { return {-a.y, a.x}; }

// Acceleration contribution of a point at distance r along a segment with
// unit direction u rotating at (w, alpha).
Vec2 arm_acceleration(double r, Vec2 u, double w, double alpha) {
  return r * alpha * rot90(u) - (r * w * w) * u;
}

}  // namespace

ReactionSeries newton_euler_reactions(const GaitCycle& gait, const Subject& subject, const AssistSolution* sol,
                                      double gravity) {
  gait.validate();
  subject.validate();
  const std::size_t n = gait.size();
  Eigen::MatrixXd assist;
  if (sol != nullptr) {
    if (sol->samples() != n) throw DataError("assist solution and gait have different sample counts");
    for (std::size_t i = 0; i < n; ++i) {
      if (sol->pct[i] != gait.pct[i]) throw DataError("assist solution and gait use different grids");
    }
    assist = sol->joint_assist();
  }

  const auto acc = joint_accelerations(gait);
  const double body = subject.mass_kg;
  auto frac = [&](Segment s) { return subject.mass_seg_kg[static_cast<int>(s)] / body; };
  auto len = [&](Segment s) { return subject.length_m[static_cast<int>(s)]; };
  auto com = [&](Segment s) { return subject.com_m[static_cast<int>(s)]; };
  const Vec2 g{0, -gravity};

  ReactionSeries out;
  out.pct = gait.pct;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Absolute segment angles and their rates.
    const double ph = gait.angle[0][i];
    const double ps = ph + gait.angle[1][i];
    const double pf = ps + gait.angle[2][i];
    const double wh = gait.velocity[0][i];
    const double ws = wh + gait.velocity[1][i];
    const double wf = ws + gait.velocity[2][i];
    const double ah = acc[0][i];
    const double as = ah + acc[1][i];
    const double af = as + acc[2][i];

    // Thigh and shank point down the leg at zero angle; the foot points forward.
    const Vec2 ut{std::sin(ph), -std::cos(ph)};
    const Vec2 us{std::sin(ps), -std::cos(ps)};
    const Vec2 uf{std::cos(pf), std::sin(pf)};

    const Vec2 knee_acc = arm_acceleration(len(Segment::thigh), ut, wh, ah);
    const Vec2 ankle_acc = knee_acc + arm_acceleration(len(Segment::shank), us, ws, as);
    const Vec2 a_thigh = arm_acceleration(com(Segment::thigh), ut, wh, ah);
    const Vec2 a_shank = knee_acc + arm_acceleration(com(Segment::shank), us, ws, as);
    const Vec2 a_foot = ankle_acc + arm_acceleration(com(Segment::foot), uf, wf, af);

    const Vec2 grf{gait.grf_x[i], gait.grf_y[i]};
    const Vec2 f_ankle = grf + frac(Segment::foot) * (g - a_foot);
    const Vec2 f_knee = f_ankle + frac(Segment::shank) * (g - a_shank);
    const Vec2 f_hip = f_knee + frac(Segment::thigh) * (g - a_thigh);

    auto& s = out.samples[i];
    s[static_cast<int>(Joint::ankle)] = {f_ankle.x, f_ankle.y, gait.moment[2][i]};
    s[static_cast<int>(Joint::knee)] = {f_knee.x, f_knee.y, gait.moment[1][i]};
    s[static_cast<int>(Joint::hip)] = {f_hip.x, f_hip.y, gait.moment[0][i]};
    if (sol != nullptr) {
      for (std::size_t j = 0; j < kJointCount; ++j) {
        s[j].mz -= assist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / gait.subject_mass_kg;
      }
    }
  }
  return out;
}

std::string_view to_string(LoadComponent c) {
  switch (c) {
    case LoadComponent::fx: return "fx";
    case LoadComponent::fy: return "fy";
    case LoadComponent::mz: return "mz";
  }
  return "?";
}

double component(const JointLoad& load, LoadComponent c) {
  switch (c) {
    case LoadComponent::fx: return load.fx;
    case LoadComponent::fy: return load.fy;
    case LoadComponent::mz: return load.mz;
  }
  return 0;
}

std::vector<PeakReduction> peak_reduction(const ReactionSeries& assisted, const ReactionSeries& unassisted,
                                          const PhaseTable& phases) {
  if (assisted.size() != unassisted.size() || assisted.samples.size() != assisted.size() ||
      unassisted.samples.size() != unassisted.size()) {
    throw DataError("reaction series have different lengths");
  }
  for (std::size_t i = 0; i < assisted.size(); ++i) {
    if (assisted.pct[i] != unassisted.pct[i]) throw DataError("reaction series use different grids");
  }
  std::vector<PeakReduction> out;
  for (Joint j : kJoints) {
    for (LoadComponent c : kLoadComponents) {
      for (const auto& ph : phases) {
        double pa = 0, pu = 0;
        bool any = false;
        for (std::size_t i = 0; i < assisted.size(); ++i) {
          // The closing sample at 100 % belongs to the last phase.
          const double t = assisted.pct[i];
          const bool inside = ph.contains(t) || (ph.phase == GaitPhase::terminal_swing && t >= ph.end_pct);
          if (!inside) continue;
          any = true;
          pa = std::max(pa, std::abs(component(assisted.samples[i][static_cast<int>(j)], c)));
          pu = std::max(pu, std::abs(component(unassisted.samples[i][static_cast<int>(j)], c)));
        }
        PeakReduction r{j, c, ph.phase, std::nullopt};
        if (any && pu > 0) r.percent = 100 * (pu - pa) / pu;
        out.push_back(r);
      }
    }
  }
  return out;
}

namespace {

constexpr std::array<Joint, kJointCount> kCsvJointOrder{Joint::ankle, Joint::knee, Joint::hip};

}  // namespace

std::vector<std::string> reaction_csv_header() {
  std::vector<std::string> h{"pct"};
  for (Joint j : kCsvJointOrder) {
    const std::string p(to_string(j));
    h.push_back(p + "_fx_n_kg");
    h.push_back(p + "_fy_n_kg");
    h.push_back(p + "_mz_nm_kg");
  }
  return h;
}

void write_reactions_csv(const ReactionSeries& series, const std::filesystem::path& path) {
  io::CsvTable t;
  t.header = reaction_csv_header();
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::vector<std::string> row{io::format_number(series.pct[i])};
    for (Joint j : kCsvJointOrder) {
      const auto& l = series.samples[i][static_cast<int>(j)];
      row.push_back(io::format_number(l.fx));
      row.push_back(io::format_number(l.fy));
      row.push_back(io::format_number(l.mz));
    }
    t.rows.push_back(std::move(row));
  }
  io::write_csv(path, t);
}

ReactionSeries load_reactions_csv(const std::filesystem::path& path) {
  const auto t = io::read_csv(path);
  const auto header = reaction_csv_header();
  std::vector<std::size_t> cols;
  for (const auto& h : header) cols.push_back(t.column(h));
  ReactionSeries s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    auto value = [&](std::size_t k) { return io::parse_double(t.rows[r][cols[k]], where); };
    s.pct.push_back(value(0));
    ReactionSample sample{};
    for (std::size_t k = 0; k < kCsvJointOrder.size(); ++k) {
      auto& l = sample[static_cast<int>(kCsvJointOrder[k])];
      l = {value(1 + 3 * k), value(2 + 3 * k), value(3 + 3 * k)};
    }
    s.samples.push_back(sample);
  }
  return s;
}

}  // namespace exo
