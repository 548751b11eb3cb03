#include "exo/gait.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "exo/errors.hpp"
#include "exo/io.hpp"

namespace exo {

std::string_view to_string(Condition c) {
  return c == Condition::noload ? "noload" : "loaded";
}

Condition parse_condition(std::string_view text) {
  if (text == "noload") return Condition::noload;
  if (text == "loaded") return Condition::loaded;
  throw ConfigError("unknown condition '" + std::string(text) + "' (expected noload or loaded)");
}

std::string_view to_string(Joint j) {
  switch (j) {
    case Joint::hip: return "hip";
    case Joint::knee: return "knee";
    case Joint::ankle: return "ankle";
  }
  return "?";
}

std::string_view to_string(GaitPhase p) {
  switch (p) {
    case GaitPhase::loading_response: return "loading_response";
    case GaitPhase::mid_stance: return "mid_stance";
    case GaitPhase::terminal_stance: return "terminal_stance";
    case GaitPhase::pre_swing: return "pre_swing";
    case GaitPhase::initial_swing: return "initial_swing";
    case GaitPhase::mid_swing: return "mid_swing";
    case GaitPhase::terminal_swing: return "terminal_swing";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Subject

double Subject::inertia_com(Segment s) const {
  const auto i = static_cast<int>(s);
  return inertia_proximal[i] - mass_seg_kg[i] * com_m[i] * com_m[i];
}

void Subject::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0; };
  if (!positive(mass_kg) || !positive(height_m)) {
    throw DomainError("subject mass and height must be positive");
  }
  for (std::size_t i = 0; i < kSegmentCount; ++i) {
    if (!positive(length_m[i]) || !positive(mass_seg_kg[i]) || !positive(inertia_proximal[i]) ||
        !(com_m[i] >= 0)) {
      throw DomainError("subject segment parameters must be positive");
    }
  }
  if (!positive(unloaded_leg_inertia)) throw DomainError("unloaded leg inertia must be positive");
}

Subject Subject::from_anthropometry(double mass_kg, double height_m) {
  constexpr std::array<double, kSegmentCount> kMassFrac{0.0145, 0.0465, 0.100};
  constexpr std::array<double, kSegmentCount> kLengthFrac{0.152, 0.246, 0.245};
  constexpr std::array<double, kSegmentCount> kComFrac{0.5, 0.433, 0.433};
  constexpr std::array<double, kSegmentCount> kGyrationFrac{0.475, 0.302, 0.323};

  Subject s;
  s.mass_kg = mass_kg;
  s.height_m = height_m;
  for (std::size_t i = 0; i < kSegmentCount; ++i) {
    s.length_m[i] = kLengthFrac[i] * height_m;
    s.mass_seg_kg[i] = kMassFrac[i] * mass_kg;
    s.com_m[i] = kComFrac[i] * s.length_m[i];
    const double rg = kGyrationFrac[i] * s.length_m[i];
    s.inertia_proximal[i] = s.mass_seg_kg[i] * (rg * rg + s.com_m[i] * s.com_m[i]);
  }
  const auto foot = static_cast<int>(Segment::foot);
  const auto shank = static_cast<int>(Segment::shank);
  const auto thigh = static_cast<int>(Segment::thigh);

  // Extended leg hanging from the hip; the foot CoM sits below the ankle and
  // forward along the foot.
  const double knee_depth = s.length_m[thigh];
  const double ankle_depth = knee_depth + s.length_m[shank];
  const double shank_com = knee_depth + s.com_m[shank];
  const double foot_dist2 = ankle_depth * ankle_depth + s.com_m[foot] * s.com_m[foot];
  s.unloaded_leg_inertia = s.inertia_proximal[thigh] + s.inertia_com(Segment::shank) +
                           s.mass_seg_kg[shank] * shank_com * shank_com +
                           s.inertia_com(Segment::foot) + s.mass_seg_kg[foot] * foot_dist2;
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// GaitCycle

double GaitCycle::time_step() const {
  if (pct.size() < 2) throw DataError("gait cycle needs at least two samples");
  return stride_s * (pct[1] - pct[0]) / 100.0;
}

void GaitCycle::validate() const {
  const std::size_t n = pct.size();
  if (n < 3) throw DataError("gait cycle needs at least three samples");
  auto check_len = [n](const std::vector<double>& v, std::string_view name) {
    if (v.size() != n) {
      throw DataError("trajectory '" + std::string(name) + "' has " + std::to_string(v.size()) +
                      " samples, expected " + std::to_string(n));
    }
  };
  for (auto j : kJoints) {
    const auto i = static_cast<int>(j);
    check_len(angle[i], std::string(to_string(j)) + " angle");
    check_len(velocity[i], std::string(to_string(j)) + " velocity");
    check_len(moment[i], std::string(to_string(j)) + " moment");
  }
  check_len(grf_x, "grf_x");
  check_len(grf_y, "grf_y");
  for (std::size_t k = 1; k < n; ++k) {
    if (!(pct[k] > pct[k - 1])) {
      throw FormatError("percent grid is not strictly increasing at row " + std::to_string(k));
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    bool finite = std::isfinite(pct[k]) && std::isfinite(grf_x[k]) && std::isfinite(grf_y[k]);
    for (std::size_t j = 0; j < kJointCount; ++j) {
      finite = finite && std::isfinite(angle[j][k]) && std::isfinite(velocity[j][k]) &&
               std::isfinite(moment[j][k]);
    }
    if (!finite) throw DataError("non-finite value in gait data at row " + std::to_string(k));
  }
  if (!(toe_off_pct > 50 && toe_off_pct < 75)) {
    throw DataError("toe-off " + io::format_number(toe_off_pct) + "% outside (50, 75)");
  }
  if (!(stride_s > 0) || !(subject_mass_kg > 0)) {
    throw DataError("stride duration and subject mass must be positive");
  }
}

GaitCycle normalize_moments(GaitCycle gait) {
  if (gait.moment_units == MomentUnits::nm_per_kg) return gait;
  for (auto& m : gait.moment) {
    for (auto& v : m) v /= gait.subject_mass_kg;
  }
  gait.moment_units = MomentUnits::nm_per_kg;
  return gait;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr std::array<std::string_view, 12> kColumns{
    "pct",           "hip_angle_rad",     "knee_angle_rad",    "ankle_angle_rad",
    "hip_vel_rad_s", "knee_vel_rad_s",    "ankle_vel_rad_s",   "hip_moment_nm_kg",
    "knee_moment_nm_kg", "ankle_moment_nm_kg", "grf_x_n_kg",   "grf_y_n_kg"};

template <class G>
auto* column_target(G& g, std::size_t c) {
  switch (c) {
    case 0: return &g.pct;
    case 1: case 2: case 3: return &g.angle[c - 1];
    case 4: case 5: case 6: return &g.velocity[c - 4];
    case 7: case 8: case 9: return &g.moment[c - 7];
    case 10: return &g.grf_x;
    default: return &g.grf_y;
  }
}

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::string& require_key(const io::KeyValues& kv, const std::string& key,
                               const std::filesystem::path& origin) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    throw SchemaError(origin.string() + ": missing metadata key '" + key + "'");
  }
  return it->second;
}

}  // namespace

std::filesystem::path gait_meta_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta");
  return p;
}

GaitCycle load_gait_csv(const std::filesystem::path& path, const GaitLoadOptions& options) {
  const io::CsvTable table = io::read_csv(path);
  std::array<std::size_t, kColumns.size()> idx{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    if (!table.has_column(kColumns[c])) {
      throw SchemaError(path.string() + ": missing column '" + std::string(kColumns[c]) + "'");
    }
    idx[c] = table.column(kColumns[c]);
  }

  GaitCycle g;
  for (std::size_t c = 0; c < kColumns.size(); ++c) column_target(g, c)->reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      const double v = io::parse_double(table.rows[r][idx[c]],
                                        path.string() + " row " + std::to_string(r));
      if (std::isnan(v)) {
        throw DataError(path.string() + ": NaN in column '" + std::string(kColumns[c]) +
                        "' at row " + std::to_string(r));
      }
      column_target(g, c)->push_back(v);
    }
  }
  for (std::size_t r = 1; r < g.pct.size(); ++r) {
    if (!(g.pct[r] > g.pct[r - 1])) {
      throw FormatError(path.string() + ": percent grid not strictly increasing at row " +
                        std::to_string(r));
    }
  }

  const auto meta_path = gait_meta_path(path);
  const io::KeyValues meta = io::read_key_values(meta_path);
  g.subject_mass_kg = io::parse_double(require_key(meta, "subject_mass_kg", meta_path), "subject_mass_kg");
  g.toe_off_pct = io::parse_double(require_key(meta, "toe_off_pct", meta_path), "toe_off_pct");
  g.stride_s = io::parse_double(require_key(meta, "stride_s", meta_path), "stride_s");
  g.condition = parse_condition(require_key(meta, "condition", meta_path));

  if (const auto it = meta.find("moment_units"); it != meta.end()) {
    if (it->second == "nm") {
      g.moment_units = MomentUnits::nm;
    } else if (it->second != "nm_kg") {
      throw SchemaError(meta_path.string() + ": moment_units must be nm or nm_kg");
    }
  }
  g = normalize_moments(std::move(g));
  g.validate();
  if (options.resample_to != 0 && g.size() != options.resample_to) {
    g = resample(g, options.resample_to);
  }
  return g;
}

void write_gait_csv(const GaitCycle& gait, const std::filesystem::path& path) {
  gait.validate();
  if (gait.moment_units != MomentUnits::nm_per_kg) {
    throw DataError("normalize moments before writing a gait CSV");
  }
  io::CsvTable t;
  for (auto c : kColumns) t.header.emplace_back(c);
  for (std::size_t r = 0; r < gait.size(); ++r) {
    std::vector<std::string> row;
    row.reserve(kColumns.size());
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      row.push_back(io::format_number((*column_target(gait, c))[r]));
    }
    t.rows.push_back(std::move(row));
  }
  io::write_csv(path, t);

  io::KeyValues meta;
  meta["condition"] = std::string(to_string(gait.condition));
  meta["moment_units"] = "nm_kg";
  meta["stride_s"] = full_precision(gait.stride_s);
  meta["subject_mass_kg"] = full_precision(gait.subject_mass_kg);
  meta["toe_off_pct"] = full_precision(gait.toe_off_pct);
  io::write_key_values(gait_meta_path(path), meta);
}

// ---------------------------------------------------------------------------
// Resampling and derivatives

namespace {

std::vector<double> interpolate(const std::vector<double>& x, const std::vector<double>& y,
                                const std::vector<double>& xq) {
  std::vector<double> out(xq.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < xq.size(); ++i) {
    const double q = std::clamp(xq[i], x.front(), x.back());
    while (k + 2 < x.size() && x[k + 1] < q) ++k;
    const double t = (q - x[k]) / (x[k + 1] - x[k]);
    out[i] = y[k] + t * (y[k + 1] - y[k]);
  }
  return out;
}

std::vector<double> derivative(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2 * h);
  d[0] = (-3 * y[0] + 4 * y[1] - y[2]) / (2 * h);
  d[n - 1] = (3 * y[n - 1] - 4 * y[n - 2] + y[n - 3]) / (2 * h);
  return d;
}

}  // namespace

GaitCycle resample(const GaitCycle& gait, std::size_t samples) {
  if (samples < 3) throw DomainError("resampling needs at least three samples");
  GaitCycle out = gait;
  const double a = gait.pct.front();
  const double b = gait.pct.back();
  std::vector<double> grid(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(samples - 1);
  }
  for (std::size_t j = 0; j < kJointCount; ++j) {
    out.angle[j] = interpolate(gait.pct, gait.angle[j], grid);
    out.velocity[j] = interpolate(gait.pct, gait.velocity[j], grid);
    out.moment[j] = interpolate(gait.pct, gait.moment[j], grid);
  }
  out.grf_x = interpolate(gait.pct, gait.grf_x, grid);
  out.grf_y = interpolate(gait.pct, gait.grf_y, grid);
  out.pct = std::move(grid);
  return out;
}

std::array<std::vector<double>, kJointCount> joint_accelerations(const GaitCycle& gait) {
  const double h = gait.time_step();
  std::array<std::vector<double>, kJointCount> acc;
  for (std::size_t j = 0; j < kJointCount; ++j) acc[j] = derivative(gait.velocity[j], h);
  return acc;
}

// ---------------------------------------------------------------------------
// Synthetic gait

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kBaseToeOff = 0.60;
constexpr double kLoadAddedMass = 38.0;
constexpr double kLoadedMomentScale = 1.35;

// Angle curves as a0 + sum_h (a_h cos(2 pi h s) + b_h sin(2 pi h s)), rad,
// shaped after normative adult sagittal walking curves.
struct Harmonics {
  double a0;
  std::array<double, 3> a;
  std::array<double, 3> b;
};
constexpr std::array<Harmonics, kJointCount> kAngleHarmonics{{
    {0.1800, {0.3567, -0.0793, -0.0080}, {-0.0469, -0.0213, 0.0051}},
    {-0.3400, {0.0228, 0.2531, 0.0076}, {0.3033, -0.1066, -0.0596}},
    {-0.0139, {-0.0302, 0.0390, -0.0363}, {0.0763, -0.1484, 0.0178}},
}};

// Periodic Gaussian bumps: amplitude (N m/kg), centre and width in stride fraction.
struct Bump {
  double amplitude;
  double centre;
  double width;
};
constexpr std::array<Bump, 3> kHipMoment{{{-0.60, 0.07, 0.06}, {0.70, 0.48, 0.10}, {-0.25, 0.94, 0.04}}};
constexpr std::array<Bump, 4> kKneeMoment{
    {{0.55, 0.13, 0.05}, {-0.25, 0.38, 0.07}, {0.15, 0.56, 0.035}, {-0.25, 0.92, 0.04}}};
constexpr std::array<Bump, 3> kAnkleMoment{{{0.08, 0.04, 0.02}, {-0.60, 0.30, 0.08}, {-1.20, 0.49, 0.055}}};

template <std::size_t N>
double bumps(const std::array<Bump, N>& set, double s) {
  double v = 0;
  for (const auto& b : set) {
    for (int k = -1; k <= 1; ++k) {
      const double d = s - b.centre + k;
      v += b.amplitude * std::exp(-d * d / (2 * b.width * b.width));
    }
  }
  return v;
}

// Uniform in [lo, hi) from the raw 64-bit engine output, so the stream is the
// same on every standard library.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

// Smooth periodic time warp s = phi - eps sin(2 pi phi); stretches stance when eps < 0.
struct Warp {
  double eps;
  double operator()(double phi) const { return phi - eps * std::sin(kTwoPi * phi); }
  double slope(double phi) const { return 1 - kTwoPi * eps * std::cos(kTwoPi * phi); }
  double inverse(double s) const {
    double phi = s;
    for (int it = 0; it < 50; ++it) phi -= ((*this)(phi) - s) / slope(phi);
    return phi;
  }
};

}  // namespace

GaitCycle synth_gait(std::uint64_t seed, Condition condition, const SynthOptions& options) {
  if (options.samples < 3) throw DomainError("synthetic gait needs at least three samples");
  std::mt19937_64 rng(seed);
  std::array<double, kJointCount> amp{};
  for (auto& a : amp) a = uniform(rng, 0.97, 1.03);
  const double moment_jitter = uniform(rng, 0.97, 1.03);
  const double stride_jitter = uniform(rng, 0.97, 1.03);
  const double warp_jitter = uniform(rng, -0.003, 0.003);

  const bool loaded = condition == Condition::loaded;
  // Loaded walking stretches stance by roughly 1.5 % of the stride.
  const Warp warp{(loaded ? -0.0225 : 0.0) + warp_jitter};
  const double moment_scale = (loaded ? kLoadedMomentScale : 1.0) * moment_jitter;
  const double grf_scale =
      loaded ? (options.subject_mass_kg + kLoadAddedMass) / options.subject_mass_kg : 1.0;

  GaitCycle g;
  g.condition = condition;
  g.subject_mass_kg = options.subject_mass_kg;
  g.stride_s = (loaded ? 1.14 : 1.10) * stride_jitter;
  g.toe_off_pct = 100 * warp.inverse(kBaseToeOff);

  const std::size_t n = options.samples;
  g.pct.resize(n);
  for (auto& v : g.angle) v.resize(n);
  for (auto& v : g.velocity) v.resize(n);
  for (auto& v : g.moment) v.resize(n);
  g.grf_x.resize(n);
  g.grf_y.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double phi = static_cast<double>(i) / static_cast<double>(n - 1);
    g.pct[i] = 100 * phi;
    const double s = warp(phi);
    const double ds_dt = warp.slope(phi) / g.stride_s;

    for (std::size_t j = 0; j < kJointCount; ++j) {
      const auto& h = kAngleHarmonics[j];
      double q = h.a0;
      double dq_ds = 0;
      for (int k = 0; k < 3; ++k) {
        const double w = kTwoPi * (k + 1);
        q += h.a[k] * std::cos(w * s) + h.b[k] * std::sin(w * s);
        dq_ds += w * (-h.a[k] * std::sin(w * s) + h.b[k] * std::cos(w * s));
      }
      g.angle[j][i] = amp[j] * q;
      g.velocity[j][i] = amp[j] * dq_ds * ds_dt;
    }

    g.moment[0][i] = moment_scale * bumps(kHipMoment, s);
    g.moment[1][i] = moment_scale * bumps(kKneeMoment, s);
    g.moment[2][i] = moment_scale * bumps(kAnkleMoment, s);

    if (s < kBaseToeOff) {
      const double u = s / kBaseToeOff;
      const double pi = std::numbers::pi;
      g.grf_y[i] = grf_scale * kGravity * 1.2 * (std::sin(pi * u) + 0.35 * std::sin(3 * pi * u));
      g.grf_x[i] = -grf_scale * 1.8 * std::sin(kTwoPi * u);
    } else {
      g.grf_y[i] = 0;
      g.grf_x[i] = 0;
    }
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Phases

PhaseTable phase_bounds(double toe_off_pct) {
  if (!(toe_off_pct > 50 && toe_off_pct < 75)) {
    throw DomainError("toe-off " + io::format_number(toe_off_pct) + "% outside (50, 75)");
  }
  const double k = toe_off_pct / 60.0;
  const double swing = (100.0 - toe_off_pct) / 3.0;
  return PhaseTable{{
      {GaitPhase::loading_response, 0.0, 10.0 * k},
      {GaitPhase::mid_stance, 10.0 * k, 30.0 * k},
      {GaitPhase::terminal_stance, 30.0 * k, 50.0 * k},
      {GaitPhase::pre_swing, 50.0 * k, toe_off_pct},
      {GaitPhase::initial_swing, toe_off_pct, toe_off_pct + swing},
      {GaitPhase::mid_swing, toe_off_pct + swing, toe_off_pct + 2 * swing},
      {GaitPhase::terminal_swing, toe_off_pct + 2 * swing, 100.0},
  }};
}

}  // namespace exo
