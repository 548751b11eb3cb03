#include "exo/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <json.hpp>
#include <map>
#include <thread>

#include "exo/reactions.hpp"
#include "exo/stats.hpp"
#include "exo/svg.hpp"

namespace exo {

namespace {

const std::vector<std::string> kConfigKeys{
    "gait_noload", "gait_loaded",      "muscles",    "variants",       "conditions", "regen_eta",
    "muscle_tendon_eta", "beta",       "gamma",      "out",            "seed",       "subject_height_m",
    "exo_weight",  "reserve_weight",   "c_act",      "threads"};

double config_number(const io::KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return io::parse_double(it->second, key);
  } catch (const Error&) {
    throw ConfigError("config key '" + key + "': '" + it->second + "' is not a number");
  }
}

template <std::size_t N>
std::array<double, N> config_list(const io::KeyValues& kv, const std::string& key, const std::array<double, N>& fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const auto parts = io::split(it->second, ',');
  if (parts.size() != N) {
    throw ConfigError("config key '" + key + "' needs " + std::to_string(N) + " comma-separated values");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    try {
      out[i] = io::parse_double(io::trim(parts[i]), key);
    } catch (const Error&) {
      throw ConfigError("config key '" + key + "': '" + parts[i] + "' is not a number");
    }
  }
  return out;
}

std::string join_numbers(const auto& values) {
  std::string s;
  for (double v : values) s += (s.empty() ? "" : ",") + io::format_number(v);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void RunConfig::validate() const {
  auto must_exist = [](const std::optional<std::filesystem::path>& p, const char* key) {
    if (p && !std::filesystem::exists(*p)) {
      throw ConfigError("config key '" + std::string(key) + "': file '" + p->string() + "' does not exist");
    }
  };
  must_exist(gait_noload, "gait_noload");
  must_exist(gait_loaded, "gait_loaded");
  must_exist(muscles, "muscles");
  if (variants.empty()) throw ConfigError("config key 'variants' lists no variant");
  if (conditions.empty()) throw ConfigError("config key 'conditions' lists no condition");
  if (!(overlay.regen_eta >= 0 && overlay.regen_eta <= kMaxRegenEta)) {
    throw ConfigError("config key 'regen_eta' must lie in [0, 0.65]");
  }
  if (!(overlay.muscle_tendon_eta > 0)) throw ConfigError("config key 'muscle_tendon_eta' must be positive");
  for (double b : overlay.beta) {
    if (!(b > 0)) throw ConfigError("config key 'beta' must hold positive values");
  }
  for (double g : overlay.gamma) {
    if (!(g > 0)) throw ConfigError("config key 'gamma' must hold positive values");
  }
  if (!(subject_height_m > 0)) throw ConfigError("config key 'subject_height_m' must be positive");
  if (!(exo_weight > 0)) throw ConfigError("config key 'exo_weight' must be positive");
  if (!(reserve_weight > 0)) throw ConfigError("config key 'reserve_weight' must be positive");
  if (!(c_act > 0)) throw ConfigError("config key 'c_act' must be positive");
  if (out.empty()) throw ConfigError("config key 'out' is empty");
}

io::KeyValues RunConfig::to_key_values() const {
  io::KeyValues kv;
  if (gait_noload) kv["gait_noload"] = gait_noload->string();
  if (gait_loaded) kv["gait_loaded"] = gait_loaded->string();
  if (muscles) kv["muscles"] = muscles->string();
  std::string v, c;
  for (auto x : variants) v += (v.empty() ? "" : ",") + std::string(to_string(x));
  for (auto x : conditions) c += (c.empty() ? "" : ",") + std::string(to_string(x));
  kv["variants"] = v;
  kv["conditions"] = c;
  kv["regen_eta"] = io::format_number(overlay.regen_eta);
  kv["muscle_tendon_eta"] = io::format_number(overlay.muscle_tendon_eta);
  kv["beta"] = join_numbers(overlay.beta);
  kv["gamma"] = join_numbers(overlay.gamma);
  kv["out"] = out.string();
  kv["seed"] = std::to_string(seed);
  kv["subject_height_m"] = io::format_number(subject_height_m);
  kv["exo_weight"] = io::format_number(exo_weight);
  kv["reserve_weight"] = io::format_number(reserve_weight);
  kv["c_act"] = io::format_number(c_act);
  return kv;
}

RunConfig parse_run_config(const io::KeyValues& kv, const std::filesystem::path& base) {
  for (const auto& [key, value] : kv) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  auto path_of = [&](const char* key) -> std::optional<std::filesystem::path> {
    const auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) return std::nullopt;
    std::filesystem::path p = it->second;
    return p.is_relative() && !base.empty() ? base / p : p;
  };
  RunConfig c;
  c.gait_noload = path_of("gait_noload");
  c.gait_loaded = path_of("gait_loaded");
  c.muscles = path_of("muscles");
  if (auto o = path_of("out")) c.out = *o;
  if (auto it = kv.find("variants"); it != kv.end()) {
    c.variants.clear();
    for (const auto& part : io::split(it->second, ',')) {
      try {
        c.variants.push_back(parse_variant(io::trim(part)));
      } catch (const Error& e) {
        throw ConfigError("config key 'variants': " + std::string(e.what()));
      }
    }
  }
  if (auto it = kv.find("conditions"); it != kv.end()) {
    c.conditions.clear();
    for (const auto& part : io::split(it->second, ',')) {
      try {
        c.conditions.push_back(parse_condition(io::trim(part)));
      } catch (const Error& e) {
        throw ConfigError("config key 'conditions': " + std::string(e.what()));
      }
    }
    std::sort(c.conditions.begin(), c.conditions.end());
    c.conditions.erase(std::unique(c.conditions.begin(), c.conditions.end()), c.conditions.end());
  }
  c.overlay.regen_eta = config_number(kv, "regen_eta", c.overlay.regen_eta);
  c.overlay.muscle_tendon_eta = config_number(kv, "muscle_tendon_eta", c.overlay.muscle_tendon_eta);
  c.overlay.beta = config_list(kv, "beta", c.overlay.beta);
  c.overlay.gamma = config_list(kv, "gamma", c.overlay.gamma);
  if (auto it = kv.find("seed"); it != kv.end()) {
    try {
      std::size_t used = 0;
      if (it->second.empty() || !std::isdigit(static_cast<unsigned char>(it->second[0]))) {
        throw std::invalid_argument("sign");
      }
      c.seed = std::stoull(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw ConfigError("config key 'seed': '" + it->second + "' is not a non-negative integer");
    }
  }
  c.subject_height_m = config_number(kv, "subject_height_m", c.subject_height_m);
  c.exo_weight = config_number(kv, "exo_weight", c.exo_weight);
  c.reserve_weight = config_number(kv, "reserve_weight", c.reserve_weight);
  c.c_act = config_number(kv, "c_act", c.c_act);
  const double threads = config_number(kv, "threads", c.threads);
  if (!(threads >= 0 && threads <= 256) || threads != std::floor(threads)) {
    throw ConfigError("config key 'threads' must be an integer in [0, 256]");
  }
  c.threads = static_cast<unsigned>(threads);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(io::read_key_values(path), path.parent_path());
}

GaitCycle config_gait(const RunConfig& config, Condition condition) {
  const auto& file = condition == Condition::noload ? config.gait_noload : config.gait_loaded;
  if (file) {
    GaitCycle g = load_gait_csv(*file);
    if (g.condition != condition) {
      throw ConfigError("config key 'gait_" + std::string(to_string(condition)) + "': file declares condition '" +
                        std::string(to_string(g.condition)) + "'");
    }
    return g;
  }
  return synth_gait(config.seed, condition);
}

// ---------------------------------------------------------------------------
// Tables

std::vector<std::string> points_csv_header() {
  auto h = io::split(kFrontCsvHeader, ',');
  for (const char* extra : {"regen_power_w_kg", "gross_metabolic_rate_w_kg", "unassisted_metabolic_rate_w_kg",
                            "pos_power_w_kg", "maf_w_kg", "max_balance_residual_nm"}) {
    h.emplace_back(extra);
  }
  return h;
}

void write_points_csv(const std::vector<DesignPoint>& points, const std::vector<double>& maf_values, double regen_eta,
                      const std::filesystem::path& path) {
  if (maf_values.size() != points.size()) throw DataError("one MAF value per point is required");
  io::CsvTable t;
  t.header = points_csv_header();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const auto& r = p.report;
    t.rows.push_back({p.label, std::string(to_string(p.design.variant)), std::string(to_string(p.condition)),
                      io::format_number(p.design.hip_peak_nm), io::format_number(p.design.knee_peak_nm),
                      io::format_number(r.metabolic_reduction_pct), io::format_number(r.abs_power_w_kg),
                      io::format_number(r.hip_abs_power_w_kg), io::format_number(r.knee_abs_power_w_kg),
                      io::format_number(r.neg_power_w_kg), io::format_number(r.max_pos_power_w_kg),
                      io::format_number(regen_adjust(r, regen_eta)), io::format_number(r.gross_metabolic_rate_w_kg),
                      io::format_number(r.unassisted_metabolic_rate_w_kg), io::format_number(r.pos_power_w_kg),
                      io::format_number(maf_values[i]), io::format_number(p.max_balance_residual)});
  }
  io::write_csv(path, t);
}

std::vector<DesignPoint> load_points_csv(const std::filesystem::path& path, double thigh_length_m) {
  const auto t = io::read_csv(path);
  const auto header = points_csv_header();
  std::vector<std::size_t> c;
  for (const auto& h : header) c.push_back(t.column(h));
  std::vector<DesignPoint> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    auto num = [&](std::size_t k) { return io::parse_double(row[c[k]], where); };
    DesignPoint p;
    p.label = row[c[0]];
    p.condition = parse_condition(row[c[2]]);
    p.design = reference_design(parse_variant(row[c[1]]), num(3), num(4), thigh_length_m);
    if (p.label != p.design.label()) throw DataError(where + ": label '" + p.label + "' does not match the peaks");
    auto& rep = p.report;
    rep.metabolic_reduction_pct = num(5);
    rep.abs_power_w_kg = num(6);
    rep.hip_abs_power_w_kg = num(7);
    rep.knee_abs_power_w_kg = num(8);
    rep.neg_power_w_kg = num(9);
    rep.max_pos_power_w_kg = num(10);
    rep.gross_metabolic_rate_w_kg = num(12);
    rep.unassisted_metabolic_rate_w_kg = num(13);
    rep.pos_power_w_kg = num(14);
    p.max_balance_residual = num(16);
    p.reduction_pct = rep.metabolic_reduction_pct;
    p.power_w_kg = rep.abs_power_w_kg;
    out.push_back(std::move(p));
  }
  return out;
}

std::string error_json(const std::string& kind, const std::string& message, int exit_code) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = exit_code;
  return j.dump(2) + "\n";
}

std::string error_json(const Error& e) { return error_json(e.kind_name(), e.what(), e.exit_code()); }

// ---------------------------------------------------------------------------
// Pipeline

namespace {

struct Group {
  ExoVariant variant;
  Condition condition;
  SweepResult sweep;
  DesignPoint ideal;
  AssistSolution ideal_solution;
};

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  std::vector<double> v(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, c);
  return v;
}

std::string group_name(ExoVariant v, Condition c) {
  return std::string(to_string(v)) + " " + std::string(to_string(c));
}

}  // namespace

PipelineSummary run_pipeline(const RunConfig& config) {
  config.validate();
  PipelineSummary summary;
  summary.out = config.out;
  const MuscleSet muscles = config.muscles ? load_muscles_csv(*config.muscles) : default_muscles();

  std::map<Condition, GaitCycle> gaits;
  for (Condition c : config.conditions) gaits.emplace(c, config_gait(config, c));
  const double body_mass = gaits.begin()->second.subject_mass_kg;
  for (const auto& [c, g] : gaits) {
    if (g.subject_mass_kg != body_mass) throw DataError("all gait files must describe the same subject mass");
  }
  const Subject subject = Subject::from_anthropometry(body_mass, config.subject_height_m);
  const double thigh = subject.length_m[static_cast<int>(Segment::thigh)];

  SweepOptions sweep_options;
  sweep_options.cycle.exo_weight = config.exo_weight;
  sweep_options.cycle.reserve_weight = config.reserve_weight;
  sweep_options.thigh_length_m = thigh;
  sweep_options.c_act = config.c_act;
  const SurrogateMetabolicModel model(config.c_act);
  sweep_options.threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;

  std::map<Condition, ReactionSeries> reactions_unassisted;
  for (const auto& [c, g] : gaits) {
    reactions_unassisted.emplace(c, newton_euler_reactions(g, subject));
  }

  std::vector<Group> groups;
  for (ExoVariant v : config.variants) {
    for (const auto& [c, g] : gaits) {
      Group grp{v, c, sweep(g, muscles, v, sweep_options), {}, {}};
      grp.ideal_solution = solve_cycle(g, muscles, ideal_design(v), sweep_options.cycle);
      grp.ideal.label = "ideal";
      grp.ideal.design = ideal_design(v);
      grp.ideal.condition = c;
      grp.ideal.report = energy_report(grp.ideal_solution, grp.sweep.unassisted_rate_w_kg, model);
      grp.ideal.reduction_pct = grp.ideal.report.metabolic_reduction_pct;
      grp.ideal.power_w_kg = grp.ideal.report.abs_power_w_kg;
      grp.ideal.torque_profile = grp.ideal_solution.exo_torque;
      grp.ideal.power_profile = actuator_power(grp.ideal_solution);
      groups.push_back(std::move(grp));
    }
  }

  std::filesystem::create_directories(config.out);
  auto out_path = [&](const std::string& name) {
    summary.written.push_back(config.out / name);
    return config.out / name;
  };

  // Points, fronts and overlays.
  std::vector<DesignPoint> all_points, fronts, overlay_fronts;
  std::vector<double> maf_values;
  std::vector<ScatterSeries> figure;
  for (const auto& grp : groups) {
    for (const auto& p : grp.sweep.points) {
      all_points.push_back(p);
      maf_values.push_back(maf(p, InertiaSpec::from_design(p.design), config.overlay, body_mass));
      summary.max_balance_residual = std::max(summary.max_balance_residual, p.max_balance_residual);
    }
    OverlayOptions regen_only;
    regen_only.mass = false;
    regen_only.inertia = false;
    const auto front = apply_overlays(grp.sweep.points, subject, config.overlay, regen_only);
    const auto front_overlay = apply_overlays(grp.sweep.points, subject, config.overlay);
    fronts.insert(fronts.end(), front.begin(), front.end());
    overlay_fronts.insert(overlay_fronts.end(), front_overlay.begin(), front_overlay.end());
    figure.push_back({group_name(grp.variant, grp.condition), front, true});
    figure.push_back({group_name(grp.variant, grp.condition) + " +inertia", front_overlay, true});
  }
  summary.points = all_points.size();
  write_points_csv(all_points, maf_values, config.overlay.regen_eta, out_path("points.csv"));
  write_front_csv(fronts, out_path("fronts.csv"));
  write_front_csv(overlay_fronts, out_path("fronts_overlay.csv"));

  // Energy reports.
  nlohmann::ordered_json reports;
  for (const auto& grp : groups) {
    auto& node = reports[std::string(to_string(grp.variant))][std::string(to_string(grp.condition))];
    node["unassisted_metabolic_rate_w_kg"] = grp.sweep.unassisted_rate_w_kg;
    node["ideal"] = nlohmann::ordered_json::parse(to_json(grp.ideal.report));
    for (const auto& p : grp.sweep.points) node["designs"][p.label] = nlohmann::ordered_json::parse(to_json(p.report));
  }
  io::write_text(out_path("energy_reports.json"), reports.dump(2) + "\n");

  // Joint reactions: unassisted and ideal device per variant.
  io::CsvTable peaks;
  peaks.header = {"variant", "condition", "joint", "component", "phase", "peak_reduction_pct"};
  for (const auto& [c, g] : gaits) {
    write_reactions_csv(reactions_unassisted.at(c), out_path("reactions_" + std::string(to_string(c)) + "_unassisted.csv"));
  }
  for (const auto& grp : groups) {
    const auto& g = gaits.at(grp.condition);
    const auto assisted = newton_euler_reactions(g, subject, &grp.ideal_solution);
    write_reactions_csv(assisted, out_path("reactions_" + std::string(to_string(grp.condition)) + "_" +
                                           std::string(to_string(grp.variant)) + "_ideal.csv"));
    for (const auto& r : peak_reduction(assisted, reactions_unassisted.at(grp.condition), phase_bounds(g.toe_off_pct))) {
      peaks.rows.push_back({std::string(to_string(grp.variant)), std::string(to_string(grp.condition)),
                            std::string(to_string(r.joint)), std::string(to_string(r.component)),
                            std::string(to_string(r.phase)), io::format_optional(r.percent)});
    }
  }
  io::write_csv(out_path("reaction_peaks.csv"), peaks);

  // Profiles of every front member against the ideal device.
  io::CsvTable stats;
  stats.header = {"variant", "condition", "label", "actuator", "quantity", "phase", "rmse", "ptp_diff_pct"};
  io::CsvTable summary_table;
  summary_table.header = {"variant", "condition", "actuator", "quantity", "phase",
                          "median_rmse", "iqr_rmse", "median_ptp_diff_pct", "iqr_ptp_diff_pct", "members"};
  for (const auto& grp : groups) {
    const auto& g = gaits.at(grp.condition);
    const auto phases = phase_bounds(g.toe_off_pct);
    OverlayOptions regen_only;
    regen_only.mass = false;
    regen_only.inertia = false;
    const auto front = apply_overlays(grp.sweep.points, subject, config.overlay, regen_only);
    for (Eigen::Index act = 0; act < 2; ++act) {
      const std::string actuator = act == 0 ? "hip" : "knee";
      for (const char* quantity : {"torque", "power"}) {
        const bool torque = quantity[0] == 't';
        const auto ref = column(torque ? grp.ideal.torque_profile : grp.ideal.power_profile, act);
        // phase index 0 is the whole cycle
        std::array<std::vector<double>, kPhaseCount + 1> rmse_sets, ptp_sets;
        for (const auto& member : front) {
          const auto& src = *std::find_if(grp.sweep.points.begin(), grp.sweep.points.end(),
                                          [&](const DesignPoint& p) { return p.label == member.label; });
          const auto cur = column(torque ? src.torque_profile : src.power_profile, act);
          const PhaseStats s = rmse_per_phase(ref, cur, g.pct, phases);
          auto emit = [&](const std::string& phase, std::optional<double> rmse, std::optional<double> ptp,
                          std::size_t slot) {
            stats.rows.push_back({std::string(to_string(grp.variant)), std::string(to_string(grp.condition)),
                                  member.label, actuator, quantity, phase, io::format_optional(rmse),
                                  io::format_optional(ptp)});
            if (rmse) rmse_sets[slot].push_back(*rmse);
            if (ptp) ptp_sets[slot].push_back(*ptp);
          };
          emit("cycle", s.rmse_cycle, s.ptp_diff_cycle_pct, 0);
          for (std::size_t k = 0; k < kPhaseCount; ++k) {
            emit(std::string(to_string(phases[k].phase)), s.rmse[k], s.ptp_diff_pct[k], k + 1);
          }
        }
        for (std::size_t slot = 0; slot <= kPhaseCount; ++slot) {
          const std::string phase = slot == 0 ? "cycle" : std::string(to_string(phases[slot - 1].phase));
          std::optional<double> mr, ir, mp, ip;
          if (!rmse_sets[slot].empty()) {
            const auto m = median_iqr(rmse_sets[slot]);
            mr = m.median;
            ir = m.iqr;
          }
          if (!ptp_sets[slot].empty()) {
            const auto m = median_iqr(ptp_sets[slot]);
            mp = m.median;
            ip = m.iqr;
          }
          summary_table.rows.push_back({std::string(to_string(grp.variant)), std::string(to_string(grp.condition)),
                                        actuator, quantity, phase, io::format_optional(mr), io::format_optional(ir),
                                        io::format_optional(mp), io::format_optional(ip),
                                        std::to_string(front.size())});
        }
      }
    }
  }
  io::write_csv(out_path("phase_stats.csv"), stats);
  io::write_csv(out_path("phase_summary.csv"), summary_table);

  io::write_text(out_path("fronts.svg"), render_fronts_svg(figure, "Pareto fronts"));
  io::write_key_values(out_path("run.cfg"), config.to_key_values());
  return summary;
}

}  // namespace exo
