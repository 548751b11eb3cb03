// exodesign: command-line front end of the exoskeleton design study.

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <map>
#include <limits>
#include <optional>

#include "exo/energetics.hpp"
#include "exo/errors.hpp"
#include "exo/gait.hpp"
#include "exo/io.hpp"
#include "exo/kinematics.hpp"
#include "exo/overlay.hpp"
#include "exo/pareto.hpp"
#include "exo/pipeline.hpp"
#include "exo/reactions.hpp"
#include "exo/redundancy.hpp"
#include "exo/stats.hpp"
#include "exo/svg.hpp"

namespace fs = std::filesystem;
using namespace exo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GaitSource {
  std::string gait_file;
  std::uint64_t seed = 7;
  std::string condition = "noload";

  void add(CLI::App* app) {
    app->add_option("--gait", gait_file, "Gait CSV (synthesized when omitted)");
    app->add_option("--seed", seed, "Seed of the synthetic gait");
    app->add_option("--condition", condition, "noload or loaded");
  }

  GaitCycle load() const {
    if (!gait_file.empty()) return load_gait_csv(gait_file);
    return synth_gait(seed, parse_condition(condition));
  }
};

struct DesignArgs {
  std::string variant;
  std::string design_file;
  double hip_peak = kInf;
  double knee_peak = kInf;
  double height = 1.75;

  void add(CLI::App* app) {
    app->add_option("--variant", variant, "mono, bi, mono_knee_on_thigh or mono_knee_on_shank");
    app->add_option("--design", design_file, "Design key=value file");
    app->add_option("--hip-peak", hip_peak, "Hip actuator peak torque, N m (unlimited by default)");
    app->add_option("--knee-peak", knee_peak, "Knee actuator peak torque, N m (unlimited by default)");
    app->add_option("--subject-height", height, "Subject height, m");
  }

  std::optional<ExoDesign> resolve(double body_mass) const {
    const double thigh = Subject::from_anthropometry(body_mass, height).length_m[static_cast<int>(Segment::thigh)];
    if (!design_file.empty()) return load_design_file(design_file, thigh);
    if (variant.empty() || variant == "none") return std::nullopt;
    const ExoVariant v = parse_variant(variant);
    if (std::isinf(hip_peak) && std::isinf(knee_peak)) return ideal_design(v);
    ExoDesign d = reference_design(v, 70, 70, thigh);
    d.hip_peak_nm = hip_peak;
    d.knee_peak_nm = knee_peak;
    d.validate();
    return d;
  }
};

void write_solution_csv(const AssistSolution& s, const fs::path& path) {
  io::CsvTable t;
  t.header = {"pct"};
  for (const auto& n : s.muscle_names) t.header.push_back("a_" + n);
  if (s.assisted()) {
    t.header.insert(t.header.end(), {"exo_hip_nm", "exo_knee_nm", "exo_hip_power_w_kg", "exo_knee_power_w_kg"});
  }
  t.header.insert(t.header.end(), {"reserve_hip_nm", "reserve_knee_nm", "reserve_ankle_nm", "objective"});
  const Eigen::MatrixXd power = actuator_power(s);
  for (std::size_t i = 0; i < s.samples(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<std::string> row{io::format_number(s.pct[i])};
    for (Eigen::Index m = 0; m < s.activation.cols(); ++m) row.push_back(io::format_number(s.activation(r, m)));
    if (s.assisted()) {
      for (Eigen::Index k = 0; k < 2; ++k) row.push_back(io::format_number(s.exo_torque(r, k)));
      for (Eigen::Index k = 0; k < 2; ++k) row.push_back(io::format_number(power(r, k)));
    }
    for (Eigen::Index j = 0; j < 3; ++j) row.push_back(io::format_number(s.reserve(r, j)));
    row.push_back(io::format_number(s.objective[i]));
    t.rows.push_back(std::move(row));
  }
  io::write_csv(path, t);
}

MuscleSet muscles_from(const std::string& path) { return path.empty() ? default_muscles() : load_muscles_csv(path); }

std::vector<double> csv_column(const fs::path& path, const std::string& name) {
  const auto t = io::read_csv(path);
  const std::size_t c = t.column(name);
  std::vector<double> v;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    v.push_back(io::parse_double(t.rows[r][c], path.string() + " row " + std::to_string(r + 1)));
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-criteria design study of hip-knee exoskeletons"};
  app.require_subcommand(1);
  fs::path error_dir;

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic gait cycle");
  std::uint64_t synth_seed = 7;
  std::string synth_condition = "noload";
  std::size_t synth_samples = kDefaultSamples;
  double synth_mass = 75;
  std::string synth_out;
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--condition", synth_condition, "noload or loaded");
  synth->add_option("--samples", synth_samples, "Grid size");
  synth->add_option("--mass", synth_mass, "Subject mass, kg");
  synth->add_option("--out", synth_out, "Output gait CSV")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Solve the load sharing over one stride");
  GaitSource solve_gait;
  DesignArgs solve_design;
  std::string solve_muscles, solve_out;
  double solve_wexo = kDefaultExoWeight, solve_wr = kDefaultReserveWeight;
  solve_gait.add(solve);
  solve_design.add(solve);
  solve->add_option("--muscles", solve_muscles, "Muscle CSV");
  solve->add_option("--exo-weight", solve_wexo, "Device torque weight, N m");
  solve->add_option("--reserve-weight", solve_wr, "Reserve torque weight, N m");
  double solve_cact = kDefaultActivationHeat;
  solve->add_option("--c-act", solve_cact, "Activation heat of fully active muscle, W/kg");
  solve->add_option("--out", solve_out, "Output directory")->required();

  // pareto
  auto* pareto = app.add_subcommand("pareto", "Sweep the peak-torque grid and filter the front");
  GaitSource pareto_gait;
  std::string pareto_variant = "mono", pareto_muscles, pareto_out;
  double pareto_height = 1.75;
  pareto_gait.add(pareto);
  pareto->add_option("--variant", pareto_variant, "Device variant");
  pareto->add_option("--muscles", pareto_muscles, "Muscle CSV");
  pareto->add_option("--subject-height", pareto_height, "Subject height, m");
  double pareto_cact = kDefaultActivationHeat;
  pareto->add_option("--c-act", pareto_cact, "Activation heat of fully active muscle, W/kg");
  pareto->add_option("--out", pareto_out, "Output directory")->required();

  // overlay
  auto* overlay = app.add_subcommand("overlay", "Apply regeneration and inertia effects to swept points");
  std::string overlay_points_file, overlay_out;
  OverlayParams overlay_params;
  double overlay_mass = 75, overlay_height = 1.75;
  bool overlay_no_inertia = false;
  overlay->add_option("--points", overlay_points_file, "points.csv from pareto or pipeline")->required();
  overlay->add_option("--eta-regen", overlay_params.regen_eta, "Regeneration efficiency in [0, 0.65]");
  overlay->add_option("--muscle-tendon-eta", overlay_params.muscle_tendon_eta, "Muscle-tendon efficiency");
  overlay->add_option("--subject-mass", overlay_mass, "Subject mass, kg");
  overlay->add_option("--subject-height", overlay_height, "Subject height, m");
  overlay->add_flag("--no-inertia", overlay_no_inertia, "Only credit regeneration");
  overlay->add_option("--out", overlay_out, "Output front CSV")->required();

  // reactions
  auto* reactions = app.add_subcommand("reactions", "Joint reaction loads over one stride");
  GaitSource reactions_gait;
  DesignArgs reactions_design;
  std::string reactions_muscles, reactions_out;
  reactions_gait.add(reactions);
  reactions_design.add(reactions);
  reactions->add_option("--muscles", reactions_muscles, "Muscle CSV");
  reactions->add_option("--out", reactions_out, "Output reactions CSV")->required();

  // stats
  auto* stats = app.add_subcommand("stats", "Phase-wise RMSE and peak-to-peak difference of two columns");
  std::string stats_a, stats_b, stats_column, stats_column_b, stats_out;
  double stats_toe_off = 60;
  stats->add_option("--reference", stats_a, "Reference CSV")->required();
  stats->add_option("--compare", stats_b, "Compared CSV")->required();
  stats->add_option("--column", stats_column, "Column to compare")->required();
  stats->add_option("--compare-column", stats_column_b, "Column of the compared CSV (defaults to --column)");
  stats->add_option("--toe-off", stats_toe_off, "Toe-off, % of the stride");
  stats->add_option("--out", stats_out, "Output CSV")->required();

  // plot
  auto* plot = app.add_subcommand("plot", "SVG scatter of one or more front CSVs");
  std::vector<std::string> plot_inputs;
  std::string plot_out, plot_title = "Pareto fronts";
  plot->add_option("--fronts", plot_inputs, "Front CSVs")->required();
  plot->add_option("--title", plot_title, "Figure title");
  plot->add_option("--out", plot_out, "Output SVG")->required();

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run the whole study");
  std::string pipe_config, pipe_out;
  std::optional<std::uint64_t> pipe_seed;
  std::optional<double> pipe_eta;
  std::vector<std::string> pipe_variants, pipe_conditions;
  std::optional<unsigned> pipe_threads;
  pipeline->add_option("--config", pipe_config, "key=value run configuration");
  pipeline->add_option("--out", pipe_out, "Output directory");
  pipeline->add_option("--seed", pipe_seed, "Seed of the synthetic gait");
  pipeline->add_option("--eta-regen", pipe_eta, "Regeneration efficiency in [0, 0.65]");
  pipeline->add_option("--variant", pipe_variants, "Device variants")->delimiter(',');
  pipeline->add_option("--condition", pipe_conditions, "Walking conditions")->delimiter(',');
  pipeline->add_option("--threads", pipe_threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << error_json("usage", e.what(), 2);
    return 2;
  }

  try {
    if (*synth) {
      SynthOptions o;
      o.samples = synth_samples;
      o.subject_mass_kg = synth_mass;
      write_gait_csv(synth_gait(synth_seed, parse_condition(synth_condition), o), synth_out);
      std::cout << "wrote " << synth_out << "\n";
    } else if (*solve) {
      error_dir = solve_out;
      const GaitCycle gait = solve_gait.load();
      const MuscleSet muscles = muscles_from(solve_muscles);
      CycleOptions co;
      co.exo_weight = solve_wexo;
      co.reserve_weight = solve_wr;
      const auto design = solve_design.resolve(gait.subject_mass_kg);
      const AssistSolution base = solve_cycle(gait, muscles, std::nullopt, co);
      const SurrogateMetabolicModel model(solve_cact);
      const double mc0 = muscle_metabolic_rate(base, model);
      const AssistSolution sol = design ? solve_cycle(gait, muscles, design, co) : base;
      write_solution_csv(sol, fs::path(solve_out) / "solution.csv");
      io::write_text(fs::path(solve_out) / "energy_report.json", to_json(energy_report(sol, mc0, model)) + "\n");
      std::cout << "max torque-balance residual " << io::format_number(sol.max_balance_residual()) << " N m\n";
    } else if (*pareto) {
      error_dir = pareto_out;
      const GaitCycle gait = pareto_gait.load();
      SweepOptions so;
      so.c_act = pareto_cact;
      so.thigh_length_m =
          Subject::from_anthropometry(gait.subject_mass_kg, pareto_height).length_m[static_cast<int>(Segment::thigh)];
      const auto result = sweep(gait, muscles_from(pareto_muscles), parse_variant(pareto_variant), so);
      std::vector<double> mafs;
      const OverlayParams params;
      for (const auto& p : result.points) {
        mafs.push_back(maf(p, InertiaSpec::from_design(p.design), params, gait.subject_mass_kg));
      }
      write_points_csv(result.points, mafs, 0, fs::path(pareto_out) / "points.csv");
      write_front_csv(dominance_filter(result.points), fs::path(pareto_out) / "fronts.csv");
      std::cout << "unassisted metabolic rate " << io::format_number(result.unassisted_rate_w_kg) << " W/kg\n";
    } else if (*overlay) {
      const Subject subject = Subject::from_anthropometry(overlay_mass, overlay_height);
      const auto points =
          load_points_csv(overlay_points_file, subject.length_m[static_cast<int>(Segment::thigh)]);
      OverlayOptions oo;
      oo.mass = oo.inertia = !overlay_no_inertia;
      // One front per variant and condition.
      std::map<std::pair<std::string, Condition>, std::vector<DesignPoint>> groups;
      for (const auto& p : points) groups[{std::string(to_string(p.design.variant)), p.condition}].push_back(p);
      std::vector<DesignPoint> fronts;
      for (const auto& [key, members] : groups) {
        const auto f = apply_overlays(members, subject, overlay_params, oo);
        fronts.insert(fronts.end(), f.begin(), f.end());
      }
      write_front_csv(fronts, overlay_out);
      std::cout << "wrote " << overlay_out << "\n";
    } else if (*reactions) {
      const GaitCycle gait = reactions_gait.load();
      const Subject subject = Subject::from_anthropometry(gait.subject_mass_kg, reactions_design.height);
      const auto design = reactions_design.resolve(gait.subject_mass_kg);
      if (design) {
        const AssistSolution sol = solve_cycle(gait, muscles_from(reactions_muscles), design);
        write_reactions_csv(newton_euler_reactions(gait, subject, &sol), reactions_out);
      } else {
        write_reactions_csv(newton_euler_reactions(gait, subject), reactions_out);
      }
      std::cout << "wrote " << reactions_out << "\n";
    } else if (*stats) {
      const auto pct = csv_column(stats_a, "pct");
      const auto a = csv_column(stats_a, stats_column);
      const auto b = csv_column(stats_b, stats_column_b.empty() ? stats_column : stats_column_b);
      const auto phases = phase_bounds(stats_toe_off);
      const PhaseStats s = rmse_per_phase(a, b, pct, phases);
      io::CsvTable t;
      t.header = {"phase", "rmse", "ptp_diff_pct"};
      t.rows.push_back({"cycle", io::format_number(s.rmse_cycle), io::format_optional(s.ptp_diff_cycle_pct)});
      for (std::size_t k = 0; k < kPhaseCount; ++k) {
        t.rows.push_back({std::string(to_string(phases[k].phase)), io::format_optional(s.rmse[k]),
                          io::format_optional(s.ptp_diff_pct[k])});
      }
      io::write_csv(stats_out, t);
      std::cout << io::to_csv_string(t);
    } else if (*plot) {
      std::vector<ScatterSeries> series;
      for (const auto& f : plot_inputs) series.push_back({fs::path(f).stem().string(), load_front_csv(f), true});
      io::write_text(plot_out, render_fronts_svg(series, plot_title));
      std::cout << "wrote " << plot_out << "\n";
    } else if (*pipeline) {
      io::KeyValues kv;
      fs::path base;
      if (!pipe_config.empty()) {
        kv = io::read_key_values(pipe_config);
        base = fs::path(pipe_config).parent_path();
      }
      // Command-line flags override the file.
      if (!pipe_out.empty()) kv["out"] = fs::absolute(pipe_out).string();
      if (pipe_seed) kv["seed"] = std::to_string(*pipe_seed);
      if (pipe_eta) kv["regen_eta"] = io::format_number(*pipe_eta);
      if (pipe_threads) kv["threads"] = std::to_string(*pipe_threads);
      auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
        return s;
      };
      if (!pipe_variants.empty()) kv["variants"] = join(pipe_variants);
      if (!pipe_conditions.empty()) kv["conditions"] = join(pipe_conditions);
      if (auto it = kv.find("out"); it != kv.end()) {
        const fs::path o = it->second;
        error_dir = o.is_relative() && !base.empty() ? base / o : o;
      }
      const RunConfig config = parse_run_config(kv, base);
      error_dir = config.out;
      const auto summary = run_pipeline(config);
      std::cout << "wrote " << summary.written.size() << " files to " << summary.out.string() << " ("
                << summary.points << " design points, max residual "
                << io::format_number(summary.max_balance_residual) << " N m)\n";
    }
  } catch (const Error& e) {
    const std::string json = error_json(e);
    std::cerr << json;
    if (!error_dir.empty()) {
      try {
        io::write_text(error_dir / "error.json", json);
      } catch (const std::exception&) {
      }
    }
    return e.exit_code();
  } catch (const std::exception& e) {
    const std::string json = error_json("internal", e.what(), 1);
    std::cerr << json;
    return 1;
  }
  return 0;
}
