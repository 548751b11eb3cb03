#include "exo/pareto.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "exo/errors.hpp"
#include "exo/io.hpp"

namespace exo {

SweepResult sweep(const GaitCycle& gait, const MuscleSet& muscles, ExoVariant variant, const SweepOptions& options) {
  SweepResult out;
  const AssistSolution unassisted = solve_cycle(gait, muscles, std::nullopt, options.cycle);
  const SurrogateMetabolicModel model(options.c_act);
  out.unassisted_rate_w_kg = muscle_metabolic_rate(unassisted, model);

  std::vector<std::pair<double, double>> cells;
  for (double hip : kPeakGrid) {
    for (double knee : kPeakGrid) cells.emplace_back(hip, knee);
  }
  out.points.resize(cells.size());

  auto evaluate = [&](std::size_t k) {
    const auto [hip, knee] = cells[k];
    const ExoDesign design = reference_design(variant, hip, knee, options.thigh_length_m);
    AssistSolution sol;
    try {
      sol = solve_cycle(gait, muscles, design, options.cycle);
    } catch (const Error& e) {
      const std::string msg = std::string(e.what()) + " for design " + design.label() + " (" +
                              io::format_number(hip) + ", " + io::format_number(knee) + " N m)";
      if (e.kind() == ErrorKind::numeric) throw NumericError(msg);
      throw DomainError(msg);
    }
    DesignPoint& p = out.points[k];
    p.label = design.label();
    p.design = design;
    p.condition = gait.condition;
    p.report = energy_report(sol, out.unassisted_rate_w_kg, model);
    p.reduction_pct = p.report.metabolic_reduction_pct;
    p.power_w_kg = p.report.abs_power_w_kg;
    p.step_objective = sol.objective;
    p.max_balance_residual = sol.max_balance_residual();
    p.torque_profile = sol.exo_torque;
    p.power_profile = actuator_power(sol);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(cells.size())));
  if (threads == 1) {
    for (std::size_t k = 0; k < cells.size(); ++k) evaluate(k);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t k = t; k < cells.size(); k += threads) evaluate(k);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const DesignPoint& a, const DesignPoint& b) { return a.label < b.label; });
  return out;
}

std::map<Condition, SweepResult> sweep(const std::map<Condition, GaitCycle>& gaits, const MuscleSet& muscles,
                                       ExoVariant variant, const SweepOptions& options) {
  std::map<Condition, SweepResult> out;
  for (const auto& [condition, gait] : gaits) out.emplace(condition, sweep(gait, muscles, variant, options));
  return out;
}

bool dominates(const DesignPoint& a, const DesignPoint& b) {
  return a.reduction_pct >= b.reduction_pct && a.power_w_kg <= b.power_w_kg &&
         (a.reduction_pct > b.reduction_pct || a.power_w_kg < b.power_w_kg);
}

std::vector<DesignPoint> dominance_filter(std::vector<DesignPoint> points) {
  if (points.empty()) throw DomainError("dominance filter needs at least one point");
  std::sort(points.begin(), points.end(), [](const DesignPoint& a, const DesignPoint& b) {
    if (a.power_w_kg != b.power_w_kg) return a.power_w_kg < b.power_w_kg;
    if (a.reduction_pct != b.reduction_pct) return a.reduction_pct > b.reduction_pct;
    return a.label < b.label;
  });
  // Sweep groups of equal power. Inside a group only the best reduction can
  // survive, and it survives iff it beats every strictly cheaper point.
  std::vector<DesignPoint> front;
  bool have_best = false;
  double best = 0;  // best reduction among strictly cheaper points
  std::size_t i = 0;
  while (i < points.size()) {
    std::size_t end = i;
    while (end < points.size() && points[end].power_w_kg == points[i].power_w_kg) ++end;
    const double top = points[i].reduction_pct;
    if (!have_best || top > best) {
      for (std::size_t k = i; k < end && points[k].reduction_pct == top; ++k) front.push_back(points[k]);
      best = top;
      have_best = true;
    }
    i = end;
  }
  return front;
}

void write_front_csv(const std::vector<DesignPoint>& points, const std::filesystem::path& path) {
  io::CsvTable t;
  t.header = io::split(kFrontCsvHeader, ',');
  for (const auto& p : points) {
    t.rows.push_back({p.label, std::string(to_string(p.design.variant)), std::string(to_string(p.condition)),
                      io::format_number(p.design.hip_peak_nm), io::format_number(p.design.knee_peak_nm),
                      io::format_number(p.reduction_pct), io::format_number(p.power_w_kg),
                      io::format_number(p.report.hip_abs_power_w_kg), io::format_number(p.report.knee_abs_power_w_kg),
                      io::format_number(p.report.neg_power_w_kg), io::format_number(p.report.max_pos_power_w_kg)});
  }
  io::write_csv(path, t);
}

std::vector<DesignPoint> load_front_csv(const std::filesystem::path& path) {
  const auto t = io::read_csv(path);
  const auto header = io::split(kFrontCsvHeader, ',');
  std::vector<std::size_t> c;
  for (const auto& h : header) c.push_back(t.column(h));
  std::vector<DesignPoint> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    auto num = [&](std::size_t k) { return io::parse_double(row[c[k]], where); };
    DesignPoint p;
    p.label = row[c[0]];
    p.design.variant = parse_variant(row[c[1]]);
    p.condition = parse_condition(row[c[2]]);
    p.design.hip_peak_nm = num(3);
    p.design.knee_peak_nm = num(4);
    p.reduction_pct = num(5);
    p.power_w_kg = num(6);
    p.report.metabolic_reduction_pct = p.reduction_pct;
    p.report.abs_power_w_kg = p.power_w_kg;
    p.report.hip_abs_power_w_kg = num(7);
    p.report.knee_abs_power_w_kg = num(8);
    p.report.neg_power_w_kg = num(9);
    p.report.max_pos_power_w_kg = num(10);
    if (p.label != "ideal" && p.label != grid_label(p.design.hip_peak_nm, p.design.knee_peak_nm)) {
      throw DataError(where + ": label '" + p.label + "' does not match the peak torques");
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace exo
