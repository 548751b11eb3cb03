#include "exo/redundancy.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "exo/errors.hpp"
#include "exo/io.hpp"

namespace exo {

Eigen::MatrixXd MuscleSet::capacity_matrix() const {
  Eigen::MatrixXd r(static_cast<Eigen::Index>(kJointCount), static_cast<Eigen::Index>(groups.size()));
  for (std::size_t m = 0; m < groups.size(); ++m) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)) = groups[m].capacity_nm[j];
    }
  }
  return r;
}

Eigen::VectorXd MuscleSet::masses() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(groups.size()));
  for (std::size_t m = 0; m < groups.size(); ++m) v(static_cast<Eigen::Index>(m)) = groups[m].mass_kg;
  return v;
}

void MuscleSet::validate() const {
  if (groups.empty()) throw DataError("muscle set is empty");
  for (const auto& g : groups) {
    if (!(g.mass_kg > 0) || !std::isfinite(g.mass_kg)) {
      throw DataError("muscle '" + g.name + "' must have a positive mass");
    }
    for (double c : g.capacity_nm) {
      if (!std::isfinite(c)) throw DataError("muscle '" + g.name + "' has a non-finite capacity");
    }
  }
  if (Eigen::FullPivLU<Eigen::MatrixXd>(capacity_matrix()).rank() < static_cast<Eigen::Index>(kJointCount)) {
    throw DataError("muscle capacities do not span hip, knee and ankle");
  }
}

MuscleSet load_muscles_csv(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  const std::size_t c_name = table.column("name");
  const std::size_t c_mass = table.column("mass_kg");
  const std::array<std::size_t, kJointCount> c_cap{
      table.column("cap_hip_nm"), table.column("cap_knee_nm"), table.column("cap_ankle_nm")};
  MuscleSet set;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    MuscleGroup g;
    g.name = row[c_name];
    g.mass_kg = io::parse_double(row[c_mass], where);
    for (std::size_t j = 0; j < kJointCount; ++j) g.capacity_nm[j] = io::parse_double(row[c_cap[j]], where);
    set.groups.push_back(std::move(g));
  }
  set.validate();
  return set;
}

void write_muscles_csv(const MuscleSet& muscles, const std::filesystem::path& path) {
  io::CsvTable t;
  t.header = io::split(kMuscleCsvHeader, ',');
  for (const auto& g : muscles.groups) {
    t.rows.push_back({g.name, io::format_number(g.mass_kg), io::format_number(g.capacity_nm[0]),
                      io::format_number(g.capacity_nm[1]), io::format_number(g.capacity_nm[2])});
  }
  io::write_csv(path, t);
}

MuscleSet default_muscles() {
  return load_muscles_csv(std::filesystem::path(EXO_DATA_DIR) / "muscles_default.csv");
}

// ---------------------------------------------------------------------------

void StepProblem::validate() const {
  const Eigen::Index j = tau_net.size();
  if (capacity.rows() != j || exo_map.rows() != j || exo_map.cols() != exo_bound.size()) {
    throw DomainError("step problem dimensions are inconsistent");
  }
  if (!tau_net.allFinite() || !capacity.allFinite() || !exo_map.allFinite()) {
    throw DomainError("step problem data must be finite");
  }
  for (Eigen::Index k = 0; k < exo_bound.size(); ++k) {
    if (!(exo_bound(k) >= 0)) throw DomainError("exoskeleton torque bounds must be >= 0");
  }
  if (!(exo_weight > 0) || (reserve_weight && !(*reserve_weight > 0))) {
    throw DomainError("objective weights must be strictly positive");
  }
}

StepSolution solve_step(const StepProblem& p, const QpOptions& options) {
  p.validate();
  const Eigen::Index joints = p.tau_net.size();
  const Eigen::Index nm = p.capacity.cols();
  const Eigen::Index ne = p.exo_map.cols();
  const Eigen::Index nr = p.reserve_weight ? joints : 0;
  const Eigen::Index n = nm + ne + nr;
  constexpr double inf = std::numeric_limits<double>::infinity();

  BoxQp qp;
  qp.h.resize(n);
  qp.A.resize(joints, n);
  qp.lower.resize(n);
  qp.upper.resize(n);
  qp.b = p.tau_net;

  qp.A.leftCols(nm) = p.capacity;
  qp.h.head(nm).setOnes();
  qp.lower.head(nm).setZero();
  qp.upper.head(nm).setOnes();

  qp.A.middleCols(nm, ne) = p.exo_map;
  qp.h.segment(nm, ne).setConstant(1 / (p.exo_weight * p.exo_weight));
  qp.lower.segment(nm, ne) = -p.exo_bound;
  qp.upper.segment(nm, ne) = p.exo_bound;

  if (nr > 0) {
    qp.A.rightCols(nr).setIdentity();
    qp.h.tail(nr).setConstant(1 / (*p.reserve_weight * *p.reserve_weight));
    qp.lower.tail(nr).setConstant(-inf);
    qp.upper.tail(nr).setConstant(inf);
  }

  const QpSolution q = solve_box_qp(qp, options);
  StepSolution s;
  s.activation = q.x.head(nm);
  s.exo_torque = q.x.segment(nm, ne);
  s.reserve = nr > 0 ? Eigen::VectorXd(q.x.tail(nr)) : Eigen::VectorXd::Zero(joints);
  if (nr > 0) {
    // Reserves are unbounded, so they can absorb the last rounding exactly.
    s.reserve = p.tau_net - p.capacity * s.activation - p.exo_map * s.exo_torque;
    s.objective = s.activation.squaredNorm() + s.exo_torque.squaredNorm() / (p.exo_weight * p.exo_weight) +
                  s.reserve.squaredNorm() / (*p.reserve_weight * *p.reserve_weight);
  } else {
    s.objective = q.objective;
  }
  s.balance_residual =
      (p.capacity * s.activation + p.exo_map * s.exo_torque + s.reserve - p.tau_net).cwiseAbs().maxCoeff();
  s.kkt_residual = q.kkt_residual;
  s.iterations = q.iterations;
  return s;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd AssistSolution::joint_assist() const {
  const auto n = static_cast<Eigen::Index>(samples());
  if (!design || exo_torque.size() == 0) return Eigen::MatrixXd::Zero(n, 3);
  return exo_torque * design->joint_map().transpose();
}

double AssistSolution::max_balance_residual() const {
  double worst = 0;
  for (double r : balance_residual) worst = std::max(worst, r);
  return worst;
}

AssistSolution solve_cycle(const GaitCycle& gait, const MuscleSet& muscles,
                           const std::optional<ExoDesign>& design, const CycleOptions& options) {
  gait.validate();
  muscles.validate();
  if (design) design->validate();

  const std::size_t n = gait.size();
  const auto ni = static_cast<Eigen::Index>(n);
  AssistSolution out;
  out.pct = gait.pct;
  out.stride_s = gait.stride_s;
  out.subject_mass_kg = gait.subject_mass_kg;
  out.condition = gait.condition;
  out.design = design;
  for (const auto& g : muscles.groups) out.muscle_names.push_back(g.name);
  out.muscle_mass = muscles.masses();
  out.capacity = muscles.capacity_matrix();
  out.activation.resize(ni, out.capacity.cols());
  out.exo_torque = Eigen::MatrixXd::Zero(ni, design ? 2 : 0);
  out.reserve.resize(ni, 3);
  out.joint_velocity.resize(ni, 3);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    for (std::size_t i = 0; i < n; ++i) out.joint_velocity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gait.velocity[j][i];
  }
  out.actuator_velocity = design ? Eigen::MatrixXd(actuator_velocities(*design, gait)) : Eigen::MatrixXd::Zero(ni, 2);
  out.objective.assign(n, 0);
  out.balance_residual.assign(n, 0);
  out.kkt_residual.assign(n, 0);

  StepProblem base;
  base.capacity = out.capacity;
  base.exo_weight = options.exo_weight;
  base.reserve_weight = options.reserve_weight;
  if (design) {
    base.exo_map = design->joint_map();
    base.exo_bound = Eigen::Vector2d(design->hip_peak_nm, design->knee_peak_nm);
  } else {
    base.exo_map = Eigen::MatrixXd::Zero(3, 0);
    base.exo_bound = Eigen::VectorXd(0);
  }

  auto solve_range = [&](std::size_t begin, std::size_t end) {
    StepProblem p = base;
    p.tau_net.resize(3);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < kJointCount; ++j) {
        p.tau_net(static_cast<Eigen::Index>(j)) = gait.moment[j][i] * gait.subject_mass_kg;
      }
      StepSolution s;
      try {
        s = solve_step(p, options.qp);
      } catch (const Error& e) {
        const std::string msg = std::string(e.what()) + " at sample " + std::to_string(i) + " (" +
                                io::format_number(gait.pct[i]) + " %)";
        if (e.kind() == ErrorKind::numeric) throw NumericError(msg);
        throw DomainError(msg);
      }
      const auto r = static_cast<Eigen::Index>(i);
      out.activation.row(r) = s.activation.transpose();
      if (design) out.exo_torque.row(r) = s.exo_torque.transpose();
      out.reserve.row(r) = s.reserve.transpose();
      out.objective[i] = s.objective;
      out.balance_residual[i] = s.balance_residual;
      out.kkt_residual[i] = s.kkt_residual;
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    solve_range(0, n);
    return out;
  }
  // Samples are independent and every worker writes its own rows.
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        solve_range(std::min(n, t * chunk), std::min(n, (t + 1) * chunk));
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace exo
