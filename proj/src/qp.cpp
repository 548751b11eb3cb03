#include "exo/qp.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "exo/errors.hpp"
#include "exo/io.hpp"

namespace exo {

namespace {

// The iteration runs in extended precision: with heavily penalized reserves
// and nearly free device torques the multipliers and the pattern system span
// more magnitudes than a double resolves.
using Real = long double;
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

enum class Bound : signed char { lower = -1, free = 0, upper = 1 };

struct Problem {
  Vec h, b, lower, upper;
  Mat A;

  explicit Problem(const BoxQp& p)
      : h(p.h.cast<Real>()),
        b(p.b.cast<Real>()),
        lower(p.lower.cast<Real>()),
        upper(p.upper.cast<Real>()),
        A(p.A.cast<Real>()) {}

  Eigen::Index n() const { return h.size(); }
  Eigen::Index m() const { return b.size(); }
};

struct Primal {
  Vec x;
  std::vector<Bound> pattern;
};

Primal primal_of(const Problem& p, const Vec& lambda) {
  const Vec g = p.A.transpose() * lambda;
  Primal out{Vec(p.n()), std::vector<Bound>(static_cast<std::size_t>(p.n()))};
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    const Real v = g(i) / (2 * p.h(i));
    auto& s = out.pattern[static_cast<std::size_t>(i)];
    if (v <= p.lower(i)) {
      out.x(i) = p.lower(i);
      s = Bound::lower;
    } else if (v >= p.upper(i)) {
      out.x(i) = p.upper(i);
      s = Bound::upper;
    } else {
      out.x(i) = v;
      s = Bound::free;
    }
  }
  return out;
}

struct PatternSolution {
  Vec x;
  Vec lambda;
};

// Solution of the equality-constrained problem left once the bound variables
// of `pattern` are fixed. The free variables are scaled to y = sqrt(2h) x
// and solved together with the multipliers from
//
//   [ I    -C^T ] [ y      ]   [ 0 ]
//   [ C    -M   ] [ lambda ] = [ r - M lambda_hint ],   C = A_F (2H_F)^(-1/2),
//
// which keeps nearly unpenalized variables accurate where recovering them
// from the multipliers would not. M regularizes rows left without free
// variables, anchoring their multipliers at the current estimate.
PatternSolution pattern_solve(const Problem& p, const std::vector<Bound>& pattern, const Vec& lambda_hint) {
  const Eigen::Index m = p.m();
  std::vector<Eigen::Index> free;
  Vec rhs_b = p.b;
  Vec full = Vec::Zero(m);
  PatternSolution out{Vec(p.n()), Vec()};
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    full += p.A.col(i).cwiseAbs2() / (2 * p.h(i));
    switch (pattern[static_cast<std::size_t>(i)]) {
      case Bound::free: free.push_back(i); break;
      case Bound::lower: out.x(i) = p.lower(i); rhs_b -= p.A.col(i) * p.lower(i); break;
      case Bound::upper: out.x(i) = p.upper(i); rhs_b -= p.A.col(i) * p.upper(i); break;
    }
  }
  const auto nf = static_cast<Eigen::Index>(free.size());
  Mat c(m, nf);
  Vec scale(nf);
  for (Eigen::Index k = 0; k < nf; ++k) {
    scale(k) = 1 / std::sqrt(2 * p.h(free[static_cast<std::size_t>(k)]));
    c.col(k) = p.A.col(free[static_cast<std::size_t>(k)]) * scale(k);
  }
  Vec mu = Vec::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (nf == 0 || c.row(j).cwiseAbs().maxCoeff() == 0) mu(j) = Real(1e-10) * full(j) + Real(1e-300);
  }
  Mat kkt = Mat::Zero(nf + m, nf + m);
  kkt.topLeftCorner(nf, nf).setIdentity();
  kkt.topRightCorner(nf, m) = -c.transpose();
  kkt.bottomLeftCorner(m, nf) = c;
  kkt.bottomRightCorner(m, m).diagonal() = -mu;
  Vec rhs = Vec::Zero(nf + m);
  rhs.tail(m) = rhs_b - mu.cwiseProduct(lambda_hint);

  Eigen::FullPivLU<Mat> lu(kkt);
  if (!lu.isInvertible()) {
    // Dependent rows: a small uniform pull toward the current estimate.
    const Real eps = Real(1e-15) * std::max(full.maxCoeff(), Real(1e-300));
    kkt.bottomRightCorner(m, m).diagonal().array() -= eps;
    rhs.tail(m) -= eps * lambda_hint;
    lu.compute(kkt);
  }
  Vec sol = lu.solve(rhs);
  for (int pass = 0; pass < 2; ++pass) sol += lu.solve(rhs - kkt * sol);

  for (Eigen::Index k = 0; k < nf; ++k) out.x(free[static_cast<std::size_t>(k)]) = sol(k) * scale(k);
  out.lambda = sol.tail(m);
  return out;
}

bool consistent(const Problem& p, const std::vector<Bound>& pattern, const Vec& x, const Vec& lambda) {
  const Primal implied = primal_of(p, lambda);
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    const auto s = pattern[static_cast<std::size_t>(i)];
    if (s == Bound::free ? (x(i) < p.lower(i) || x(i) > p.upper(i))
                         : implied.pattern[static_cast<std::size_t>(i)] != s) {
      return false;
    }
  }
  return true;
}

void check_problem(const BoxQp& p) {
  const Eigen::Index n = p.variables();
  if (p.A.cols() != n || p.A.rows() != p.constraints() || p.lower.size() != n || p.upper.size() != n) {
    throw DomainError("QP dimensions are inconsistent");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(p.h(i) > 0) || !std::isfinite(p.h(i))) throw DomainError("QP weights must be positive and finite");
    if (!(p.lower(i) <= p.upper(i))) throw DomainError("QP bounds are crossed or NaN");
  }
  if (!p.A.allFinite() || !p.b.allFinite()) throw DomainError("QP data must be finite");
}

}  // namespace

double kkt_residual(const BoxQp& p, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda) {
  const Eigen::VectorXd g = p.A.transpose() * lambda;
  const Eigen::VectorXd g_size = p.A.cwiseAbs().transpose() * lambda.cwiseAbs();
  double worst = 0;
  for (Eigen::Index i = 0; i < p.variables(); ++i) {
    // mu is the bound multiplier: positive pushes up from the lower bound.
    // Each term is measured relative to the size of the terms that cancel.
    const double mu = (2 * p.h(i) * x(i) - g(i)) / std::max({1.0, g_size(i), 2 * p.h(i) * std::abs(x(i))});
    constexpr double tol_bound = 1e-12;
    double v;
    if (x(i) <= p.lower(i) + tol_bound && x(i) >= p.upper(i) - tol_bound) {
      v = 0;  // fixed variable
    } else if (x(i) <= p.lower(i) + tol_bound) {
      v = std::max(0.0, -mu);
    } else if (x(i) >= p.upper(i) - tol_bound) {
      v = std::max(0.0, mu);
    } else {
      v = std::abs(mu);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

struct Outcome {
  Vec x;
  Vec lambda;
  int iterations = 0;
};

// Semismooth Newton on the dual. Returns nothing when the iteration does not
// settle; `last` then holds the final primal iterate.
std::optional<Outcome> dual_newton(const Problem& p, int max_iterations, Vec& last) {
  Vec lambda = Vec::Zero(p.m());
  Primal cur = primal_of(p, lambda);
  for (int it = 0; it < max_iterations; ++it) {
    PatternSolution step = pattern_solve(p, cur.pattern, lambda);
    if (consistent(p, cur.pattern, step.x, step.lambda)) {
      return Outcome{std::move(step.x), std::move(step.lambda), it + 1};
    }
    // Exact search along the Newton direction. The dual is concave, so its
    // slope along the line decreases; bisect on the sign of the slope. The
    // slope comes from the constraint residual, which stays accurate when
    // the dual value itself is too large to compare increments.
    const Vec dir = step.lambda - lambda;
    auto slope_at = [&](Real t) { return (p.b - p.A * primal_of(p, lambda + t * dir).x).dot(dir); };
    Real t = 1;
    if (slope_at(1) < 0) {
      Real lo = 0, hi = 1;
      for (int ls = 0; ls < 64; ++ls) {
        const Real mid = (lo + hi) / 2;
        (slope_at(mid) >= 0 ? lo : hi) = mid;
      }
      t = lo > 0 ? lo : hi;
    }
    lambda += t * dir;
    cur = primal_of(p, lambda);
  }
  last = cur.x;
  return std::nullopt;
}

// Feasible point from the origin projected onto the box, with the balance
// restored by the unbounded variables alone (least norm). Empty if those
// variables cannot span the constraints.
std::optional<Vec> feasible_start(const Problem& p) {
  Vec x = Vec::Zero(p.n());
  std::vector<Eigen::Index> open;
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    x(i) = std::clamp(Real(0), p.lower(i), p.upper(i));
    if (std::isinf(p.lower(i)) && std::isinf(p.upper(i))) open.push_back(i);
  }
  if (open.empty()) return std::nullopt;
  Mat a(p.m(), static_cast<Eigen::Index>(open.size()));
  for (std::size_t k = 0; k < open.size(); ++k) a.col(static_cast<Eigen::Index>(k)) = p.A.col(open[k]);
  const Vec r = p.b - p.A * x;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
  if (cod.rank() < p.m()) return std::nullopt;
  const Vec d = cod.solve(r);
  for (std::size_t k = 0; k < open.size(); ++k) x(open[k]) += d(static_cast<Eigen::Index>(k));
  return x;
}

// Bound multiplier of variable i, scaled like the KKT residual; positive
// values push away from the lower bound.
Real bound_multiplier(const Problem& p, const Vec& x, const Vec& lambda, Eigen::Index i) {
  const Real g = p.A.col(i).dot(lambda);
  const Real size = p.A.col(i).cwiseAbs().dot(lambda.cwiseAbs());
  return (2 * p.h(i) * x(i) - g) / std::max({Real(1), size, 2 * p.h(i) * std::abs(x(i))});
}

// Primal active-set method from a feasible start. Slower than the dual
// iteration but it never recovers variables from the multipliers, which
// matters when some variables are almost unpenalized.
std::optional<Outcome> primal_active_set(const Problem& p, Vec x, int max_iterations) {
  std::vector<Bound> pattern(static_cast<std::size_t>(p.n()), Bound::free);
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    if (x(i) <= p.lower(i)) pattern[static_cast<std::size_t>(i)] = Bound::lower;
    else if (x(i) >= p.upper(i)) pattern[static_cast<std::size_t>(i)] = Bound::upper;
  }
  Vec lambda = Vec::Zero(p.m());
  for (int it = 0; it < max_iterations; ++it) {
    PatternSolution eq = pattern_solve(p, pattern, lambda);
    lambda = eq.lambda;
    const Vec step = eq.x - x;
    Real alpha = 1;
    Eigen::Index blocking = -1;
    for (Eigen::Index i = 0; i < p.n(); ++i) {
      if (pattern[static_cast<std::size_t>(i)] != Bound::free || step(i) == 0) continue;
      const Real room = step(i) > 0 ? (p.upper(i) - x(i)) / step(i) : (p.lower(i) - x(i)) / step(i);
      if (room < alpha) {
        alpha = std::max(room, Real(0));
        blocking = i;
      }
    }
    if (blocking >= 0) {
      x += alpha * step;
      const bool up = step(blocking) > 0;
      x(blocking) = up ? p.upper(blocking) : p.lower(blocking);
      pattern[static_cast<std::size_t>(blocking)] = up ? Bound::upper : Bound::lower;
      continue;
    }
    x = eq.x;
    // Release the bound whose multiplier has the wrong sign by the most.
    Real worst = Real(1e-13);
    Eigen::Index release = -1;
    for (Eigen::Index i = 0; i < p.n(); ++i) {
      const auto s = pattern[static_cast<std::size_t>(i)];
      if (s == Bound::free || p.lower(i) == p.upper(i)) continue;
      const Real mu = bound_multiplier(p, x, lambda, i);
      const Real wrong = s == Bound::lower ? -mu : mu;
      if (wrong > worst) {
        worst = wrong;
        release = i;
      }
    }
    if (release < 0) return Outcome{std::move(x), std::move(lambda), it + 1};
    pattern[static_cast<std::size_t>(release)] = Bound::free;
  }
  return std::nullopt;
}

}  // namespace

QpSolution solve_box_qp(const BoxQp& problem, const QpOptions& options) {
  check_problem(problem);
  const Problem p(problem);
  const Eigen::Index m = p.m();
  const double scale = 1 + (m > 0 ? problem.b.cwiseAbs().maxCoeff() : 0.0);

  auto finish = [&](const Outcome& o) {
    QpSolution sol;
    sol.iterations = o.iterations;
    sol.x = o.x.cast<double>();
    sol.lambda = o.lambda.cast<double>();
    sol.objective = problem.h.dot(sol.x.cwiseAbs2());
    sol.balance_residual = m > 0 ? (problem.A * sol.x - problem.b).cwiseAbs().maxCoeff() : 0.0;
    sol.kkt_residual = kkt_residual(problem, sol.x, sol.lambda);
    return sol;
  };
  auto acceptable = [&](const QpSolution& sol) {
    return sol.balance_residual <= 1e-9 * scale && std::isfinite(sol.objective);
  };

  Vec last;
  std::optional<QpSolution> dual;
  if (const auto o = dual_newton(p, options.max_iterations, last)) {
    dual = finish(*o);
    if (acceptable(*dual)) return *dual;
  }
  if (const auto start = feasible_start(p)) {
    const int limit = options.max_iterations * static_cast<int>(std::max<Eigen::Index>(p.n(), 1));
    if (const auto o = primal_active_set(p, *start, limit)) {
      QpSolution sol = finish(*o);
      if (dual) sol.iterations += dual->iterations;
      if (acceptable(sol)) return sol;
    }
  }
  if (dual) {
    throw NumericError("QP constraints cannot be met: residual " + io::format_number(dual->balance_residual));
  }
  throw NumericError("QP did not settle after " + std::to_string(options.max_iterations) +
                     " iterations (residual " +
                     io::format_number(static_cast<double>((p.A * last - p.b).cwiseAbs().maxCoeff())) + ")");
}

}  // namespace exo
