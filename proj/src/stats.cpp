#include "exo/stats.hpp"

#include <algorithm>
#include <cmath>

#include "exo/errors.hpp"

namespace exo {

namespace {

struct Accumulator {
  double sq = 0;
  std::size_t count = 0;
  double a_min = 0, a_max = 0, b_min = 0, b_max = 0;

  void add(double a, double b) {
    const double d = b - a;
    sq += d * d;
    if (count == 0) {
      a_min = a_max = a;
      b_min = b_max = b;
    } else {
      a_min = std::min(a_min, a);
      a_max = std::max(a_max, a);
      b_min = std::min(b_min, b);
      b_max = std::max(b_max, b);
    }
    ++count;
  }

  std::optional<double> rmse() const {
    if (count == 0) return std::nullopt;
    return std::sqrt(sq / static_cast<double>(count));
  }

  std::optional<double> ptp_diff() const {
    const double pa = a_max - a_min;
    if (count == 0 || pa == 0) return std::nullopt;
    return 100 * (pa - (b_max - b_min)) / pa;
  }
};

}  // namespace

PhaseStats rmse_per_phase(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& pct,
                          const PhaseTable& phases) {
  if (a.size() != b.size() || a.size() != pct.size()) throw DataError("series must share the same grid");
  if (a.empty()) throw DataError("series are empty");
  Accumulator whole;
  std::array<Accumulator, kPhaseCount> per{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    whole.add(a[i], b[i]);
    for (std::size_t k = 0; k < kPhaseCount; ++k) {
      const bool last = k + 1 == kPhaseCount;
      if (phases[k].contains(pct[i]) || (last && pct[i] >= phases[k].end_pct)) {
        per[k].add(a[i], b[i]);
        break;
      }
    }
  }
  PhaseStats s;
  s.rmse_cycle = *whole.rmse();
  s.ptp_diff_cycle_pct = whole.ptp_diff();
  for (std::size_t k = 0; k < kPhaseCount; ++k) {
    s.rmse[k] = per[k].rmse();
    s.ptp_diff_pct[k] = per[k].ptp_diff();
  }
  return s;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile of an empty set");
  if (!(p >= 0 && p <= 1)) throw DomainError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

MedianIqr median_iqr(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("median of an empty set");
  return {quantile(values, 0.5), quantile(values, 0.75) - quantile(values, 0.25)};
}

}  // namespace exo
