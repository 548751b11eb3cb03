#pragma once

#include <array>
#include <optional>
#include <vector>

#include "exo/gait.hpp"

namespace exo {

struct PhaseStats {
  double rmse_cycle = 0;
  std::array<std::optional<double>, kPhaseCount> rmse{};
  /// 100 (ptp(a) - ptp(b)) / ptp(a); undefined when ptp(a) is zero or the
  /// phase holds no sample.
  std::array<std::optional<double>, kPhaseCount> ptp_diff_pct{};
  std::optional<double> ptp_diff_cycle_pct;
};

/// Compares series `b` against reference `a` sampled on `pct`. The closing
/// sample at the end of the grid counts toward the last phase.
PhaseStats rmse_per_phase(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& pct,
                          const PhaseTable& phases);

struct MedianIqr {
  double median = 0;
  double iqr = 0;
};

/// Quartiles by linear interpolation between order statistics at
/// position (n - 1) p. Throws DomainError on empty input.
double quantile(std::vector<double> values, double p);
MedianIqr median_iqr(const std::vector<double>& values);

}  // namespace exo
