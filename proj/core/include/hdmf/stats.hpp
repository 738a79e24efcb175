#pragma once

#include <span>

namespace hdmf {

struct WilcoxonResult {
  double statistic = 0.0;  // W+, sum of ranks of positive differences
  double p = 1.0;          // two-sided
  int n_used = 0;          // non-zero differences
  bool exact = false;
  bool all_zero = false;   // every difference was zero: p reported as 1
};

/// Paired two-sided Wilcoxon signed-rank test. Zero differences are dropped
/// and tied magnitudes get average ranks. Exact null distribution (over all
/// 2^n sign flips of the observed ranks) for n <= 20, otherwise the normal
/// approximation with tie and continuity correction. Throws DataError on
/// length mismatch or when fewer than 5 non-zero differences remain (unless
/// all differences are zero).
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

inline constexpr int kWilcoxonExactMaxN = 20;
inline constexpr int kWilcoxonMinPairs = 5;

/// atanh(clamp(r, -1 + 1e-7, 1 - 1e-7)).
double fisher_z(double r);

}  // namespace hdmf
