#include "hdmf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "hdmf/error.hpp"

namespace hdmf {

double fisher_z(double r) {
  constexpr double kClamp = 1e-7;
  return std::atanh(std::clamp(r, -1.0 + kClamp, 1.0 - kClamp));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("wilcoxon_signed_rank: paired samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (!std::isfinite(diff)) throw DataError("wilcoxon_signed_rank: non-finite difference");
    if (diff != 0.0) d.push_back(diff);
  }
  WilcoxonResult res;
  res.n_used = static_cast<int>(d.size());
  if (d.empty()) {
    res.all_zero = true;
    return res;
  }
  if (res.n_used < kWilcoxonMinPairs) {
    throw DataError("wilcoxon_signed_rank: need at least " + std::to_string(kWilcoxonMinPairs) +
                    " non-zero paired differences, got " + std::to_string(res.n_used));
  }

  // Doubled average ranks stay integral: tie group [i, j) gets i + j + 1.
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(d[x]) < std::abs(d[y]); });
  std::vector<long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && std::abs(d[order[j]]) == std::abs(d[order[i]])) ++j;
    const auto t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) rank2[order[k]] = static_cast<long>(i + j + 1);
    i = j;
  }
  long w2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0.0) w2 += rank2[i];
  }
  res.statistic = 0.5 * static_cast<double>(w2);

  const double nd = static_cast<double>(n);
  if (res.n_used <= kWilcoxonExactMaxN) {
    res.exact = true;
    const long total2 = std::accumulate(rank2.begin(), rank2.end(), 0L);
    // counts[s] = number of sign patterns whose positive doubled-rank sum is s.
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1.0;
    long reach = 0;
    for (long r : rank2) {
      for (long s = reach; s >= 0; --s) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
      reach += r;
    }
    double lower = 0.0, upper = 0.0;
    for (long s = 0; s <= total2; ++s) {
      if (s <= w2) lower += counts[static_cast<std::size_t>(s)];
      if (s >= w2) upper += counts[static_cast<std::size_t>(s)];
    }
    const double denom = std::ldexp(1.0, res.n_used);
    res.p = std::min(1.0, 2.0 * std::min(lower, upper) / denom);
  } else {
    const double mean = nd * (nd + 1.0) / 4.0;
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) {
      res.p = 1.0;
    } else {
      const double z = std::max(0.0, std::abs(res.statistic - mean) - 0.5) / std::sqrt(var);
      res.p = std::clamp(std::erfc(z / std::sqrt(2.0)), std::numeric_limits<double>::min(), 1.0);
    }
  }
  return res;
}

}  // namespace hdmf
