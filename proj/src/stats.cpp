#include "pspace/stats.hpp"

#include <algorithm>
#include <cmath>

#include "pspace/error.hpp"

namespace pspace::stats {

double quantile(std::span<const double> data, double q) {
  if (data.empty()) throw UndefinedError("quantile of an empty sample");
  if (q < 0.0 || q > 1.0) throw Error("quantile level outside [0, 1]");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double interquartile_range(std::span<const double> data) {
  if (data.size() < 4) {
    throw UndefinedError("interquartile range needs at least 4 values, got " +
                         std::to_string(data.size()));
  }
  return quantile(data, 0.75) - quantile(data, 0.25);
}

double mean(std::span<const double> data) {
  if (data.empty()) throw UndefinedError("mean of an empty sample");
  double s = 0.0;
  for (double v : data) s += v;
  return s / static_cast<double>(data.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: samples differ in length");
  if (x.size() < 2) throw UndefinedError("correlation needs at least 2 pairs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedError("correlation undefined: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

std::size_t bin_index(double value, double width, std::size_t bins) {
  if (bins == 0) return 0;
  const double raw = std::floor(value / width + 1e-9);
  if (raw <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(raw), bins - 1);
}

std::vector<std::size_t> histogram(std::span<const double> data, double lo, double hi,
                                   std::size_t bins) {
  std::vector<std::size_t> counts(bins, 0);
  if (bins == 0 || !(hi > lo)) return counts;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : data) {
    if (v < lo || v > hi || std::isnan(v)) continue;
    ++counts[bin_index(v - lo, width, bins)];
  }
  return counts;
}

}  // namespace pspace::stats
