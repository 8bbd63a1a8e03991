#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pspace::stats {

// Quantile with linear interpolation between order statistics: position
// h = (n - 1) q over the sorted sample.
double quantile(std::span<const double> data, double q);

// Q3 - Q1 under the same interpolation rule. Needs at least 4 values.
double interquartile_range(std::span<const double> data);

double mean(std::span<const double> data);

// Throws UndefinedError for fewer than 2 points or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Equal-width bins over [lo, hi]; values equal to hi land in the last bin,
// values outside are ignored.
std::vector<std::size_t> histogram(std::span<const double> data, double lo, double hi,
                                   std::size_t bins);

// Bin index for `value` in bins of `width` starting at 0, clamped to
// [0, bins - 1]. Tolerates rounding (0.3 / 0.1 lands in bin 3).
std::size_t bin_index(double value, double width, std::size_t bins);

}  // namespace pspace::stats
