#pragma once

#include <span>
#include <vector>

namespace felis::stats {

/// 1-based ranks with ties assigned their average rank.
std::vector<double> midranks(std::span<const double> values);

/// Pearson correlation; NaN when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);

/// Median of a non-empty sample (mean of the two middle values for even sizes).
double median(std::vector<double> values);

double mean(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> values);

}  // namespace felis::stats
