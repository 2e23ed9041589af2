#pragma once

#include <optional>
#include <span>

namespace felis::stats {

struct TestResult {
    double statistic = 0.0;
    double p = 1.0;
};

/// Shapiro-Wilk W and its p-value using Royston's (1995) approximation of
/// the coefficients and the null distribution. Valid for 3 <= n <= 5000;
/// larger samples are reduced to 5000 evenly strided order statistics.
/// Throws InvalidInput for n < 3 and DegenerateInput for zero range.
TestResult shapiro_wilk(std::span<const double> sample);

/// Two-sided one-sample t-test of mean zero. Throws DegenerateInput when the
/// sample standard deviation is zero.
TestResult one_sample_t(std::span<const double> sample);

/// Two-sided Wilcoxon signed-rank test of symmetry about zero. The statistic
/// is W+, the rank sum of positive values. Zeros are dropped and ties get
/// midranks; exact null for up to 25 nonzero values, otherwise the normal
/// approximation with tie and continuity corrections.
TestResult wilcoxon_signed_rank(std::span<const double> sample);

}  // namespace felis::stats
