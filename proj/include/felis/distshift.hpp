#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "felis/feature_matrix.hpp"
#include "felis/repgeom.hpp"

/// Distributional shift between two samples, and paired per-sample tests.
namespace felis::shift {

struct ShiftResult {
    double statistic = 0.0;
    std::optional<double> p_value;
    std::optional<double> bandwidth_used;
    std::size_t n_x = 0;
    std::size_t n_y = 0;
};

/// Median of the nonzero pairwise distances over the pooled rows of x and y.
double median_heuristic(const Matrix& x, const Matrix& y);

/// Unbiased (U-statistic) squared MMD with an RBF kernel. Needs m, n >= 2.
double mmd_unbiased(const Matrix& x, const Matrix& y, double sigma);

/// Label-permutation test for mmd_unbiased with the add-one p-value. The
/// median heuristic is computed once on the pooled sample.
ShiftResult mmd_perm_test(const Matrix& x, const Matrix& y, repgeom::Bandwidth bandwidth,
                          std::size_t n_perm, std::uint64_t seed, std::size_t workers = 1);

/// V-statistic energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'|.
double energy_distance(const Matrix& x, const Matrix& y);

ShiftResult energy_perm_test(const Matrix& x, const Matrix& y, std::size_t n_perm,
                             std::uint64_t seed, std::size_t workers = 1);

/// Leading principal axis of the mean-centered rows, unit length, with its
/// largest-magnitude component made positive. Throws DegenerateInput when
/// the rows have no variance.
Eigen::VectorXd principal_axis(const Matrix& rows);

/// 1-Wasserstein distance between x and y projected on the leading axis of
/// their pooled rows. Requires equal row counts.
ShiftResult w1_projected(const Matrix& x, const Matrix& y);

/// Exact 1-D W1 between two equal-size samples via order statistics.
double w1_sorted(std::vector<double> s, std::vector<double> t);

struct PairedSimilarity {
    double mean_cosine = 0.0;
    double mean_l2 = 0.0;
    std::vector<double> cosines;
    std::vector<double> distances;
};

/// Per-pair cosine similarity and Euclidean distance. Throws DegenerateInput
/// naming the pair when a row has zero norm.
PairedSimilarity paired_similarity(const FeatureMatrix& x, const FeatureMatrix& y);

enum class PairedTest { T, Wilcoxon };

std::string to_string(PairedTest test);

struct PairedStability {
    double mean_cosine = 0.0;
    double mean_l2 = 0.0;
    PairedTest test_type = PairedTest::T;
    std::optional<double> statistic;  ///< absent when the projections are all equal
    double p_value = 1.0;
    double shapiro_p = 1.0;
    bool degenerate = false;
    std::vector<double> projections;  ///< d_i
};

/// Projects x_i - y_i on the leading axis of the differences, then applies
/// Shapiro-Wilk: p > alpha_normality selects the two-sided paired t-test,
/// otherwise the Wilcoxon signed-rank test. When all projections are equal
/// the result is degenerate with p = 1 for a zero mean and p = 0 otherwise.
PairedStability paired_shift_test(const FeatureMatrix& x, const FeatureMatrix& y,
                                  double alpha_normality = 0.05);

}  // namespace felis::shift
