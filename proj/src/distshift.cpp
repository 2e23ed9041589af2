#include "felis/distshift.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/SVD>

#include "felis/descriptive.hpp"
#include "felis/error.hpp"
#include "felis/normality.hpp"
#include "felis/random.hpp"

namespace felis::shift {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kZeroVariance = 1e-12;

Matrix stack(const Matrix& x, const Matrix& y) {
    if (x.cols() != y.cols()) {
        throw InvalidInput("feature dimensions differ (" + std::to_string(x.cols()) + " vs " +
                           std::to_string(y.cols()) + ")");
    }
    Matrix pooled(x.rows() + y.rows(), x.cols());
    pooled << x, y;
    return pooled;
}

Matrix pairwise(const Matrix& rows, const std::function<double(double)>& of_squared_distance) {
    const Eigen::Index n = rows.rows();
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i, i) = of_squared_distance(0.0);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = of_squared_distance((rows.row(i) - rows.row(j)).squaredNorm());
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

struct BlockSums {
    double xx = 0.0;  // over ordered pairs i != j within x
    double yy = 0.0;
    double xy = 0.0;
};

// Sums of `table` over the blocks induced by taking the first m entries of
// `labels` as x and the rest as y.
BlockSums block_sums(const Matrix& table, const std::vector<std::size_t>& labels, std::size_t m) {
    BlockSums s;
    const std::size_t total = labels.size();
    for (std::size_t a = 0; a < total; ++a) {
        const auto ia = static_cast<Eigen::Index>(labels[a]);
        for (std::size_t b = a + 1; b < total; ++b) {
            const double v = table(ia, static_cast<Eigen::Index>(labels[b]));
            if (b < m) {
                s.xx += 2.0 * v;
            } else if (a >= m) {
                s.yy += 2.0 * v;
            } else {
                s.xy += v;
            }
        }
    }
    return s;
}

double mmd_from_sums(const BlockSums& s, double m, double n) {
    return s.xx / (m * (m - 1.0)) + s.yy / (n * (n - 1.0)) - 2.0 * s.xy / (m * n);
}

double energy_from_sums(const BlockSums& s, double m, double n) {
    return 2.0 * s.xy / (m * n) - s.xx / (m * m) - s.yy / (n * n);
}

ShiftResult permutation_test(const Matrix& table, std::size_t m, std::size_t n, std::size_t n_perm,
                             std::uint64_t seed, std::size_t workers,
                             double (*from_sums)(const BlockSums&, double, double)) {
    if (n_perm < 1) {
        throw InvalidInput("permutation test: need at least one permutation");
    }
    const double dm = static_cast<double>(m);
    const double dn = static_cast<double>(n);
    std::vector<std::size_t> identity(m + n);
    std::iota(identity.begin(), identity.end(), 0);

    ShiftResult result;
    result.n_x = m;
    result.n_y = n;
    result.statistic = from_sums(block_sums(table, identity, m), dm, dn);

    std::vector<double> null(n_perm);
    stats::parallel_for(n_perm, workers, [&](std::size_t b) {
        stats::Stream rng = stats::seeded_stream(seed, b);
        null[b] = from_sums(block_sums(table, stats::random_permutation(m + n, rng), m), dm, dn);
    });
    const double tol = kTieTolerance * std::max(1.0, std::abs(result.statistic));
    const auto exceed = std::count_if(null.begin(), null.end(),
                                      [&](double v) { return v >= result.statistic - tol; });
    result.p_value = (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(n_perm));
    return result;
}

}  // namespace

double median_heuristic(const Matrix& x, const Matrix& y) {
    return repgeom::median_nonzero_distance(stack(x, y));
}

double mmd_unbiased(const Matrix& x, const Matrix& y, double sigma) {
    if (x.rows() < 2 || y.rows() < 2) {
        throw InvalidInput("mmd_unbiased: each sample needs at least two rows");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidInput("mmd_unbiased: bandwidth must be positive and finite");
    }
    const Matrix pooled = stack(x, y);
    const double scale = -1.0 / (2.0 * sigma * sigma);
    const Matrix k = pairwise(pooled, [scale](double d2) { return std::exp(scale * d2); });
    const auto m = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> identity(static_cast<std::size_t>(pooled.rows()));
    std::iota(identity.begin(), identity.end(), 0);
    return mmd_from_sums(block_sums(k, identity, m), static_cast<double>(x.rows()),
                         static_cast<double>(y.rows()));
}

ShiftResult mmd_perm_test(const Matrix& x, const Matrix& y, repgeom::Bandwidth bandwidth,
                          std::size_t n_perm, std::uint64_t seed, std::size_t workers) {
    if (x.rows() < 2 || y.rows() < 2) {
        throw InvalidInput("mmd_perm_test: each sample needs at least two rows");
    }
    const double sigma = bandwidth.sigma ? *bandwidth.sigma : median_heuristic(x, y);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidInput("mmd_perm_test: bandwidth must be positive and finite");
    }
    const double scale = -1.0 / (2.0 * sigma * sigma);
    const Matrix k = pairwise(stack(x, y), [scale](double d2) { return std::exp(scale * d2); });
    ShiftResult result = permutation_test(k, static_cast<std::size_t>(x.rows()),
                                          static_cast<std::size_t>(y.rows()), n_perm, seed,
                                          workers, mmd_from_sums);
    result.bandwidth_used = sigma;
    return result;
}

double energy_distance(const Matrix& x, const Matrix& y) {
    if (x.rows() < 1 || y.rows() < 1) {
        throw InvalidInput("energy_distance: samples must be non-empty");
    }
    const Matrix pooled = stack(x, y);
    const Matrix d = pairwise(pooled, [](double d2) { return std::sqrt(d2); });
    std::vector<std::size_t> identity(static_cast<std::size_t>(pooled.rows()));
    std::iota(identity.begin(), identity.end(), 0);
    return energy_from_sums(block_sums(d, identity, static_cast<std::size_t>(x.rows())),
                            static_cast<double>(x.rows()), static_cast<double>(y.rows()));
}

ShiftResult energy_perm_test(const Matrix& x, const Matrix& y, std::size_t n_perm,
                             std::uint64_t seed, std::size_t workers) {
    if (x.rows() < 2 || y.rows() < 2) {
        throw InvalidInput("energy_perm_test: each sample needs at least two rows");
    }
    const Matrix d = pairwise(stack(x, y), [](double d2) { return std::sqrt(d2); });
    return permutation_test(d, static_cast<std::size_t>(x.rows()),
                            static_cast<std::size_t>(y.rows()), n_perm, seed, workers,
                            energy_from_sums);
}

Eigen::VectorXd principal_axis(const Matrix& rows) {
    if (rows.rows() < 2 || rows.cols() < 1) {
        throw InvalidInput("principal_axis: need at least two rows and one column");
    }
    const Matrix centered = rows.rowwise() - rows.colwise().mean();
    const double raw_norm = rows.norm();
    if (raw_norm == 0.0 || centered.norm() <= kZeroVariance * raw_norm) {
        throw DegenerateInput("principal_axis: rows have zero variance");
    }
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    Eigen::VectorXd axis = svd.matrixV().col(0);
    Eigen::Index lead = 0;
    for (Eigen::Index i = 1; i < axis.size(); ++i) {
        if (std::abs(axis(i)) > std::abs(axis(lead))) lead = i;
    }
    if (axis(lead) < 0.0) axis = -axis;
    return axis;
}

double w1_sorted(std::vector<double> s, std::vector<double> t) {
    if (s.size() != t.size() || s.empty()) {
        throw InvalidInput("w1_sorted: samples must be non-empty and of equal size");
    }
    std::sort(s.begin(), s.end());
    std::sort(t.begin(), t.end());
    double total = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) total += std::abs(s[k] - t[k]);
    return total / static_cast<double>(s.size());
}

ShiftResult w1_projected(const Matrix& x, const Matrix& y) {
    if (x.rows() != y.rows()) {
        throw InvalidInput("w1_projected: paired design requires equal sample counts (" +
                           std::to_string(x.rows()) + " vs " + std::to_string(y.rows()) + ")");
    }
    const Eigen::VectorXd w = principal_axis(stack(x, y));
    const Eigen::VectorXd s = x * w;
    const Eigen::VectorXd t = y * w;
    ShiftResult result;
    result.statistic = w1_sorted(std::vector<double>(s.data(), s.data() + s.size()),
                                 std::vector<double>(t.data(), t.data() + t.size()));
    result.n_x = static_cast<std::size_t>(x.rows());
    result.n_y = static_cast<std::size_t>(y.rows());
    return result;
}

PairedSimilarity paired_similarity(const FeatureMatrix& x, const FeatureMatrix& y) {
    if (x.n() != y.n() || x.d() != y.d()) {
        throw InvalidInput("paired_similarity: matrices differ in shape");
    }
    if (x.n() == 0) {
        throw InvalidInput("paired_similarity: no pairs");
    }
    PairedSimilarity out;
    const auto n = static_cast<std::size_t>(x.n());
    out.cosines.reserve(n);
    out.distances.reserve(n);
    for (Eigen::Index i = 0; i < x.n(); ++i) {
        const double nx = x.values.row(i).norm();
        const double ny = y.values.row(i).norm();
        if (nx == 0.0 || ny == 0.0) {
            throw DegenerateInput("paired_similarity: pair '" +
                                  x.pair_ids[static_cast<std::size_t>(i)] + "' has a zero-norm row");
        }
        out.cosines.push_back(x.values.row(i).dot(y.values.row(i)) / (nx * ny));
        out.distances.push_back((x.values.row(i) - y.values.row(i)).norm());
    }
    out.mean_cosine = stats::mean(out.cosines);
    out.mean_l2 = stats::mean(out.distances);
    return out;
}

std::string to_string(PairedTest test) { return test == PairedTest::T ? "t" : "wilcoxon"; }

PairedStability paired_shift_test(const FeatureMatrix& x, const FeatureMatrix& y,
                                  double alpha_normality) {
    if (x.n() != y.n() || x.d() != y.d()) {
        throw InvalidInput("paired_shift_test: matrices differ in shape");
    }
    if (x.n() < 4) {
        throw InvalidInput("paired_shift_test: need at least four pairs");
    }
    const PairedSimilarity sim = paired_similarity(x, y);
    PairedStability out;
    out.mean_cosine = sim.mean_cosine;
    out.mean_l2 = sim.mean_l2;

    const Matrix diff = x.values - y.values;
    Eigen::VectorXd axis;
    try {
        axis = principal_axis(diff);
    } catch (const DegenerateInput&) {
        // Identical differences: project on their common direction instead.
        const Eigen::VectorXd shift = diff.colwise().mean().transpose();
        axis = shift.norm() > 0.0 ? Eigen::VectorXd(shift / shift.norm())
                                  : Eigen::VectorXd::Zero(diff.cols());
    }
    const Eigen::VectorXd d = diff * axis;
    out.projections.assign(d.data(), d.data() + d.size());

    const auto [lo, hi] = std::minmax_element(out.projections.begin(), out.projections.end());
    if (*hi - *lo == 0.0) {
        out.degenerate = true;
        out.test_type = PairedTest::T;
        out.shapiro_p = 1.0;
        out.p_value = out.projections.front() == 0.0 ? 1.0 : 0.0;
        return out;
    }
    out.shapiro_p = stats::shapiro_wilk(out.projections).p;
    if (out.shapiro_p > alpha_normality) {
        const auto t = stats::one_sample_t(out.projections);
        out.test_type = PairedTest::T;
        out.statistic = t.statistic;
        out.p_value = t.p;
    } else {
        const auto w = stats::wilcoxon_signed_rank(out.projections);
        out.test_type = PairedTest::Wilcoxon;
        out.statistic = w.statistic;
        out.p_value = w.p;
    }
    return out;
}

}  // namespace felis::shift
