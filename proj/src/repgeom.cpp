#include "felis/repgeom.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "felis/descriptive.hpp"
#include "felis/error.hpp"
#include "felis/random.hpp"

namespace felis::repgeom {

namespace {

// Relative size below which a centered Gram is treated as zero.
constexpr double kDegenerateGram = 1e-12;

// Permutation statistics this close to the observed one count as ties.
constexpr double kTieTolerance = 1e-12;

void require_same_rows(const Matrix& x, const Matrix& y, const char* what) {
    if (x.rows() != y.rows()) {
        throw InvalidInput(std::string(what) + ": row counts differ (" + std::to_string(x.rows()) +
                           " vs " + std::to_string(y.rows()) + ")");
    }
    if (x.rows() < 2) {
        throw InvalidInput(std::string(what) + ": need at least two samples");
    }
}

Matrix squared_distances(const Matrix& x) {
    const Eigen::Index n = x.rows();
    Matrix d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d2(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (x.row(i) - x.row(j)).squaredNorm();
            d2(i, j) = v;
            d2(j, i) = v;
        }
    }
    return d2;
}

// exp(-d2 / 2 sigma^2) - 1. Centering removes the constant, and expm1 keeps
// precision when sigma is large relative to the data.
Matrix rbf_gram_minus_one(const Matrix& x, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidInput("RBF bandwidth must be positive and finite");
    }
    const double scale = -1.0 / (2.0 * sigma * sigma);
    return squared_distances(x).unaryExpr([scale](double v) { return std::expm1(scale * v); });
}

double alignment(const Matrix& k_raw, const Matrix& l_raw, const char* what) {
    const Matrix k = center_gram(k_raw);
    const Matrix l = center_gram(l_raw);
    const double kk = hsic(k, k);
    const double ll = hsic(l, l);
    const auto vanished = [](const Matrix& centered, const Matrix& raw) {
        const double raw_norm = raw.norm();
        return raw_norm == 0.0 || centered.norm() <= kDegenerateGram * raw_norm;
    };
    if (vanished(k, k_raw) || vanished(l, l_raw)) {
        throw DegenerateInput(std::string(what) + ": a centered Gram matrix is zero (constant features)");
    }
    return hsic(k, l) / std::sqrt(kk * ll);
}

}  // namespace

Matrix center_gram(const Matrix& gram) {
    if (gram.rows() != gram.cols()) {
        throw InvalidInput("center_gram: matrix is not square");
    }
    if (gram.rows() == 0) return gram;
    const Eigen::VectorXd row_mean = gram.rowwise().mean();
    const Eigen::RowVectorXd col_mean = gram.colwise().mean();
    const double grand = gram.mean();
    Matrix out = gram;
    out.colwise() -= row_mean;
    out.rowwise() -= col_mean;
    out.array() += grand;
    // Symmetrize away the roundoff asymmetry of the two passes.
    return 0.5 * (out + out.transpose());
}

double hsic(const Matrix& k, const Matrix& l) {
    if (k.rows() != k.cols() || l.rows() != l.cols() || k.rows() != l.rows()) {
        throw InvalidInput("hsic: Gram matrices must be square and of equal size");
    }
    if (k.rows() < 2) {
        throw InvalidInput("hsic: need at least two samples");
    }
    const double n1 = static_cast<double>(k.rows() - 1);
    // tr(KL) = sum_ij K_ij L_ji
    return k.cwiseProduct(l.transpose()).sum() / (n1 * n1);
}

Matrix linear_gram(const Matrix& x) { return x * x.transpose(); }

Matrix rbf_gram(const Matrix& x, double sigma) {
    Matrix k = rbf_gram_minus_one(x, sigma);
    k.array() += 1.0;
    return k;
}

double median_nonzero_distance(const Matrix& rows) {
    std::vector<double> distances;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < rows.rows(); ++j) {
            const double d = (rows.row(i) - rows.row(j)).norm();
            if (d > 0.0) distances.push_back(d);
        }
    }
    if (distances.empty()) {
        throw DegenerateInput("median heuristic: all rows are identical");
    }
    return stats::median(std::move(distances));
}

double cka_linear(const Matrix& x, const Matrix& y) {
    require_same_rows(x, y, "cka_linear");
    return alignment(linear_gram(x), linear_gram(y), "cka_linear");
}

double cka_rbf(const Matrix& x, const Matrix& y, Bandwidth bandwidth) {
    require_same_rows(x, y, "cka_rbf");
    const double sx = bandwidth.sigma ? *bandwidth.sigma : median_nonzero_distance(x);
    const double sy = bandwidth.sigma ? *bandwidth.sigma : median_nonzero_distance(y);
    return alignment(rbf_gram_minus_one(x, sx), rbf_gram_minus_one(y, sy), "cka_rbf");
}

namespace {

Matrix rdm_cosine_impl(const Matrix& x, const std::vector<std::string>* ids) {
    const Eigen::Index n = x.rows();
    const Eigen::VectorXd norms = x.rowwise().norm();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (norms(i) == 0.0) {
            const std::string who = ids ? "pair '" + (*ids)[static_cast<std::size_t>(i)] + "'"
                                        : "row " + std::to_string(i);
            throw DegenerateInput("rdm_cosine: " + who + " has zero norm");
        }
    }
    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double cosine = x.row(i).dot(x.row(j)) / (norms(i) * norms(j));
            const double v = std::clamp(1.0 - cosine, 0.0, 2.0);
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

}  // namespace

Matrix rdm_cosine(const Matrix& x) { return rdm_cosine_impl(x, nullptr); }

Matrix rdm_cosine(const FeatureMatrix& x) { return rdm_cosine_impl(x.values, &x.pair_ids); }

MantelResult mantel(const Matrix& dx, const Matrix& dy, std::size_t n_perm, std::uint64_t seed,
                    Correlation method, std::size_t workers) {
    const Eigen::Index n = dx.rows();
    if (dx.cols() != n || dy.rows() != n || dy.cols() != n) {
        throw InvalidInput("mantel: RDMs must be square and of equal size");
    }
    if (n < 3) {
        throw InvalidInput("mantel: need at least three samples");
    }
    if (n_perm < 1) {
        throw InvalidInput("mantel: need at least one permutation");
    }

    const auto pairs = static_cast<std::size_t>(n * (n - 1) / 2);
    std::vector<double> ux;
    std::vector<double> uy;
    ux.reserve(pairs);
    uy.reserve(pairs);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            ux.push_back(dx(i, j));
            uy.push_back(dy(i, j));
        }
    }
    if (method == Correlation::Spearman) {
        ux = stats::midranks(ux);
        uy = stats::midranks(uy);
    }

    // Permuting dy only reorders the multiset of its upper-triangle values,
    // so its mean and spread are fixed; only the cross term changes.
    Matrix y_values = Matrix::Zero(n, n);
    {
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
                y_values(i, j) = uy[k];
                y_values(j, i) = uy[k];
            }
        }
    }
    const double mean_x = stats::mean(ux);
    const double mean_y = stats::mean(uy);
    double ssx = 0.0;
    double ssy = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
        ux[k] -= mean_x;
        ssx += ux[k] * ux[k];
        ssy += (uy[k] - mean_y) * (uy[k] - mean_y);
    }
    if (ssx == 0.0 || ssy == 0.0) {
        throw DegenerateInput("mantel: an RDM has a constant upper triangle");
    }
    const double denom = std::sqrt(ssx * ssy);

    auto statistic = [&](const std::vector<std::size_t>& perm) {
        double cross = 0.0;
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto pi = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
                const auto pj = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]);
                cross += ux[k] * (y_values(pi, pj) - mean_y);
            }
        }
        return cross / denom;
    };

    std::vector<std::size_t> identity(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;

    MantelResult result;
    result.r = statistic(identity);
    result.n_perm = n_perm;

    std::vector<double> null(n_perm);
    stats::parallel_for(n_perm, workers, [&](std::size_t b) {
        stats::Stream rng = stats::seeded_stream(seed, b);
        null[b] = statistic(stats::random_permutation(static_cast<std::size_t>(n), rng));
    });
    const auto exceed = std::count_if(null.begin(), null.end(), [&](double v) {
        return v >= result.r - kTieTolerance;
    });
    result.p = (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(n_perm));
    return result;
}

}  // namespace felis::repgeom
