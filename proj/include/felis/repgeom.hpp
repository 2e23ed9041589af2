#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "felis/feature_matrix.hpp"

/// Representational geometry: centered kernel alignment and RDM-based RSA.
namespace felis::repgeom {

/// RBF bandwidth: a fixed sigma, or the median heuristic evaluated on
/// each input's own pairwise distances.
struct Bandwidth {
    std::optional<double> sigma;

    static Bandwidth median_heuristic() { return {}; }
    static Bandwidth fixed(double s) { return {s}; }
};

/// H K H with H = I - 11^T/n.
Matrix center_gram(const Matrix& gram);

/// tr(K L) / (n - 1)^2. Both inputs are expected to be centered.
double hsic(const Matrix& k, const Matrix& l);

Matrix linear_gram(const Matrix& x);

/// exp(-||x_i - x_j||^2 / (2 sigma^2)).
Matrix rbf_gram(const Matrix& x, double sigma);

/// Median of the nonzero pairwise Euclidean distances between rows.
/// Throws DegenerateInput when all rows coincide.
double median_nonzero_distance(const Matrix& rows);

/// Linear CKA. Throws InvalidInput on row-count mismatch and DegenerateInput
/// when either centered Gram vanishes.
double cka_linear(const Matrix& x, const Matrix& y);

/// RBF CKA. With the median heuristic, x and y each get their own sigma.
double cka_rbf(const Matrix& x, const Matrix& y, Bandwidth bandwidth = Bandwidth::median_heuristic());

/// D_ij = 1 - cos(x_i, x_j), diagonal exactly 0, entries clamped into [0,2].
/// Throws DegenerateInput naming the first zero-norm row.
Matrix rdm_cosine(const Matrix& x);

/// As above; the error names the pair id instead of the row index.
Matrix rdm_cosine(const FeatureMatrix& x);

enum class Correlation { Spearman, Pearson };

struct MantelResult {
    double r = 0.0;
    double p = 1.0;
    std::size_t n_perm = 0;
};

/// Correlation of the upper triangles of two RDMs, with a one-sided
/// permutation p-value (1 + #{r_perm >= r}) / (1 + n_perm). Each
/// permutation reorders rows and columns of `dy` together and draws from
/// its own substream (seed, index), so `workers` never changes the result.
MantelResult mantel(const Matrix& dx, const Matrix& dy, std::size_t n_perm, std::uint64_t seed,
                    Correlation method = Correlation::Spearman, std::size_t workers = 1);

}  // namespace felis::repgeom
