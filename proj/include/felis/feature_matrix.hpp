#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace felis {

using Matrix = Eigen::MatrixXd;

/// n paired samples by d features. Row i belongs to pair_ids[i].
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> pair_ids;

    FeatureMatrix() = default;

    /// Validates: ids match the row count, are unique, and every entry is finite.
    FeatureMatrix(Matrix values, std::vector<std::string> ids);

    /// Ids default to "0", "1", ...
    explicit FeatureMatrix(Matrix values);

    Eigen::Index n() const noexcept { return values.rows(); }
    Eigen::Index d() const noexcept { return values.cols(); }

    /// Rows whose index appears in `rows`, in that order.
    FeatureMatrix select(const std::vector<Eigen::Index>& rows) const;

    void validate() const;
};

}  // namespace felis
