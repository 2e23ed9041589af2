#include "felis/feature_matrix.hpp"

#include <cmath>
#include <unordered_set>

#include "felis/error.hpp"

namespace felis {

FeatureMatrix::FeatureMatrix(Matrix v, std::vector<std::string> ids)
    : values(std::move(v)), pair_ids(std::move(ids)) {
    validate();
}

FeatureMatrix::FeatureMatrix(Matrix v) : values(std::move(v)) {
    pair_ids.reserve(static_cast<std::size_t>(values.rows()));
    for (Eigen::Index i = 0; i < values.rows(); ++i) pair_ids.push_back(std::to_string(i));
    validate();
}

void FeatureMatrix::validate() const {
    if (static_cast<Eigen::Index>(pair_ids.size()) != values.rows()) {
        throw InvalidInput("feature matrix has " + std::to_string(values.rows()) + " rows but " +
                           std::to_string(pair_ids.size()) + " pair ids");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : pair_ids) {
        if (!seen.insert(id).second) {
            throw InvalidInput("duplicate pair id '" + id + "'");
        }
    }
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (!std::isfinite(values(r, c))) {
                throw InvalidInput("non-finite feature value at row " + std::to_string(r) +
                                   " (pair '" + pair_ids[static_cast<std::size_t>(r)] +
                                   "'), column " + std::to_string(c));
            }
        }
    }
}

FeatureMatrix FeatureMatrix::select(const std::vector<Eigen::Index>& rows) const {
    FeatureMatrix out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
    out.pair_ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.values.row(static_cast<Eigen::Index>(i)) = values.row(rows[i]);
        out.pair_ids.push_back(pair_ids[static_cast<std::size_t>(rows[i])]);
    }
    return out;
}

}  // namespace felis
