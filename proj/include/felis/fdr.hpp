#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace felis::stats {

struct PvalueEntry {
    std::string model;
    std::string layer;
    std::string metric;
    double p = 1.0;
};

/// All p-values collected over a run, one per (model, layer, metric).
struct PvalueGrid {
    std::vector<PvalueEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
};

/// Per-entry results in the grid's original order.
struct FdrOutcome {
    std::vector<double> q_values;
    std::vector<bool> rejected;
    std::size_t k = 0;  ///< number of rejections
};

/// Benjamini-Hochberg step-up at level `q`. Equal p-values are ordered by
/// (model, layer, metric). Throws InvalidInput for an empty grid, duplicate
/// keys, p outside [0,1] or q outside (0,1).
FdrOutcome bh_fdr(const PvalueGrid& grid, double q = 0.05);

/// Same procedure on bare p-values; ties ordered by position.
FdrOutcome bh_fdr(std::span<const double> p_values, double q = 0.05);

}  // namespace felis::stats
