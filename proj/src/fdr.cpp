#include "felis/fdr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "felis/error.hpp"

namespace felis::stats {

namespace {

void check_inputs(std::span<const double> p_values, double q) {
    if (p_values.empty()) {
        throw InvalidInput("bh_fdr: no p-values");
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw InvalidInput("bh_fdr: FDR level must lie in (0,1)");
    }
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        const double p = p_values[i];
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw InvalidInput("bh_fdr: p-value " + std::to_string(i) + " outside [0,1]");
        }
    }
}

// `order` lists entry indices by ascending p.
FdrOutcome step_up(std::span<const double> p, const std::vector<std::size_t>& order, double q) {
    const std::size_t m = p.size();
    const double total = static_cast<double>(m);
    FdrOutcome out;
    out.q_values.assign(m, 1.0);
    out.rejected.assign(m, false);

    for (std::size_t rank = m; rank >= 1; --rank) {
        if (p[order[rank - 1]] <= static_cast<double>(rank) / total * q) {
            out.k = rank;
            break;
        }
    }
    double running = 1.0;
    for (std::size_t rank = m; rank >= 1; --rank) {
        const std::size_t idx = order[rank - 1];
        running = std::min(running, total / static_cast<double>(rank) * p[idx]);
        out.q_values[idx] = std::min(running, 1.0);
    }
    for (std::size_t rank = 1; rank <= out.k; ++rank) out.rejected[order[rank - 1]] = true;
    return out;
}

}  // namespace

FdrOutcome bh_fdr(const PvalueGrid& grid, double q) {
    std::vector<double> p;
    p.reserve(grid.size());
    std::set<std::tuple<std::string, std::string, std::string>> keys;
    for (const PvalueEntry& e : grid.entries) {
        if (!keys.emplace(e.model, e.layer, e.metric).second) {
            throw InvalidInput("bh_fdr: duplicate grid key " + e.model + "/" + e.layer + "/" +
                               e.metric);
        }
        p.push_back(e.p);
    }
    check_inputs(p, q);

    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ea = grid.entries[a];
        const auto& eb = grid.entries[b];
        return std::tie(ea.p, ea.model, ea.layer, ea.metric) <
               std::tie(eb.p, eb.model, eb.layer, eb.metric);
    });
    return step_up(p, order, q);
}

FdrOutcome bh_fdr(std::span<const double> p_values, double q) {
    check_inputs(p_values, q);
    std::vector<std::size_t> order(p_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    return step_up(p_values, order, q);
}

}  // namespace felis::stats
