#include "felis/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "felis/error.hpp"

namespace felis::stats {

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        throw InvalidInput("mean of an empty sample");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) {
        throw InvalidInput("standard deviation needs at least two values");
    }
    const double mu = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw InvalidInput("pearson: inputs must be non-empty and of equal length");
    }
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw InvalidInput("median of an empty sample");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower =
        *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace felis::stats
