#include "felis/normality.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "felis/descriptive.hpp"
#include "felis/error.hpp"

namespace felis::stats {

namespace {

constexpr std::size_t kShapiroMax = 5000;
constexpr std::size_t kWilcoxonExactMax = 25;

template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double result = 0.0;
    for (std::size_t i = N; i-- > 0;) result = result * x + c[i];
    return result;
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_upper(double x, double mean, double sd) {
    return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(mean, sd), x));
}

}  // namespace

TestResult shapiro_wilk(std::span<const double> sample) {
    if (sample.size() < 3) {
        throw InvalidInput("shapiro_wilk: need at least three values");
    }
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    if (x.size() > kShapiroMax) {
        std::vector<double> reduced(kShapiroMax);
        const double step = static_cast<double>(x.size() - 1) / static_cast<double>(kShapiroMax - 1);
        for (std::size_t i = 0; i < kShapiroMax; ++i) {
            reduced[i] = x[static_cast<std::size_t>(std::llround(static_cast<double>(i) * step))];
        }
        x = std::move(reduced);
    }
    const std::size_t n = x.size();
    const double an = static_cast<double>(n);
    const double range = x.back() - x.front();
    if (!(range > 0.0)) {
        throw DegenerateInput("shapiro_wilk: sample has zero range");
    }

    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
    static constexpr double g[] = {-2.273, 0.459};

    // Coefficients for the lower half; the upper half mirrors with a sign flip.
    const std::size_t half = n / 2;
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
    } else {
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - m[0] / ssumm2;
        std::size_t first = 1;
        double fac = 0.0;
        if (n > 5) {
            first = 2;
            const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
        } else {
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
    }

    // W is the squared correlation of the ordered sample with the coefficients.
    std::vector<double> coef(n, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        coef[i] = -a[i];
        coef[n - 1 - i] = a[i];
    }
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = x[i] / range;
    const double mean_c = mean(coef);
    const double mean_x = mean(scaled);
    double ssa = 0.0;
    double ssx = 0.0;
    double sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dc = coef[i] - mean_c;
        const double dx = scaled[i] - mean_x;
        ssa += dc * dc;
        ssx += dx * dx;
        sax += dc * dx;
    }
    const double root = std::sqrt(ssa * ssx);
    // 1 - W, formed to avoid cancellation when W is close to 1.
    const double w1 = (root - sax) * (root + sax) / (ssa * ssx);
    TestResult result;
    result.statistic = 1.0 - w1;

    if (n == 3) {
        constexpr double six_over_pi = 6.0 / std::numbers::pi;
        constexpr double third_pi = std::numbers::pi / 3.0;
        result.p = std::max(0.0, six_over_pi * (std::asin(std::sqrt(result.statistic)) - third_pi));
        return result;
    }
    double y = std::log(w1);
    double mu = 0.0;
    double sd = 0.0;
    if (n <= 11) {
        const double gamma = poly(g, an);
        if (y >= gamma) {
            result.p = 1e-99;
            return result;
        }
        y = -std::log(gamma - y);
        mu = poly(c3, an);
        sd = std::exp(poly(c4, an));
    } else {
        const double ln_n = std::log(an);
        mu = poly(c5, ln_n);
        sd = std::exp(poly(c6, ln_n));
    }
    result.p = normal_upper(y, mu, sd);
    return result;
}

TestResult one_sample_t(std::span<const double> sample) {
    if (sample.size() < 2) {
        throw InvalidInput("one_sample_t: need at least two values");
    }
    const double sd = sample_sd(sample);
    if (sd == 0.0) {
        throw DegenerateInput("one_sample_t: zero standard deviation");
    }
    const double n = static_cast<double>(sample.size());
    TestResult result;
    result.statistic = mean(sample) / (sd / std::sqrt(n));
    const boost::math::students_t_distribution<double> dist(n - 1.0);
    result.p = std::min(
        1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.statistic))));
    return result;
}

TestResult wilcoxon_signed_rank(std::span<const double> sample) {
    std::vector<double> nonzero;
    for (double v : sample) {
        if (v != 0.0) nonzero.push_back(v);
    }
    TestResult result;
    const std::size_t n = nonzero.size();
    if (n == 0) {
        result.statistic = 0.0;
        result.p = 1.0;
        return result;
    }
    std::vector<double> magnitudes(n);
    for (std::size_t i = 0; i < n; ++i) magnitudes[i] = std::abs(nonzero[i]);
    const std::vector<double> ranks = midranks(magnitudes);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (nonzero[i] > 0.0) w_plus += ranks[i];
    }
    result.statistic = w_plus;
    const double nn = static_cast<double>(n);
    const double expected = nn * (nn + 1.0) / 4.0;

    if (n <= kWilcoxonExactMax) {
        // Midranks are multiples of 1/2, so doubled ranks are integers.
        std::vector<std::size_t> doubled(n);
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
            total += doubled[i];
        }
        std::vector<double> counts(total + 1, 0.0);
        counts[0] = 1.0;
        std::size_t reach = 0;
        for (std::size_t r : doubled) {
            reach += r;
            for (std::size_t s = reach; s >= r; --s) {
                counts[s] += counts[s - r];
                if (s == r) break;
            }
        }
        const auto observed = static_cast<std::size_t>(std::llround(2.0 * w_plus));
        const double all = std::ldexp(1.0, static_cast<int>(n));
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t s = 0; s <= total; ++s) {
            if (s <= observed) lower += counts[s];
            if (s >= observed) upper += counts[s];
        }
        result.p = std::min(1.0, 2.0 * std::min(lower, upper) / all);
        return result;
    }

    double tie_term = 0.0;
    {
        std::vector<double> sorted = magnitudes;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i + 1;
            while (j < n && sorted[j] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i);
            tie_term += t * t * t - t;
            i = j;
        }
    }
    const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double deviation = std::abs(w_plus - expected) - 0.5;
    if (deviation <= 0.0 || variance <= 0.0) {
        result.p = 1.0;
        return result;
    }
    result.p = std::min(1.0, 2.0 * normal_upper(deviation / std::sqrt(variance), 0.0, 1.0));
    return result;
}

}  // namespace felis::stats
