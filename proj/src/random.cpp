#include "felis/random.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

namespace felis::stats {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Stream seeded_stream(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Stream(seq);
}

std::uint64_t stable_hash(std::string_view text, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h ^ splitmix64(seed));
}

std::uint64_t uniform_below(Stream& rng, std::uint64_t bound) {
    // Reject the top partial block so every residue is equally likely.
    const std::uint64_t limit = Stream::max() - (Stream::max() % bound);
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % bound;
}

double uniform01(Stream& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(Stream& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> random_permutation(std::size_t n, Stream& rng) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t block = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                const std::size_t end = std::min(count, (w + 1) * block);
                for (std::size_t i = w * block; i < end; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace felis::stats
