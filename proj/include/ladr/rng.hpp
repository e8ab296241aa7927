#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace ladr {

// All stochastic behaviour in the library flows through mt19937_64 plus the
// helpers below. The standard pins the mt19937_64 output sequence, while the
// std::uniform_* distributions are implementation-defined, so the helpers
// keep seeded runs reproducible across toolchains.
using rng_engine = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double canonical_double(rng_engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t bounded_uniform(rng_engine& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("bounded_uniform: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

// k distinct elements drawn uniformly from pool via partial Fisher-Yates.
// Result is sorted ascending so downstream iteration order is canonical.
inline std::vector<int> sample_without_replacement(rng_engine& rng,
                                                   std::span<const int> pool,
                                                   std::size_t k) {
    std::vector<int> scratch(pool.begin(), pool.end());
    if (k > scratch.size()) k = scratch.size();
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(
            bounded_uniform(rng, scratch.size() - i));
        std::swap(scratch[i], scratch[j]);
    }
    std::vector<int> out(scratch.begin(), scratch.begin() + static_cast<long>(k));
    std::sort(out.begin(), out.end());
    return out;
}

// Index draw proportional to non-negative weights (not necessarily
// normalized). One canonical_double per call.
inline std::size_t weighted_draw(rng_engine& rng, std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("weighted_draw: zero mass");
    double u = canonical_double(rng) * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return i;
    }
    return weights.size() - 1;
}

} // namespace ladr
