#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qs3orao/data.hpp"
#include "qs3orao/rng.hpp"

namespace qs3orao::testing {

inline double normal(SplitMix64& rng) {
    double z0;
    double z1;
    standard_normal_pair(rng, z0, z1);
    return z0;
}

/// Gaussian blobs on a line: class c (1-based) centred at means[c-1] in every coordinate.
inline OrdinalDataset gaussian_classes(std::span<const double> means, std::size_t per_class,
                                       std::size_t d, double noise, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const std::size_t k = means.size();
    Matrix x(k * per_class, d);
    std::vector<int> y(k * per_class);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const std::size_t c = i % k;
        y[i] = static_cast<int>(c) + 1;
        for (std::size_t j = 0; j < d; ++j) x(i, j) = means[c] + noise * normal(rng);
    }
    return OrdinalDataset::create(std::move(x), std::move(y));
}

/// 1-D three-class problem with class means -2, 0, +2.
inline OrdinalDataset separable_1d(std::size_t per_class, std::uint64_t seed, double noise = 0.3) {
    const double means[] = {-2.0, 0.0, 2.0};
    return gaussian_classes(means, per_class, 1, noise, seed);
}

/// Small 2-D three-class problem used by the exact-kernel checks.
inline OrdinalDataset desk_problem(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const int k = 3;
    Matrix x(n, 2);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = 1 + static_cast<int>(i % k);
        for (std::size_t c = 0; c < 2; ++c) x(i, c) = 0.5 * (y[i] - 2) + 0.5 * normal(rng);
    }
    return OrdinalDataset::create(std::move(x), std::move(y));
}

inline std::vector<double> random_scores(SplitMix64& rng, std::size_t n, int levels) {
    std::vector<double> s(n);
    for (auto& v : s) {
        v = levels > 0 ? static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(levels)))
                       : normal(rng);
    }
    return s;
}

}  // namespace qs3orao::testing
