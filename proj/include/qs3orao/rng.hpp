#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>

// Random-number plumbing with fully specified output sequences. The standard
// distributions are implementation-defined, so the library draws its own
// uniforms and normals on top of these engines to keep results stable across
// toolchains.

namespace qs3orao {

__extension__ using uint128_t = unsigned __int128;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Avalanche mix of a master seed with a stream index. Pure; stable across versions.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream) noexcept;

/// Counter-based SplitMix64 engine. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Uniform double in the open interval (0, 1), 53 random bits.
template <class Engine>
double uniform_open01(Engine& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Unbiased integer in [0, n) via multiply-shift with rejection. n must be > 0.
template <class Engine>
std::size_t uniform_index(Engine& eng, std::size_t n) {
    const auto bound = static_cast<std::uint64_t>(n);
    std::uint64_t x = eng();
    auto m = static_cast<uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = eng();
            m = static_cast<uint128_t>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

/// Standard normal pair by the Marsaglia polar method.
template <class Engine>
void standard_normal_pair(Engine& eng, double& z0, double& z1);

/// Fisher-Yates shuffle driven by `uniform_index`.
template <class Engine, class It>
void shuffle(It first, It last, Engine& eng) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = uniform_index(eng, i);
        using std::swap;
        swap(first[i - 1], first[j]);
    }
}

}  // namespace qs3orao

#include <cmath>

template <class Engine>
void qs3orao::standard_normal_pair(Engine& eng, double& z0, double& z1) {
    double u;
    double v;
    double s;
    do {
        u = 2.0 * uniform_open01(eng) - 1.0;
        v = 2.0 * uniform_open01(eng) - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    z0 = u * f;
    z1 = v * f;
}
