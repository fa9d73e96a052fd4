#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qs3orao/matrix.hpp"

namespace qs3orao {

/// Gaussian kernel k(x, x') = exp(-sigma * ||x - x'||^2) on R^d.
struct KernelSpec {
    double sigma = 1.0;
    std::size_t d = 0;

    void validate() const;
    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

double kernel_exact(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// Seeded source of frequency blocks. Block i is a pure function of (master_seed, i),
/// so features are regenerated on demand instead of stored.
struct FeatureStream {
    std::uint64_t master_seed = 0;
    std::size_t m = 1;  // frequencies per block; feature dimension is 2m
    KernelSpec spec;

    std::uint64_t block_seed(std::uint64_t i) const noexcept;
};

/// m x d matrix of frequencies drawn i.i.d. from N(0, 2 sigma I). Requires i >= 1.
Matrix sample_omega_block(const FeatureStream& stream, std::uint64_t i);
/// Same block, written into `out` (resized to m x d).
void sample_omega_block(const FeatureStream& stream, std::uint64_t i, Matrix& out);

/// Fills `out` (length 2m) with [cos(w_r.x) ..., sin(w_r.x) ...] / sqrt(m).
void feature_map(const Matrix& omega, std::span<const double> x, std::span<double> out);
std::vector<double> feature_map(const Matrix& omega, std::span<const double> x);

/// <coeff, phi(x)> summed left to right. Shared by training and prediction so that
/// both produce bit-identical scores. `scratch` must hold 2m values.
double block_score(const Matrix& omega, std::span<const double> coeff, std::span<const double> x,
                   std::span<double> scratch);

}  // namespace qs3orao
