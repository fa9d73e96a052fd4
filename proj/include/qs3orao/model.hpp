#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qs3orao/features.hpp"
#include "qs3orao/matrix.hpp"
#include "qs3orao/thresholds.hpp"

namespace qs3orao {

/// Trained ranking function plus thresholds. Frequencies are never stored: block i is
/// regenerated from (master_seed, i) whenever a prediction needs it.
struct RankModel {
    KernelSpec spec;
    std::uint64_t master_seed = 0;
    std::size_t m = 1;
    int k = 2;
    Matrix coefficients;  // t x 2m, row i-1 holds alpha_i
    Thresholds thresholds;

    std::uint64_t t() const noexcept { return coefficients.rows(); }
    FeatureStream stream() const { return FeatureStream{master_seed, m, spec}; }
    std::size_t coefficient_bytes() const noexcept {
        return coefficients.values().size() * sizeof(double);
    }
    friend bool operator==(const RankModel&, const RankModel&) = default;
};

/// sum_i <alpha_i, phi_{omega_i}(x)>, accumulated for i ascending.
double predict_score(const RankModel& model, std::span<const double> x);

/// Same per-row arithmetic as `predict_score`, but each block is regenerated once per call.
std::vector<double> predict_scores(const RankModel& model, const Matrix& rows);

std::vector<int> predict_labels(const RankModel& model, const Matrix& rows);

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Layout (little-endian): "QS3O" | version u32 | d u32 | k u32 | m u32 | t u64 |
// sigma f64 | master_seed u64 | (k-1) x f64 thresholds | t x 2m x f64 coefficients |
// CRC-32 of all preceding bytes.
std::vector<std::uint8_t> serialize_model(const RankModel& model);
RankModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const RankModel& model, const std::filesystem::path& path);
RankModel load_model(const std::filesystem::path& path);

}  // namespace qs3orao
