#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qs3orao/data.hpp"
#include "qs3orao/model.hpp"
#include "qs3orao/trainer.hpp"

namespace qs3orao {

/// Mann-Whitney AUC with midranks for ties: P(score_pos > score_neg) + 1/2 P(tie).
/// O(n log n). Throws when either class is absent.
double auc_rank_sum(std::span<const double> scores, std::span<const bool> is_positive);

struct Metrics {
    double overall_auc = 0.0;
    std::vector<std::optional<double>> per_subproblem_auc;  // absent when a side is empty
    double mae = 0.0;
    double zero_one_error = 0.0;
    std::uint64_t train_ns = 0;
    std::uint64_t peak_coeff_bytes = 0;
    std::vector<std::string> warnings;
};

/// Overall and per-subproblem AUC of `scores` against ordinal `labels` in 1..k.
/// Subproblems with an empty side are reported absent and left out of the mean.
Metrics score_metrics(std::span<const double> scores, std::span<const int> labels, int k);

/// Scores the dataset with the model, adds label metrics from its thresholds.
Metrics evaluate_model(const RankModel& model, const OrdinalDataset& ds);

struct BenchRow {
    std::size_t n_u = 0;
    double mean_train_ns = 0.0;
    std::uint64_t peak_coeff_bytes = 0;
    std::vector<std::uint64_t> trial_ns;
};

/// Trains on `labeled` plus an unlabeled pool of each requested size, `repeats` times.
/// Pools are drawn from `unlabeled_source` (with replacement once it is exhausted).
std::vector<BenchRow> bench_scaling(const OrdinalDataset& labeled, const Matrix& unlabeled_source,
                                    const TrainConfig& base_config,
                                    std::span<const std::size_t> unlabeled_sizes,
                                    std::size_t repeats, std::uint64_t seed);

std::string bench_csv(std::span<const BenchRow> rows);

}  // namespace qs3orao
