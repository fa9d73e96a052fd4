#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qs3orao/data.hpp"
#include "qs3orao/features.hpp"
#include "qs3orao/matrix.hpp"
#include "qs3orao/model.hpp"

namespace qs3orao {

struct TrainConfig {
    double lambda = 1.0;
    double theta = 1.5;
    double sigma = 1.0;
    std::vector<double> gamma{0.5};  // one shared value, or one per subproblem
    std::size_t m = 64;
    std::uint64_t t_max = 1000;
    std::size_t batch = 16;
    std::uint64_t master_seed = 1;

    /// Checks every invariant for a k-class problem, including the step-size
    /// condition theta * lambda in (1, 2) or a positive integer.
    void validate(int k) const;
    /// Gamma expanded to k - 1 entries.
    std::vector<double> gamma_for(int k) const;
};

/// True when theta * lambda lies in (1, 2) or is a positive integer.
bool step_condition_holds(double theta, double lambda) noexcept;

/// eta_i = theta / i.
double step_size(double theta, std::uint64_t i);

/// One side of a subproblem's sample: point indices with weights summing to one.
struct SideSample {
    std::vector<std::size_t> points;
    std::vector<double> weights;
};

struct SubproblemSample {
    SideSample positive;
    SideSample negative;
    SideSample unlabeled;
};

/// How the sampled points of one iteration are shared by the k - 1 subproblems.
struct BatchLayout {
    std::size_t num_points = 0;
    std::vector<SubproblemSample> subproblems;
    std::uint64_t iteration = 0;
};

/// Points sampled in one iteration: `batch` rows per class, then `batch` unlabeled rows.
/// Class c's slots are points [c*batch, (c+1)*batch); unlabeled slots follow.
struct IterationBatch {
    Matrix points;
    std::vector<int> point_class;  // 1..k, or 0 for unlabeled points
    std::vector<std::size_t> source_rows;
    BatchLayout layout;
};

/// Draws one iteration's batches with replacement and assembles the k - 1 views from
/// them. Within a side, each class is weighted by its share of that side in the labeled
/// set, so the weighted pair averages are unbiased for the full empirical risks.
/// With an empty unlabeled pool, or `draw_unlabeled` false, the unlabeled sides are left
/// empty and no unlabeled rows are drawn.
IterationBatch sample_iteration_batches(const SemiSupervisedSplit& split,
                                        std::span<const std::vector<std::size_t>> class_rows,
                                        std::size_t batch, std::mt19937_64& rng,
                                        bool draw_unlabeled = true);

/// Per-point weights c_p of the stochastic functional gradient sum_p c_p k(x_p, .),
/// using squared-loss derivatives averaged over the batch pairings. Includes 1/(k-1).
std::vector<double> functional_weights(const BatchLayout& layout, std::span<const double> scores,
                                       std::span<const double> gamma);

/// alpha = -eta * sum_p c_p phi(x_p), where `feats` holds phi(x_p) row by row.
std::vector<double> gradient_coefficient(const BatchLayout& layout, std::span<const double> scores,
                                         const Matrix& feats, std::span<const double> gamma,
                                         double eta);

/// Rows populated so far after i - 1 steps, row r holding alpha_{r+1}.
struct CoefficientSeries {
    Matrix rows;
};

/// Scales every existing row by (1 - eta_lambda).
void decay_coefficients(CoefficientSeries& series, double eta_lambda);

/// One record per iteration.
struct ProgressRecord {
    std::uint64_t iteration = 0;
    double eta = 0.0;
    double surrogate_risk = 0.0;
    std::uint64_t elapsed_ns = 0;  // wall time of this iteration
};

using ProgressSink = std::function<void(const ProgressRecord&)>;

/// Step-wise training loop. `train` drives it to completion; tests and the oracle
/// step it manually to inspect intermediate states.
class Trainer {
public:
    Trainer(const SemiSupervisedSplit& split, TrainConfig config);

    /// Runs iteration `iteration() + 1`.
    ProgressRecord step();

    std::uint64_t iteration() const noexcept { return iteration_; }
    const CoefficientSeries& coefficients() const noexcept { return series_; }
    const TrainConfig& config() const noexcept { return config_; }
    const std::vector<double>& gamma() const noexcept { return gamma_; }

    /// Scores evaluated inline during the most recent step (before its update).
    const std::vector<double>& last_scores() const noexcept { return last_scores_; }
    const IterationBatch& last_batch() const noexcept { return last_batch_; }

    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// Current ranking function with empty thresholds.
    RankModel snapshot() const;

    /// Current ranking function with thresholds fitted on the labeled scores.
    RankModel finish() const;

private:
    const SemiSupervisedSplit& split_;
    TrainConfig config_;
    std::vector<double> gamma_;
    bool uses_unlabeled_ = true;
    FeatureStream stream_;
    std::vector<std::vector<std::size_t>> class_rows_;
    std::mt19937_64 rng_;
    CoefficientSeries series_;
    std::uint64_t iteration_ = 0;
    std::vector<double> last_scores_;
    IterationBatch last_batch_;
    std::vector<std::string> warnings_;
};

RankModel train(const SemiSupervisedSplit& split, const TrainConfig& config,
                const ProgressSink& progress = {});

}  // namespace qs3orao
