#pragma once

// Exact-kernel reference implementations. These are verification tools: they build
// dense Gram matrices and are meant for desk-scale problems (a few hundred rows).

#include <cstdint>
#include <span>
#include <vector>

#include "qs3orao/data.hpp"
#include "qs3orao/features.hpp"
#include "qs3orao/matrix.hpp"
#include "qs3orao/trainer.hpp"

namespace qs3orao::oracle {

/// h(x) = sum_i weights_i k(anchors_i, x).
struct ExactFunction {
    Matrix anchors;
    std::vector<double> weights;
    KernelSpec spec;

    double operator()(std::span<const double> x) const;
    std::vector<double> evaluate(const Matrix& rows) const;
};

Matrix gram_matrix(const KernelSpec& spec, const Matrix& a, const Matrix& b);

/// Labeled rows followed by unlabeled rows.
Matrix anchor_rows(const SemiSupervisedSplit& split);

/// The zero function on the split's anchors.
ExactFunction zero_function(const SemiSupervisedSplit& split, const KernelSpec& spec);

/// sqrt(w^T K w).
double rkhs_norm(const ExactFunction& h);

/// lambda/2 ||h||^2 + (1/(k-1)) sum_j [gamma_j R_PN + (1 - gamma_j)(R_PU + R_NU - 1/2)]
/// with the squared pairwise loss and full empirical means. `h` must live on the
/// split's anchors.
double exact_objective(const ExactFunction& h, const SemiSupervisedSplit& split, double lambda,
                       std::span<const double> gamma);

/// Full functional gradient of `exact_objective`, as a function on the split's anchors.
ExactFunction exact_full_gradient(const ExactFunction& h, const SemiSupervisedSplit& split,
                                  double lambda, std::span<const double> gamma);

struct SolveOptions {
    std::size_t max_iters = 20000;
    double step = 0.5;       // probe step for the curvature estimate; fallback step
    double rel_tol = 1e-10;  // stop when ||grad|| <= rel_tol * ||grad_0||
};

/// Reference minimizer by functional steepest descent with exact line search and
/// backtracking.
/// Throws NumericError (carrying the iteration count) when it does not converge.
ExactFunction batch_solve_exact(const SemiSupervisedSplit& split, const KernelSpec& spec,
                                double lambda, std::span<const double> gamma,
                                const SolveOptions& options = {});

/// Exact-kernel stochastic gradient of one frozen batch: the quantity the random-feature
/// update estimates. Anchored on the batch points.
ExactFunction exact_stochastic_gradient(const IterationBatch& batch, std::span<const double> scores,
                                        std::span<const double> gamma, const KernelSpec& spec);

struct McReport {
    std::vector<double> exact;            // exact gradient at each probe
    std::vector<double> mean;             // Monte-Carlo mean of the feature-based update
    std::vector<double> standard_errors;  // per probe
    double max_abs_dev = 0.0;
    double standard_error = 0.0;  // largest per-probe standard error
    double max_z = 0.0;           // largest |mean - exact| / SE over probes
};

/// Averages the random-feature update implied by `gradient_coefficient` over `n_seeds`
/// independent frequency blocks and compares it with the exact-kernel gradient.
McReport mc_unbiasedness_check(std::span<const double> frozen_scores,
                               const IterationBatch& frozen_instances, std::span<const double> gamma,
                               const KernelSpec& spec, std::size_t m, std::size_t n_seeds,
                               const Matrix& probes, std::uint64_t seed = 1);

/// `n` points drawn uniformly from the bounding box of `data`.
Matrix probe_grid(const Matrix& data, std::size_t n, std::uint64_t seed);

struct ConvergenceTrace {
    std::vector<std::uint64_t> checkpoints;
    std::vector<double> mean_sq_error;             // averaged over seeds
    std::vector<std::vector<double>> per_seed;     // [seed][checkpoint]
    double slope = 0.0;                            // least-squares log-log slope
};

/// Pointwise squared error of the stochastic trainer against the exact minimizer on a
/// probe grid, at each checkpoint, for `n_seeds` master seeds derived from config's.
ConvergenceTrace convergence_trace(const SemiSupervisedSplit& split, const TrainConfig& config,
                                   std::span<const std::uint64_t> checkpoints, std::size_t n_seeds,
                                   std::size_t n_probes = 50, const SolveOptions& options = {});

double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace qs3orao::oracle
