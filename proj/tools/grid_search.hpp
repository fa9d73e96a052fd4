#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qs3orao/data.hpp"
#include "qs3orao/trainer.hpp"

namespace qs3orao::cli {

/// Log-spaced grid {2^lo, ..., 2^hi}.
std::vector<double> power_of_two_grid(int lo, int hi);

/// {0, 0.1, ..., 1}.
std::vector<double> default_gamma_grid();

/// Partitions labeled row indices into `folds` validation folds. Each training part
/// keeps every class and each validation fold holds at least two classes; otherwise the
/// assignment is redrawn from the same seed stream.
std::vector<std::vector<std::size_t>> make_folds(const OrdinalDataset& labeled, std::size_t folds,
                                                 std::uint64_t seed);

struct GridCell {
    double lambda = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
    std::vector<double> fold_auc;
    double mean_auc = 0.0;
};

struct GridResult {
    std::vector<GridCell> cells;
    std::size_t best = 0;
};

struct GridSpec {
    std::vector<double> lambdas;
    std::vector<double> sigmas;
    std::vector<double> gammas;
    double theta_lambda = 1.5;  // theta is set to theta_lambda / lambda per cell
    std::size_t folds = 5;
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
};

/// Cross-validates every (lambda, sigma, gamma) cell over the labeled rows; the unlabeled
/// pool is shared by all folds. Picks the best mean validation AUC, ties going to the
/// larger lambda, then to the earlier cell.
GridResult grid_search(const SemiSupervisedSplit& split, const TrainConfig& base, const GridSpec& grid);

}  // namespace qs3orao::cli
