#include "grid_search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "qs3orao/error.hpp"
#include "qs3orao/eval.hpp"
#include "qs3orao/model.hpp"
#include "qs3orao/rng.hpp"

namespace qs3orao::cli {

std::vector<double> power_of_two_grid(int lo, int hi) {
    std::vector<double> g;
    for (int e = lo; e <= hi; ++e) g.push_back(std::ldexp(1.0, e));
    return g;
}

std::vector<double> default_gamma_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
    return g;
}

std::vector<std::vector<std::size_t>> make_folds(const OrdinalDataset& labeled, std::size_t folds,
                                                 std::uint64_t seed) {
    const std::size_t n = labeled.size();
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (folds > n) throw ConfigError("more folds than labeled rows");
    const auto counts = labeled.class_counts();
    SplitMix64 rng(derive_seed(seed, 0xF01D5ULL));
    std::vector<std::size_t> order(n);
    for (int attempt = 0; attempt < 256; ++attempt) {
        std::iota(order.begin(), order.end(), 0);
        shuffle(order.begin(), order.end(), rng);
        std::vector<std::vector<std::size_t>> out(folds);
        for (std::size_t i = 0; i < n; ++i) out[i % folds].push_back(order[i]);
        bool ok = true;
        for (auto& fold : out) {
            std::sort(fold.begin(), fold.end());
            std::vector<std::size_t> held(counts.size(), 0);
            for (const auto r : fold) ++held[labeled.labels[r] - 1];
            std::size_t distinct = 0;
            for (std::size_t c = 0; c < counts.size(); ++c) {
                if (held[c] == counts[c]) ok = false;  // training part would lose class c + 1
                distinct += held[c] > 0;
            }
            if (distinct < 2) ok = false;
        }
        if (ok) return out;
    }
    throw ValidationError("could not draw folds that keep every class in each training part");
}

namespace {

SemiSupervisedSplit fold_split(const SemiSupervisedSplit& split, const std::vector<std::size_t>& held) {
    std::vector<std::size_t> train_rows;
    std::size_t h = 0;
    for (std::size_t i = 0; i < split.labeled.size(); ++i) {
        if (h < held.size() && held[h] == i) {
            ++h;
            continue;
        }
        train_rows.push_back(i);
    }
    std::vector<int> labels;
    for (const auto r : train_rows) labels.push_back(split.labeled.labels[r]);
    SemiSupervisedSplit out;
    out.labeled = OrdinalDataset::create(split.labeled.features.select_rows(train_rows), std::move(labels),
                                         split.k());
    out.unlabeled_features = split.unlabeled_features;
    out.split_seed = split.split_seed;
    return out;
}

}  // namespace

GridResult grid_search(const SemiSupervisedSplit& split, const TrainConfig& base, const GridSpec& grid) {
    if (grid.lambdas.empty() || grid.sigmas.empty() || grid.gammas.empty()) {
        throw ConfigError("every grid needs at least one value");
    }
    const auto folds = make_folds(split.labeled, grid.folds, grid.seed);
    std::vector<SemiSupervisedSplit> train_parts;
    std::vector<OrdinalDataset> held_parts;
    for (const auto& held : folds) {
        train_parts.push_back(fold_split(split, held));
        std::vector<int> labels;
        for (const auto r : held) labels.push_back(split.labeled.labels[r]);
        held_parts.push_back(
            OrdinalDataset::create(split.labeled.features.select_rows(held), std::move(labels), split.k()));
    }

    GridResult result;
    for (const double l : grid.lambdas) {
        for (const double s : grid.sigmas) {
            for (const double g : grid.gammas) result.cells.push_back(GridCell{l, s, g, {}, 0.0});
        }
    }
    // Validate every cell up front so configuration errors surface before any training.
    for (const auto& cell : result.cells) {
        TrainConfig cfg = base;
        cfg.lambda = cell.lambda;
        cfg.theta = grid.theta_lambda / cell.lambda;
        cfg.sigma = cell.sigma;
        cfg.gamma = {cell.gamma};
        cfg.validate(split.k());
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t c = next.fetch_add(1);
            if (c >= result.cells.size()) return;
            try {
                auto& cell = result.cells[c];
                TrainConfig cfg = base;
                cfg.lambda = cell.lambda;
                cfg.theta = grid.theta_lambda / cell.lambda;
                cfg.sigma = cell.sigma;
                cfg.gamma = {cell.gamma};
                double sum = 0.0;
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    const RankModel model = train(train_parts[f], cfg);
                    const auto scores = predict_scores(model, held_parts[f].features);
                    const double auc = score_metrics(scores, held_parts[f].labels, split.k()).overall_auc;
                    cell.fold_auc.push_back(auc);
                    sum += auc;
                }
                cell.mean_auc = sum / static_cast<double>(folds.size());
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = result.cells.size();
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(grid.jobs, result.cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < jobs; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    for (std::size_t c = 1; c < result.cells.size(); ++c) {
        const auto& cand = result.cells[c];
        const auto& best = result.cells[result.best];
        if (cand.mean_auc > best.mean_auc ||
            (cand.mean_auc == best.mean_auc && cand.lambda > best.lambda)) {
            result.best = c;
        }
    }
    return result;
}

}  // namespace qs3orao::cli
