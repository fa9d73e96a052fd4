#include "qs3orao/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numeric>
#include <sstream>

#include "qs3orao/error.hpp"
#include "qs3orao/rng.hpp"

namespace qs3orao {

double auc_rank_sum(std::span<const double> scores, std::span<const bool> is_positive) {
    if (scores.size() != is_positive.size()) {
        throw ValidationError("auc_rank_sum: scores and labels differ in length");
    }
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Ranks are doubled so midranks stay integral.
    std::uint64_t twice_rank_sum = 0;
    std::uint64_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const std::uint64_t twice_mid = static_cast<std::uint64_t>(i + 1 + j);
        for (std::size_t q = i; q < j; ++q) {
            if (is_positive[order[q]]) {
                twice_rank_sum += twice_mid;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::uint64_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw ValidationError("AUC needs both positive and negative scores");
    const std::uint64_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

Metrics score_metrics(std::span<const double> scores, std::span<const int> labels, int k) {
    if (scores.size() != labels.size()) {
        throw ValidationError("score_metrics: scores and labels differ in length");
    }
    Metrics m;
    const auto flags = std::make_unique<bool[]>(labels.size());
    const std::span<const bool> is_pos(flags.get(), labels.size());
    double sum = 0.0;
    int present = 0;
    for (int j = 1; j < k; ++j) {
        std::size_t n_pos = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            flags[i] = labels[i] > j;
            n_pos += flags[i] ? 1 : 0;
        }
        if (n_pos == 0 || n_pos == labels.size()) {
            m.per_subproblem_auc.emplace_back();
            m.warnings.push_back("subproblem " + std::to_string(j) +
                                 " has an empty side; AUC omitted");
            continue;
        }
        const double auc = auc_rank_sum(scores, is_pos);
        m.per_subproblem_auc.emplace_back(auc);
        sum += auc;
        ++present;
    }
    m.overall_auc = present > 0 ? sum / present : std::nan("");
    return m;
}

Metrics evaluate_model(const RankModel& model, const OrdinalDataset& ds) {
    if (ds.k > model.k) {
        throw ValidationError("dataset has " + std::to_string(ds.k) + " classes, model was trained on " +
                              std::to_string(model.k));
    }
    const auto scores = predict_scores(model, ds.features);
    Metrics m = score_metrics(scores, ds.labels, model.k);
    if (!ds.labels.empty()) {
        double abs_err = 0.0;
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const int h = predict_label(scores[i], model.thresholds);
            abs_err += std::abs(h - ds.labels[i]);
            wrong += h != ds.labels[i];
        }
        const auto n = static_cast<double>(ds.labels.size());
        m.mae = abs_err / n;
        m.zero_one_error = static_cast<double>(wrong) / n;
    }
    m.peak_coeff_bytes = model.coefficient_bytes();
    return m;
}

std::vector<BenchRow> bench_scaling(const OrdinalDataset& labeled, const Matrix& unlabeled_source,
                                    const TrainConfig& base_config,
                                    std::span<const std::size_t> unlabeled_sizes,
                                    std::size_t repeats, std::uint64_t seed) {
    if (repeats == 0) throw ConfigError("bench needs at least one repeat");
    if (unlabeled_source.rows() == 0) throw ValidationError("bench needs an unlabeled source pool");
    std::vector<BenchRow> rows;
    for (const std::size_t n_u : unlabeled_sizes) {
        BenchRow row;
        row.n_u = n_u;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            SplitMix64 rng(derive_seed(seed, n_u * 1000003ULL + rep));
            std::vector<std::size_t> idx(unlabeled_source.rows());
            std::iota(idx.begin(), idx.end(), 0);
            shuffle(idx.begin(), idx.end(), rng);
            idx.resize(std::min(n_u, idx.size()));
            while (idx.size() < n_u) idx.push_back(uniform_index(rng, unlabeled_source.rows()));

            SemiSupervisedSplit split;
            split.labeled = labeled;
            split.unlabeled_features = unlabeled_source.select_rows(idx);
            split.split_seed = seed;

            TrainConfig cfg = base_config;
            cfg.master_seed = derive_seed(base_config.master_seed, rep);
            const auto start = std::chrono::steady_clock::now();
            const RankModel model = train(split, cfg);
            const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
            row.trial_ns.push_back(static_cast<std::uint64_t>(ns));
            row.peak_coeff_bytes = std::max<std::uint64_t>(row.peak_coeff_bytes, model.coefficient_bytes());
        }
        row.mean_train_ns = std::accumulate(row.trial_ns.begin(), row.trial_ns.end(), 0.0) /
                            static_cast<double>(row.trial_ns.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string bench_csv(std::span<const BenchRow> rows) {
    std::ostringstream out;
    out << "n_u,mean_train_ns,peak_coeff_bytes\n";
    out.precision(17);
    for (const auto& r : rows) out << r.n_u << ',' << r.mean_train_ns << ',' << r.peak_coeff_bytes << '\n';
    return out.str();
}

}  // namespace qs3orao
