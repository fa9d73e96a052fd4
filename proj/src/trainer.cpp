#include "qs3orao/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "qs3orao/error.hpp"
#include "qs3orao/rng.hpp"
#include "qs3orao/risk.hpp"

namespace qs3orao {

namespace {

constexpr std::uint64_t kSamplingStream = 0x53414D504C45ULL;

// Pair-weighted squared-loss risk over one (first, second) side pairing.
double weighted_pair_risk(const SideSample& first, const SideSample& second,
                          std::span<const double> scores) {
    double r = 0.0;
    for (std::size_t a = 0; a < first.points.size(); ++a) {
        for (std::size_t b = 0; b < second.points.size(); ++b) {
            r += first.weights[a] * second.weights[b] *
                 SquaredPairLoss::value(scores[first.points[a]], scores[second.points[b]]);
        }
    }
    return r;
}

// Adds the derivative terms of one pairing: d_first onto the first point, d_second onto
// the second, each scaled by `scale` times the pair weight.
void accumulate_pairing(const SideSample& first, const SideSample& second,
                        std::span<const double> scores, double scale, std::vector<double>& c) {
    for (std::size_t a = 0; a < first.points.size(); ++a) {
        const std::size_t pa = first.points[a];
        for (std::size_t b = 0; b < second.points.size(); ++b) {
            const std::size_t pb = second.points[b];
            const double w = scale * first.weights[a] * second.weights[b];
            c[pa] += w * SquaredPairLoss::d_first(scores[pa], scores[pb]);
            c[pb] += w * SquaredPairLoss::d_second(scores[pa], scores[pb]);
        }
    }
}

double batch_surrogate_risk(const BatchLayout& layout, std::span<const double> scores,
                            std::span<const double> gamma) {
    std::vector<double> per;
    per.reserve(layout.subproblems.size());
    for (std::size_t j = 0; j < layout.subproblems.size(); ++j) {
        const auto& sp = layout.subproblems[j];
        const double pn = weighted_pair_risk(sp.positive, sp.negative, scores);
        if (gamma[j] == 1.0 || sp.unlabeled.points.empty()) {
            per.push_back(pn);
            continue;
        }
        const double pu = weighted_pair_risk(sp.positive, sp.unlabeled, scores);
        const double nu = weighted_pair_risk(sp.unlabeled, sp.negative, scores);
        per.push_back(risk_pnu(pn, pu, nu, gamma[j]));
    }
    return overall_risk(per);
}

}  // namespace

bool step_condition_holds(double theta, double lambda) noexcept {
    const double p = theta * lambda;
    if (!std::isfinite(p)) return false;
    if (p > 1.0 && p < 2.0) return true;
    const double r = std::round(p);
    return r >= 1.0 && std::abs(p - r) <= 1e-12 * r;
}

void TrainConfig::validate(int k) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("theta must be positive");
    if (!step_condition_holds(theta, lambda)) {
        throw ConfigError("theta * lambda = " + std::to_string(theta * lambda) +
                          " must lie in (1, 2) or be a positive integer; for example set theta = " +
                          std::to_string(1.5 / lambda) + " for lambda = " + std::to_string(lambda));
    }
    KernelSpec{sigma, 1}.validate();
    if (m < 1) throw ConfigError("m (frequencies per iteration) must be at least 1");
    if (t_max < 1) throw ConfigError("iteration count must be at least 1");
    if (batch < 1) throw ConfigError("batch size must be at least 1");
    if (k < 2) throw ConfigError("need at least two classes");
    if (gamma.size() != 1 && gamma.size() != static_cast<std::size_t>(k - 1)) {
        throw ConfigError("gamma needs 1 or k - 1 = " + std::to_string(k - 1) + " values, got " +
                          std::to_string(gamma.size()));
    }
    for (const double g : gamma) {
        if (!(g >= 0.0 && g <= 1.0)) {
            throw ConfigError("every gamma must lie in [0, 1], got " + std::to_string(g));
        }
    }
}

std::vector<double> TrainConfig::gamma_for(int k) const {
    if (gamma.size() == 1) return std::vector<double>(static_cast<std::size_t>(k - 1), gamma[0]);
    return gamma;
}

double step_size(double theta, std::uint64_t i) {
    if (i == 0) throw ValidationError("step sizes are indexed from 1");
    return theta / static_cast<double>(i);
}

IterationBatch sample_iteration_batches(const SemiSupervisedSplit& split,
                                        std::span<const std::vector<std::size_t>> class_rows,
                                        std::size_t batch, std::mt19937_64& rng,
                                        bool draw_unlabeled) {
    const int k = split.k();
    const auto& labeled = split.labeled;
    const std::size_t n_unl = draw_unlabeled ? split.unlabeled_features.rows() : 0;
    const std::size_t n_points = (static_cast<std::size_t>(k) + (n_unl > 0 ? 1 : 0)) * batch;

    IterationBatch out;
    out.points = Matrix(n_points, split.dim());
    out.point_class.resize(n_points);
    out.source_rows.resize(n_points);
    out.layout.num_points = n_points;

    std::size_t p = 0;
    for (int c = 1; c <= k; ++c) {
        const auto& rows = class_rows[c - 1];
        if (rows.empty()) throw ValidationError("class " + std::to_string(c) + " has no labeled rows");
        for (std::size_t s = 0; s < batch; ++s, ++p) {
            const std::size_t r = rows[uniform_index(rng, rows.size())];
            const auto src = labeled.features.row(r);
            std::copy(src.begin(), src.end(), out.points.row(p).begin());
            out.point_class[p] = c;
            out.source_rows[p] = r;
        }
    }
    for (std::size_t s = 0; s < batch && n_unl > 0; ++s, ++p) {
        const std::size_t r = uniform_index(rng, n_unl);
        const auto src = split.unlabeled_features.row(r);
        std::copy(src.begin(), src.end(), out.points.row(p).begin());
        out.point_class[p] = 0;
        out.source_rows[p] = r;
    }

    const double inv_batch = 1.0 / static_cast<double>(batch);
    for (int j = 1; j < k; ++j) {
        SubproblemSample sp;
        std::size_t n_neg = 0;
        std::size_t n_pos = 0;
        for (int c = 1; c <= k; ++c) (c <= j ? n_neg : n_pos) += class_rows[c - 1].size();
        for (int c = 1; c <= k; ++c) {
            auto& side = c <= j ? sp.negative : sp.positive;
            const double share = static_cast<double>(class_rows[c - 1].size()) /
                                 static_cast<double>(c <= j ? n_neg : n_pos);
            for (std::size_t s = 0; s < batch; ++s) {
                side.points.push_back(static_cast<std::size_t>(c - 1) * batch + s);
                side.weights.push_back(share * inv_batch);
            }
        }
        if (n_unl > 0) {
            for (std::size_t s = 0; s < batch; ++s) {
                sp.unlabeled.points.push_back(static_cast<std::size_t>(k) * batch + s);
                sp.unlabeled.weights.push_back(inv_batch);
            }
        }
        out.layout.subproblems.push_back(std::move(sp));
    }
    return out;
}

std::vector<double> functional_weights(const BatchLayout& layout, std::span<const double> scores,
                                       std::span<const double> gamma) {
    if (scores.size() != layout.num_points) {
        throw ValidationError("functional_weights: one score per sampled point expected");
    }
    if (gamma.size() != layout.subproblems.size()) {
        throw ValidationError("functional_weights: one gamma per subproblem expected");
    }
    for (std::size_t p = 0; p < scores.size(); ++p) {
        if (!std::isfinite(scores[p])) {
            throw NumericError("non-finite score at sampled point " + std::to_string(p),
                               layout.iteration);
        }
    }
    std::vector<double> c(layout.num_points, 0.0);
    const double inv = 1.0 / static_cast<double>(layout.subproblems.size());
    for (std::size_t j = 0; j < layout.subproblems.size(); ++j) {
        const auto& sp = layout.subproblems[j];
        const double g = gamma[j];
        if (g != 0.0) accumulate_pairing(sp.positive, sp.negative, scores, inv * g, c);
        if (g != 1.0 && !sp.unlabeled.points.empty()) {
            // PU: positive first, unlabeled second. NU: unlabeled first, negative second.
            accumulate_pairing(sp.positive, sp.unlabeled, scores, inv * (1.0 - g), c);
            accumulate_pairing(sp.unlabeled, sp.negative, scores, inv * (1.0 - g), c);
        }
    }
    return c;
}

std::vector<double> gradient_coefficient(const BatchLayout& layout, std::span<const double> scores,
                                         const Matrix& feats, std::span<const double> gamma,
                                         double eta) {
    if (feats.rows() != layout.num_points) {
        throw ValidationError("gradient_coefficient: one feature row per sampled point expected");
    }
    const auto c = functional_weights(layout, scores, gamma);
    std::vector<double> alpha(feats.cols(), 0.0);
    for (std::size_t p = 0; p < feats.rows(); ++p) {
        if (c[p] == 0.0) continue;
        const auto phi = feats.row(p);
        for (std::size_t q = 0; q < alpha.size(); ++q) alpha[q] += c[p] * phi[q];
    }
    for (auto& a : alpha) a *= -eta;
    return alpha;
}

void decay_coefficients(CoefficientSeries& series, double eta_lambda) {
    const double factor = 1.0 - eta_lambda;
    for (auto& v : series.rows.values()) v *= factor;
}

Trainer::Trainer(const SemiSupervisedSplit& split, TrainConfig config)
    : split_(split), config_(std::move(config)) {
    const int k = split_.k();
    split_.labeled.require_all_classes();
    config_.validate(k);
    if (split_.dim() == 0) throw ValidationError("training data has no features");
    gamma_ = config_.gamma_for(k);
    if (split_.unlabeled_features.rows() == 0) {
        bool changed = false;
        for (auto& g : gamma_) {
            changed = changed || g != 1.0;
            g = 1.0;
        }
        if (changed) {
            warnings_.push_back("unlabeled pool is empty; training on labeled pairs only (gamma = 1)");
        }
    }
    uses_unlabeled_ = std::any_of(gamma_.begin(), gamma_.end(), [](double g) { return g < 1.0; });
    stream_ = FeatureStream{config_.master_seed, config_.m, KernelSpec{config_.sigma, split_.dim()}};
    class_rows_.resize(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < split_.labeled.size(); ++i) {
        class_rows_[split_.labeled.labels[i] - 1].push_back(i);
    }
    rng_.seed(derive_seed(config_.master_seed, kSamplingStream));
    series_.rows = Matrix(0, 2 * config_.m);
}

ProgressRecord Trainer::step() {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t i = ++iteration_;
    const double eta = step_size(config_.theta, i);

    last_batch_ = sample_iteration_batches(split_, class_rows_, config_.batch, rng_, uses_unlabeled_);
    last_batch_.layout.iteration = i;
    const Matrix& points = last_batch_.points;

    // Inline prediction with the i - 1 existing rows, block-outer so each block is
    // regenerated once; the per-point order matches predict_score.
    last_scores_.assign(points.rows(), 0.0);
    std::vector<double> scratch(2 * config_.m);
    Matrix omega;
    for (std::uint64_t r = 1; r < i; ++r) {
        sample_omega_block(stream_, r, omega);
        const auto coeff = series_.rows.row(r - 1);
        for (std::size_t p = 0; p < points.rows(); ++p) {
            last_scores_[p] += block_score(omega, coeff, points.row(p), scratch);
        }
    }

    sample_omega_block(stream_, i, omega);
    Matrix feats(points.rows(), 2 * config_.m);
    for (std::size_t p = 0; p < points.rows(); ++p) feature_map(omega, points.row(p), feats.row(p));

    const auto alpha = gradient_coefficient(last_batch_.layout, last_scores_, feats, gamma_, eta);
    for (const double a : alpha) {
        if (!std::isfinite(a)) throw NumericError("non-finite coefficient", i);
    }
    decay_coefficients(series_, eta * config_.lambda);
    series_.rows.append_row(alpha);

    ProgressRecord rec;
    rec.iteration = i;
    rec.eta = eta;
    rec.surrogate_risk = batch_surrogate_risk(last_batch_.layout, last_scores_, gamma_);
    rec.elapsed_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start)
            .count());
    return rec;
}

RankModel Trainer::snapshot() const {
    RankModel model;
    model.spec = stream_.spec;
    model.master_seed = config_.master_seed;
    model.m = config_.m;
    model.k = split_.k();
    model.coefficients = series_.rows;
    return model;
}

RankModel Trainer::finish() const {
    RankModel model = snapshot();
    const auto scores = predict_scores(model, split_.labeled.features);
    model.thresholds = fit_thresholds(scores, split_.labeled.labels, model.k);
    return model;
}

RankModel train(const SemiSupervisedSplit& split, const TrainConfig& config,
                const ProgressSink& progress) {
    Trainer trainer(split, config);
    for (std::uint64_t i = 0; i < config.t_max; ++i) {
        const auto rec = trainer.step();
        if (progress) progress(rec);
    }
    return trainer.finish();
}

}  // namespace qs3orao
