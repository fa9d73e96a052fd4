#include "qs3orao/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qs3orao/error.hpp"
#include "qs3orao/model.hpp"
#include "qs3orao/risk.hpp"
#include "qs3orao/rng.hpp"

namespace qs3orao::oracle {

namespace {

struct IndexSets {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
};

// Anchor-space view of the exact problem: Gram matrix plus the per-subproblem index
// sets (labeled anchors come first, unlabeled anchors after them).
struct ExactProblem {
    Matrix gram;
    std::vector<IndexSets> sets;
    std::vector<std::size_t> unl;
    std::vector<double> gamma;
    double lambda = 0.0;

    ExactProblem(const SemiSupervisedSplit& split, const KernelSpec& spec, double lam,
                 std::span<const double> g)
        : gamma(g.begin(), g.end()), lambda(lam) {
        const int k = split.k();
        if (gamma.size() != static_cast<std::size_t>(k - 1)) {
            throw ValidationError("oracle: need one gamma per subproblem");
        }
        const Matrix anchors = anchor_rows(split);
        gram = gram_matrix(spec, anchors, anchors);
        const std::size_t n_l = split.labeled.size();
        for (int j = 1; j < k; ++j) {
            IndexSets s;
            for (std::size_t i = 0; i < n_l; ++i) {
                (split.labeled.labels[i] > j ? s.pos : s.neg).push_back(i);
            }
            if (s.pos.empty() || s.neg.empty()) {
                throw ValidationError("oracle: subproblem " + std::to_string(j) + " has an empty side");
            }
            sets.push_back(std::move(s));
        }
        for (std::size_t i = n_l; i < anchors.rows(); ++i) unl.push_back(i);
        const bool need_unl = std::any_of(gamma.begin(), gamma.end(), [](double v) { return v < 1.0; });
        if (need_unl && unl.empty()) throw ValidationError("oracle: unlabeled pool is empty");
    }

    std::vector<double> values(std::span<const double> w) const {
        std::vector<double> s(gram.rows(), 0.0);
        for (std::size_t i = 0; i < gram.rows(); ++i) {
            const auto row = gram.row(i);
            double acc = 0.0;
            for (std::size_t q = 0; q < row.size(); ++q) acc += row[q] * w[q];
            s[i] = acc;
        }
        return s;
    }

    static void moments(std::span<const double> s, const std::vector<std::size_t>& idx, double& mean,
                        double& var) {
        double m = 0.0;
        for (const auto i : idx) m += s[i];
        m /= static_cast<double>(idx.size());
        double v = 0.0;
        for (const auto i : idx) v += (s[i] - m) * (s[i] - m);
        mean = m;
        var = v / static_cast<double>(idx.size());
    }

    // Mean of (1 - a + b)^2 over independent a in A, b in B.
    static double squared_pair_mean(double ma, double va, double mb, double vb) {
        const double d = 1.0 - ma + mb;
        return d * d + va + vb;
    }

    double risk(std::span<const double> s) const {
        double total = 0.0;
        double mu = 0.0;
        double vu = 0.0;
        if (!unl.empty()) moments(s, unl, mu, vu);
        for (std::size_t j = 0; j < sets.size(); ++j) {
            double mp, vp, mn, vn;
            moments(s, sets[j].pos, mp, vp);
            moments(s, sets[j].neg, mn, vn);
            const double pn = squared_pair_mean(mp, vp, mn, vn);
            double r = pn;
            if (gamma[j] < 1.0) {
                const double pu = squared_pair_mean(mp, vp, mu, vu);
                const double nu = squared_pair_mean(mu, vu, mn, vn);
                r = risk_pnu(pn, pu, nu, gamma[j]);
            }
            total += r;
        }
        return total / static_cast<double>(sets.size());
    }

    double objective(std::span<const double> w) const {
        const auto s = values(w);
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) norm_sq += w[i] * s[i];
        return 0.5 * lambda * norm_sq + risk(s);
    }

    // Functional gradient weights on the anchors.
    std::vector<double> gradient(std::span<const double> w) const {
        const auto s = values(w);
        std::vector<double> g(w.size(), 0.0);
        const double inv_k = 1.0 / static_cast<double>(sets.size());
        double mu = 0.0;
        double vu = 0.0;
        if (!unl.empty()) moments(s, unl, mu, vu);
        const double n_u = static_cast<double>(unl.size());
        for (std::size_t j = 0; j < sets.size(); ++j) {
            const auto& P = sets[j].pos;
            const auto& N = sets[j].neg;
            double mp, vp, mn, vn;
            moments(s, P, mp, vp);
            moments(s, N, mn, vn);
            const double n_p = static_cast<double>(P.size());
            const double n_n = static_cast<double>(N.size());
            const double a = inv_k * gamma[j];
            for (const auto p : P) g[p] += a / n_p * -2.0 * (1.0 - s[p] + mn);
            for (const auto n : N) g[n] += a / n_n * 2.0 * (1.0 - mp + s[n]);
            if (gamma[j] < 1.0) {
                const double b = inv_k * (1.0 - gamma[j]);
                for (const auto p : P) g[p] += b / n_p * -2.0 * (1.0 - s[p] + mu);
                for (const auto u : unl) g[u] += b / n_u * 2.0 * (1.0 - mp + s[u]);
                for (const auto u : unl) g[u] += b / n_u * -2.0 * (1.0 - s[u] + mn);
                for (const auto n : N) g[n] += b / n_n * 2.0 * (1.0 - mu + s[n]);
            }
        }
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += lambda * w[i];
        return g;
    }

    double norm(std::span<const double> w) const {
        const auto s = values(w);
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * s[i];
        return std::sqrt(std::max(acc, 0.0));
    }
};

void require_on_anchors(const ExactFunction& h, const SemiSupervisedSplit& split) {
    const std::size_t n = split.labeled.size() + split.unlabeled_features.rows();
    if (h.weights.size() != n || h.anchors.rows() != n) {
        throw ValidationError("oracle: function must be anchored on the split's rows");
    }
}

}  // namespace

double ExactFunction::operator()(std::span<const double> x) const {
    double f = 0.0;
    for (std::size_t i = 0; i < anchors.rows(); ++i) f += weights[i] * kernel_exact(spec, anchors.row(i), x);
    return f;
}

std::vector<double> ExactFunction::evaluate(const Matrix& rows) const {
    std::vector<double> out(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) out[r] = (*this)(rows.row(r));
    return out;
}

Matrix gram_matrix(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    Matrix g(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) g(i, j) = kernel_exact(spec, a.row(i), b.row(j));
    }
    return g;
}

Matrix anchor_rows(const SemiSupervisedSplit& split) {
    Matrix out(0, split.dim());
    out.reserve_rows(split.labeled.size() + split.unlabeled_features.rows());
    for (std::size_t i = 0; i < split.labeled.size(); ++i) out.append_row(split.labeled.features.row(i));
    for (std::size_t i = 0; i < split.unlabeled_features.rows(); ++i) {
        out.append_row(split.unlabeled_features.row(i));
    }
    return out;
}

ExactFunction zero_function(const SemiSupervisedSplit& split, const KernelSpec& spec) {
    ExactFunction h;
    h.anchors = anchor_rows(split);
    h.weights.assign(h.anchors.rows(), 0.0);
    h.spec = spec;
    return h;
}

double rkhs_norm(const ExactFunction& h) {
    const Matrix g = gram_matrix(h.spec, h.anchors, h.anchors);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < g.cols(); ++j) acc += h.weights[i] * g(i, j) * h.weights[j];
    }
    return std::sqrt(std::max(acc, 0.0));
}

double exact_objective(const ExactFunction& h, const SemiSupervisedSplit& split, double lambda,
                       std::span<const double> gamma) {
    require_on_anchors(h, split);
    const ExactProblem problem(split, h.spec, lambda, gamma);
    return problem.objective(h.weights);
}

ExactFunction exact_full_gradient(const ExactFunction& h, const SemiSupervisedSplit& split,
                                  double lambda, std::span<const double> gamma) {
    require_on_anchors(h, split);
    const ExactProblem problem(split, h.spec, lambda, gamma);
    ExactFunction g;
    g.anchors = h.anchors;
    g.spec = h.spec;
    g.weights = problem.gradient(h.weights);
    return g;
}

ExactFunction batch_solve_exact(const SemiSupervisedSplit& split, const KernelSpec& spec,
                                double lambda, std::span<const double> gamma,
                                const SolveOptions& options) {
    const ExactProblem problem(split, spec, lambda, gamma);
    ExactFunction h = zero_function(split, spec);
    std::vector<double>& w = h.weights;

    auto inner = [&](std::span<const double> a, std::span<const double> b) {
        const auto kb = problem.values(b);
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * kb[i];
        return acc;
    };

    auto grad = problem.gradient(w);
    const double g0 = problem.norm(grad);
    if (g0 == 0.0) return h;
    double obj = problem.objective(w);
    double gnorm = g0;
    std::vector<double> trial(w.size());
    std::vector<double> hess_g(w.size());
    for (std::size_t it = 0; it < options.max_iters; ++it) {
        if (gnorm <= options.rel_tol * g0) return h;
        // The objective is quadratic, so the gradient is affine along any line and the
        // curvature along -grad follows from one extra gradient evaluation.
        for (std::size_t i = 0; i < w.size(); ++i) trial[i] = w[i] - options.step * grad[i];
        const auto grad_trial = problem.gradient(trial);
        for (std::size_t i = 0; i < w.size(); ++i) hess_g[i] = (grad[i] - grad_trial[i]) / options.step;
        const double curvature = inner(grad, hess_g);
        double step = curvature > 0.0 ? (gnorm * gnorm) / curvature : options.step;

        double trial_obj = 0.0;
        int halvings = 0;
        const double slack = 1e-13 * (1.0 + std::abs(obj));
        while (true) {
            for (std::size_t i = 0; i < w.size(); ++i) trial[i] = w[i] - step * grad[i];
            trial_obj = problem.objective(trial);
            if (trial_obj <= obj + slack) break;
            step *= 0.5;
            if (++halvings > 60) {
                throw NumericError("exact solver line search failed, gradient norm " +
                                       std::to_string(gnorm),
                                   it);
            }
        }
        w.swap(trial);
        obj = std::min(obj, trial_obj);
        grad = problem.gradient(w);
        gnorm = problem.norm(grad);
    }
    if (gnorm <= options.rel_tol * g0) return h;
    throw NumericError("exact solver did not converge, gradient norm " + std::to_string(gnorm) +
                           " (initial " + std::to_string(g0) + ")",
                       options.max_iters);
}

ExactFunction exact_stochastic_gradient(const IterationBatch& batch, std::span<const double> scores,
                                        std::span<const double> gamma, const KernelSpec& spec) {
    const auto& layout = batch.layout;
    ExactFunction xi;
    xi.anchors = batch.points;
    xi.spec = spec;
    xi.weights.assign(batch.points.rows(), 0.0);
    const double inv_k = 1.0 / static_cast<double>(layout.subproblems.size());

    // Straight transcription of the per-pair gradient: each sampled pair contributes
    // l1'(u, v) k(first, .) + l2'(u, v) k(second, .).
    auto pairs = [&](const SideSample& first, const SideSample& second, double scale) {
        for (std::size_t a = 0; a < first.points.size(); ++a) {
            for (std::size_t b = 0; b < second.points.size(); ++b) {
                const std::size_t pa = first.points[a];
                const std::size_t pb = second.points[b];
                const double u = scores[pa];
                const double v = scores[pb];
                const double w = scale * first.weights[a] * second.weights[b];
                xi.weights[pa] += w * (-2.0 * (1.0 - u + v));
                xi.weights[pb] += w * (2.0 * (1.0 - u + v));
            }
        }
    };
    for (std::size_t j = 0; j < layout.subproblems.size(); ++j) {
        const auto& sp = layout.subproblems[j];
        pairs(sp.positive, sp.negative, inv_k * gamma[j]);
        if (!sp.unlabeled.points.empty()) {
            pairs(sp.positive, sp.unlabeled, inv_k * (1.0 - gamma[j]));
            pairs(sp.unlabeled, sp.negative, inv_k * (1.0 - gamma[j]));
        }
    }
    return xi;
}

McReport mc_unbiasedness_check(std::span<const double> frozen_scores,
                               const IterationBatch& frozen_instances, std::span<const double> gamma,
                               const KernelSpec& spec, std::size_t m, std::size_t n_seeds,
                               const Matrix& probes, std::uint64_t seed) {
    if (n_seeds < 2) throw ValidationError("mc_unbiasedness_check needs at least two seeds");
    const auto xi = exact_stochastic_gradient(frozen_instances, frozen_scores, gamma, spec);
    const std::size_t n_probe = probes.rows();
    std::vector<double> sum(n_probe, 0.0);
    std::vector<double> sum_sq(n_probe, 0.0);
    const Matrix& pts = frozen_instances.points;
    std::vector<double> phi(2 * m);
    for (std::size_t s = 0; s < n_seeds; ++s) {
        const FeatureStream stream{derive_seed(seed, s), m, spec};
        const Matrix omega = sample_omega_block(stream, 1);
        Matrix feats(pts.rows(), 2 * m);
        for (std::size_t p = 0; p < pts.rows(); ++p) feature_map(omega, pts.row(p), feats.row(p));
        // With eta = 1 the coefficient is minus the feature-space gradient.
        const auto alpha = gradient_coefficient(frozen_instances.layout, frozen_scores, feats, gamma, 1.0);
        for (std::size_t q = 0; q < n_probe; ++q) {
            feature_map(omega, probes.row(q), phi);
            double zeta = 0.0;
            for (std::size_t c = 0; c < phi.size(); ++c) zeta -= alpha[c] * phi[c];
            sum[q] += zeta;
            sum_sq[q] += zeta * zeta;
        }
    }
    McReport rep;
    const auto n = static_cast<double>(n_seeds);
    for (std::size_t q = 0; q < n_probe; ++q) {
        const double mean = sum[q] / n;
        const double var = std::max(0.0, (sum_sq[q] - n * mean * mean) / (n - 1.0));
        const double se = std::sqrt(var / n);
        const double exact = xi(probes.row(q));
        const double dev = std::abs(mean - exact);
        rep.exact.push_back(exact);
        rep.mean.push_back(mean);
        rep.standard_errors.push_back(se);
        rep.max_abs_dev = std::max(rep.max_abs_dev, dev);
        rep.standard_error = std::max(rep.standard_error, se);
        rep.max_z = std::max(rep.max_z, se > 0.0 ? dev / se : (dev > 0.0 ? INFINITY : 0.0));
    }
    return rep;
}

Matrix probe_grid(const Matrix& data, std::size_t n, std::uint64_t seed) {
    if (data.empty()) throw ValidationError("probe_grid needs data");
    const std::size_t d = data.cols();
    std::vector<double> lo(d), hi(d);
    for (std::size_t c = 0; c < d; ++c) {
        lo[c] = hi[c] = data(0, c);
        for (std::size_t r = 1; r < data.rows(); ++r) {
            lo[c] = std::min(lo[c], data(r, c));
            hi[c] = std::max(hi[c], data(r, c));
        }
    }
    SplitMix64 rng(derive_seed(seed, 0x9E0BEULL));
    Matrix out(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) out(r, c) = lo[c] + (hi[c] - lo[c]) * uniform_open01(rng);
    }
    return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("loglog_slope needs >= 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ConvergenceTrace convergence_trace(const SemiSupervisedSplit& split, const TrainConfig& config,
                                   std::span<const std::uint64_t> checkpoints, std::size_t n_seeds,
                                   std::size_t n_probes, const SolveOptions& options) {
    if (checkpoints.empty() || !std::is_sorted(checkpoints.begin(), checkpoints.end())) {
        throw ValidationError("checkpoints must be non-empty and ascending");
    }
    const KernelSpec spec{config.sigma, split.dim()};
    const auto gamma = config.gamma_for(split.k());
    const ExactFunction f_star = batch_solve_exact(split, spec, config.lambda, gamma, options);
    const Matrix probes = probe_grid(anchor_rows(split), n_probes, config.master_seed);
    const auto target = f_star.evaluate(probes);

    ConvergenceTrace trace;
    trace.checkpoints.assign(checkpoints.begin(), checkpoints.end());
    trace.mean_sq_error.assign(checkpoints.size(), 0.0);
    for (std::size_t s = 0; s < n_seeds; ++s) {
        TrainConfig cfg = config;
        cfg.master_seed = derive_seed(config.master_seed, s);
        cfg.t_max = checkpoints.back();
        Trainer trainer(split, cfg);
        std::vector<double> errs;
        for (const auto cp : checkpoints) {
            while (trainer.iteration() < cp) trainer.step();
            const auto f = predict_scores(trainer.snapshot(), probes);
            double mse = 0.0;
            for (std::size_t q = 0; q < f.size(); ++q) mse += (f[q] - target[q]) * (f[q] - target[q]);
            errs.push_back(mse / static_cast<double>(f.size()));
        }
        for (std::size_t c = 0; c < errs.size(); ++c) trace.mean_sq_error[c] += errs[c] / static_cast<double>(n_seeds);
        trace.per_seed.push_back(std::move(errs));
    }
    std::vector<double> xs(checkpoints.begin(), checkpoints.end());
    trace.slope = loglog_slope(xs, trace.mean_sq_error);
    return trace;
}

}  // namespace qs3orao::oracle
