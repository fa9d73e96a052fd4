#include <algorithm>
#include <cmath>
#include <memory>

#include "doctest.h"
#include "fixtures.hpp"
#include "qs3orao/error.hpp"
#include "qs3orao/eval.hpp"
#include "qs3orao/risk.hpp"

using namespace qs3orao;

namespace {

double auc(const std::vector<double>& s, const std::vector<int>& pos) {
    const auto flags = std::make_unique<bool[]>(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) flags[i] = pos[i] != 0;
    return auc_rank_sum(s, std::span<const bool>(flags.get(), pos.size()));
}

double auc_by_pairs(const std::vector<double>& s, const std::vector<int>& pos) {
    std::vector<double> p;
    std::vector<double> n;
    for (std::size_t i = 0; i < s.size(); ++i) (pos[i] ? p : n).push_back(s[i]);
    return 1.0 - pairwise_risk(p, n, PairLossKind::zero_one);
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("rank-sum AUC examples") {
    CHECK(auc({0.9, 0.8, 0.1}, {1, 1, 0}) == 1.0);
    CHECK(auc({0.1, 0.8, 0.9}, {1, 1, 0}) == 0.0);
    CHECK(auc({2, 2, 2, 2}, {1, 0, 1, 0}) == 0.5);
    CHECK(auc({1, 0, 1, 2}, {1, 1, 0, 0}) == 0.125);
    CHECK_THROWS_AS(auc({1, 2}, {1, 1}), ValidationError);
    CHECK_THROWS_AS(auc({1, 2}, {0, 0}), ValidationError);
}

TEST_CASE("rank-sum AUC equals pair enumeration") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 60);
        const auto s = testing::random_scores(rng, n, trial % 2 == 0 ? 5 : 0);
        std::vector<int> pos(n);
        for (auto& v : pos) v = static_cast<int>(uniform_index(rng, 2));
        pos[0] = 1;
        pos[1] = 0;
        CHECK(std::abs(auc(s, pos) - auc_by_pairs(s, pos)) <= 1e-12);
    }
}

TEST_CASE("score metrics") {
    const std::vector<int> y{1, 2, 3, 1, 2, 3};
    const std::vector<double> exact{1, 2, 3, 1, 2, 3};
    const auto m = score_metrics(exact, y, 3);
    CHECK(m.overall_auc == 1.0);
    REQUIRE(m.per_subproblem_auc.size() == 2);
    CHECK(*m.per_subproblem_auc[0] == 1.0);

    const auto null = score_metrics(std::vector<double>(6, 0.0), y, 3);
    CHECK(std::abs(null.overall_auc - 0.5) <= 1e-12);

    const auto missing = score_metrics(std::vector<double>{1, 2, 1}, std::vector<int>{1, 2, 1}, 3);
    CHECK(missing.per_subproblem_auc[0].has_value());
    CHECK_FALSE(missing.per_subproblem_auc[1].has_value());
    CHECK(missing.overall_auc == 1.0);
    CHECK(missing.warnings.size() == 1);
}

TEST_CASE("monotone transforms leave AUCs unchanged") {
    SplitMix64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 10 + uniform_index(rng, 40);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = 1 + static_cast<int>(i % 4);
        const auto s = testing::random_scores(rng, n, trial % 2 ? 6 : 0);
        auto t = s;
        for (auto& v : t) v = std::atan(v) * 5.0 + 2.0;
        const auto a = score_metrics(s, y, 4);
        const auto b = score_metrics(t, y, 4);
        CHECK(a.overall_auc == b.overall_auc);
        for (std::size_t j = 0; j < 3; ++j) CHECK(*a.per_subproblem_auc[j] == *b.per_subproblem_auc[j]);
    }
}

TEST_CASE("scores equal to the label") {
    const std::vector<int> y{1, 2, 3, 2, 1};
    const std::vector<double> s{1, 2, 3, 2, 1};
    const auto m = score_metrics(s, y, 3);
    CHECK(m.overall_auc == 1.0);
    const auto th = fit_thresholds(s, y, 3);
    double mae = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) mae += std::abs(predict_label(s[i], th) - y[i]);
    CHECK(mae == 0.0);
}

TEST_CASE("label metrics of the null model") {
    RankModel model;
    model.spec = {1.0, 1};
    model.m = 1;
    model.k = 3;
    model.coefficients = Matrix(0, 2);
    model.thresholds = Thresholds{{-1.0, 1.0}};
    const auto ds = OrdinalDataset::create(Matrix(3, 1, {0.0, 1.0, 2.0}), {1, 2, 3});
    const auto m = evaluate_model(model, ds);
    CHECK(m.overall_auc == 0.5);
    CHECK(m.mae == doctest::Approx(2.0 / 3.0));
    CHECK(m.zero_one_error == doctest::Approx(2.0 / 3.0));
    CHECK(m.peak_coeff_bytes == 0);
}

TEST_CASE("bench rows and csv") {
    const auto ds = testing::separable_1d(10, 1);
    const auto pool = testing::separable_1d(40, 2);
    TrainConfig cfg;
    cfg.m = 2;
    cfg.batch = 1;
    cfg.t_max = 8;
    const std::vector<std::size_t> sizes{5, 50, 500};
    const auto rows = bench_scaling(ds, pool.features, cfg, sizes, 3, 1);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.trial_ns.size() == 3);
        CHECK(r.peak_coeff_bytes == 8 * 2 * 2 * 8);
        CHECK(r.mean_train_ns > 0.0);
    }
    const auto csv = bench_csv(rows);
    CHECK(csv.rfind("n_u,mean_train_ns,peak_coeff_bytes\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK_THROWS_AS(bench_scaling(ds, pool.features, cfg, sizes, 0, 1), ConfigError);
}

}
