#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "qs3orao/error.hpp"
#include "qs3orao/features.hpp"

using namespace qs3orao;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("exact kernel") {
    const KernelSpec spec{1.0, 2};
    const std::vector<double> x{0.3, -1.2};
    CHECK(kernel_exact(spec, x, x) == 1.0);
    const std::vector<double> y{0.3 + std::sqrt(std::log(2.0)), -1.2};
    CHECK(kernel_exact(spec, x, y) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(kernel_exact(KernelSpec{1e-12, 2}, x, std::vector<double>{5.0, 5.0}) ==
          doctest::Approx(1.0));
    CHECK_THROWS_AS(KernelSpec({0.0, 2}).validate(), ConfigError);
    CHECK_THROWS_AS(KernelSpec({-1.0, 2}).validate(), ConfigError);
}

TEST_CASE("omega blocks are pure functions of seed and index") {
    const FeatureStream s{42, 8, {0.5, 3}};
    const auto a = sample_omega_block(s, 5);
    for (std::uint64_t i = 1; i <= 20; ++i) (void)sample_omega_block(s, i);
    CHECK(sample_omega_block(s, 5) == a);
    CHECK(a.rows() == 8);
    CHECK(a.cols() == 3);
    CHECK(sample_omega_block(s, 6) != a);
    CHECK(sample_omega_block(FeatureStream{43, 8, {0.5, 3}}, 5) != a);
    Matrix reuse(2, 2);
    sample_omega_block(s, 5, reuse);
    CHECK(reuse == a);
    CHECK_THROWS_AS(sample_omega_block(s, 0), Error);
}

TEST_CASE("frequency moments match N(0, 2 sigma I)") {
    const double sigma = 0.75;
    const std::size_t m = 100;
    const std::size_t blocks = 1000;
    const FeatureStream s{9, m, {sigma, 2}};
    for (std::size_t c = 0; c < 2; ++c) {
        double sum = 0.0;
        double sq = 0.0;
        for (std::uint64_t i = 1; i <= blocks; ++i) {
            const auto w = sample_omega_block(s, i);
            for (std::size_t r = 0; r < m; ++r) {
                sum += w(r, c);
                sq += w(r, c) * w(r, c);
            }
        }
        const double n = static_cast<double>(m * blocks);
        const double mean = sum / n;
        const double var = sq / n - mean * mean;
        CHECK(std::abs(mean) < 4.0 * std::sqrt(2.0 * sigma / n));
        CHECK(var == doctest::Approx(2.0 * sigma).epsilon(0.05));
    }
}

TEST_CASE("feature map has unit norm and the documented layout") {
    const FeatureStream s{1, 16, {2.0, 4}};
    SplitMix64 rng(2);
    for (std::uint64_t i = 1; i <= 50; ++i) {
        const auto w = sample_omega_block(s, i);
        std::vector<double> x(4);
        for (auto& v : x) v = testing::normal(rng);
        const auto phi = feature_map(w, x);
        REQUIRE(phi.size() == 32);
        CHECK(std::abs(dot(phi, phi) - 1.0) < 1e-12);
        const double proj = dot(w.row(3), x);
        CHECK(phi[3] == doctest::Approx(std::cos(proj) / 4.0));
        CHECK(phi[16 + 3] == doctest::Approx(std::sin(proj) / 4.0));

        std::vector<double> y(4);
        for (auto& v : y) v = testing::normal(rng);
        CHECK(std::abs(dot(phi, feature_map(w, y))) <= 1.0 + 1e-12);
        CHECK(dot(phi, feature_map(w, x)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("feature map dimension mismatch") {
    const auto w = sample_omega_block(FeatureStream{1, 4, {1.0, 3}}, 1);
    CHECK_THROWS_AS(feature_map(w, std::vector<double>{1.0, 2.0}), Error);
    std::vector<double> out(7);
    CHECK_THROWS_AS(feature_map(w, std::vector<double>{1, 2, 3}, out), Error);
}

TEST_CASE("block_score equals the explicit inner product") {
    const auto w = sample_omega_block(FeatureStream{3, 5, {1.0, 2}}, 4);
    const std::vector<double> x{0.2, -0.7};
    std::vector<double> coeff(10);
    for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] = 0.1 * static_cast<double>(i) - 0.4;
    std::vector<double> scratch(10);
    CHECK(block_score(w, coeff, x, scratch) == doctest::Approx(dot(coeff, feature_map(w, x))));
}

TEST_CASE("random features estimate the kernel without bias") {
    // sigma = 0.5 and squared distance 1: k = exp(-0.5).
    const std::vector<double> x{0.0, 0.0};
    const std::vector<double> y{0.6, 0.8};
    const FeatureStream s{77, 1, {0.5, 2}};
    double sum = 0.0;
    double sq = 0.0;
    const int n = 10000;
    for (int i = 1; i <= n; ++i) {
        const auto w = sample_omega_block(s, static_cast<std::uint64_t>(i));
        const double v = dot(feature_map(w, x), feature_map(w, y));
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - std::exp(-0.5)) < 0.02);
    CHECK(std::abs(mean - std::exp(-0.5)) < 4.0 * se);
}

}
