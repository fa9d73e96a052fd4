#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "qs3orao/error.hpp"
#include "qs3orao/model.hpp"
#include "qs3orao/trainer.hpp"

using namespace qs3orao;

namespace {

RankModel small_model(std::uint64_t seed = 5) {
    static const auto ds = testing::separable_1d(40, 1);
    static const auto split = make_semi_split(ds, 30, 2);
    TrainConfig cfg;
    cfg.m = 6;
    cfg.batch = 2;
    cfg.t_max = 30;
    cfg.master_seed = seed;
    return train(split, cfg);
}

ModelFormatError::Kind load_error(std::vector<std::uint8_t> bytes) {
    try {
        deserialize_model(bytes);
    } catch (const ModelFormatError& e) {
        return e.kind();
    }
    FAIL("expected a model format error");
    return ModelFormatError::Kind::io;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("untrained model scores zero") {
    RankModel m;
    m.spec = {1.0, 2};
    m.m = 4;
    m.coefficients = Matrix(0, 8);
    CHECK(predict_score(m, std::vector<double>{0.3, 0.1}) == 0.0);
    CHECK(predict_scores(m, Matrix(3, 2, 1.0)) == std::vector<double>(3, 0.0));
}

TEST_CASE("prediction is deterministic and matches the batched path") {
    const auto model = small_model();
    SplitMix64 rng(1);
    Matrix rows(20, 1);
    for (auto& v : rows.values()) v = 3.0 * testing::normal(rng);
    const auto batch = predict_scores(model, rows);
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        const double a = predict_score(model, rows.row(i));
        CHECK(a == predict_score(model, rows.row(i)));
        CHECK(a == batch[i]);
    }
    CHECK(predict_labels(model, Matrix(0, 1)).empty());
    CHECK_THROWS_AS(predict_score(model, std::vector<double>{1.0, 2.0}), ValidationError);
}

TEST_CASE("scores are linear in the coefficients and bounded by their norms") {
    const auto model = small_model();
    auto scaled = model;
    for (auto& v : scaled.coefficients.values()) v *= 2.0;
    double bound = 0.0;
    for (std::size_t i = 0; i < model.t(); ++i) {
        double sq = 0.0;
        for (const double a : model.coefficients.row(i)) sq += a * a;
        bound += std::sqrt(sq);
    }
    for (const double x : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
        const std::vector<double> row{x};
        const double f = predict_score(model, row);
        CHECK(predict_score(scaled, row) == doctest::Approx(2.0 * f).epsilon(1e-14));
        CHECK(std::abs(f) <= bound);
    }
}

TEST_CASE("round trip is byte- and prediction-identical") {
    const auto model = small_model();
    const auto bytes = serialize_model(model);
    CHECK(bytes.size() == 44 + 8 * (2 + 30 * 12) + 4);
    CHECK(std::memcmp(bytes.data(), "QS3O", 4) == 0);
    const auto back = deserialize_model(bytes);
    CHECK(back == model);
    CHECK(serialize_model(back) == bytes);

    const auto dir = std::filesystem::temp_directory_path() / "qs3orao_model_test";
    std::filesystem::create_directories(dir);
    save_model(model, dir / "m.bin");
    const auto loaded = load_model(dir / "m.bin");
    save_model(loaded, dir / "m2.bin");
    std::ifstream a(dir / "m.bin", std::ios::binary);
    std::ifstream b(dir / "m2.bin", std::ios::binary);
    CHECK(std::string(std::istreambuf_iterator<char>(a), {}) ==
          std::string(std::istreambuf_iterator<char>(b), {}));

    SplitMix64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{4.0 * testing::normal(rng)};
        CHECK(predict_score(loaded, x) == predict_score(model, x));
    }
    CHECK_THROWS_AS(load_model(dir / "missing.bin"), ModelFormatError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("corrupt files map to distinct errors") {
    using Kind = ModelFormatError::Kind;
    const auto bytes = serialize_model(small_model());

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(load_error(bad_magic) == Kind::bad_magic);

    auto newer = bytes;
    newer[4] = 2;
    try {
        deserialize_model(newer);
        FAIL("expected a version error");
    } catch (const ModelFormatError& e) {
        CHECK(e.kind() == Kind::version_mismatch);
        const std::string msg = e.what();
        CHECK(msg.find('2') != std::string::npos);
        CHECK(msg.find('1') != std::string::npos);
    }

    CHECK(load_error({bytes.begin(), bytes.end() - 9}) == Kind::truncated);
    CHECK(load_error({bytes.begin(), bytes.begin() + 20}) == Kind::truncated);
    CHECK(load_error({bytes.begin(), bytes.begin() + 2}) == Kind::truncated);

    auto flipped = bytes;
    flipped[60] ^= 0x10;
    CHECK(load_error(flipped) == Kind::checksum);
    auto bad_crc = bytes;
    bad_crc.back() ^= 0xFF;
    CHECK(load_error(bad_crc) == Kind::checksum);
    auto longer = bytes;
    longer.push_back(0);
    CHECK(load_error(longer) == Kind::checksum);
}

TEST_CASE("models need thresholds before saving") {
    auto model = small_model();
    model.thresholds.b.clear();
    CHECK_THROWS_AS(serialize_model(model), ValidationError);
}

TEST_CASE("same seed, same model; different seed, different model") {
    CHECK(small_model(5) == small_model(5));
    CHECK_FALSE(small_model(5).coefficients == small_model(6).coefficients);
}

}
