#include "qs3orao/model.hpp"

#include <zlib.h>

#include <bit>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "qs3orao/error.hpp"

namespace qs3orao {

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'Q', 'S', '3', 'O'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 4 + 8 + 8 + 8;

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <class T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) {
            throw ModelFormatError(ModelFormatError::Kind::truncated, "model file is truncated");
        }
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t done = 0;
    while (done < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
        crc = crc32(crc, bytes.data() + done, chunk);
        done += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

#ifndef NDEBUG
double coefficient_norm_sum(const RankModel& model) {
    double total = 0.0;
    for (std::size_t i = 0; i < model.coefficients.rows(); ++i) {
        double sq = 0.0;
        for (const double a : model.coefficients.row(i)) sq += a * a;
        total += std::sqrt(sq);
    }
    return total;
}
#endif

}  // namespace

double predict_score(const RankModel& model, std::span<const double> x) {
    if (x.size() != model.spec.d) {
        throw ValidationError("row has " + std::to_string(x.size()) + " features, model expects " +
                              std::to_string(model.spec.d));
    }
    const auto stream = model.stream();
    std::vector<double> scratch(2 * model.m);
    Matrix omega;
    double f = 0.0;
    for (std::uint64_t i = 1; i <= model.t(); ++i) {
        sample_omega_block(stream, i, omega);
        f += block_score(omega, model.coefficients.row(i - 1), x, scratch);
    }
    assert(std::abs(f) <= coefficient_norm_sum(model) * (1.0 + 1e-12) + 1e-300);
    return f;
}

std::vector<double> predict_scores(const RankModel& model, const Matrix& rows) {
    if (!rows.empty() && rows.cols() != model.spec.d) {
        throw ValidationError("rows have " + std::to_string(rows.cols()) +
                              " features, model expects " + std::to_string(model.spec.d));
    }
    std::vector<double> f(rows.rows(), 0.0);
    if (rows.empty()) return f;
    const auto stream = model.stream();
    std::vector<double> scratch(2 * model.m);
    Matrix omega;
    for (std::uint64_t i = 1; i <= model.t(); ++i) {
        sample_omega_block(stream, i, omega);
        const auto coeff = model.coefficients.row(i - 1);
        for (std::size_t r = 0; r < rows.rows(); ++r) {
            f[r] += block_score(omega, coeff, rows.row(r), scratch);
        }
    }
    return f;
}

std::vector<int> predict_labels(const RankModel& model, const Matrix& rows) {
    const auto scores = predict_scores(model, rows);
    std::vector<int> labels;
    labels.reserve(scores.size());
    for (const double s : scores) labels.push_back(predict_label(s, model.thresholds));
    return labels;
}

std::vector<std::uint8_t> serialize_model(const RankModel& model) {
    if (model.thresholds.b.size() != static_cast<std::size_t>(model.k - 1)) {
        throw ValidationError("model needs k - 1 thresholds before it can be saved");
    }
    if (model.coefficients.rows() > 0 && model.coefficients.cols() != 2 * model.m) {
        throw ValidationError("coefficient rows must hold 2m values");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + 8 * (model.thresholds.b.size() + model.coefficients.values().size()) + 4);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put<std::uint32_t>(out, kModelFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.d));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.k));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.m));
    put<std::uint64_t>(out, model.t());
    put<double>(out, model.spec.sigma);
    put<std::uint64_t>(out, model.master_seed);
    for (const double b : model.thresholds.b) put<double>(out, b);
    for (const double a : model.coefficients.values()) put<double>(out, a);
    put<std::uint32_t>(out, crc32_of(out));
    return out;
}

RankModel deserialize_model(std::span<const std::uint8_t> bytes) {
    using Kind = ModelFormatError::Kind;
    if (bytes.size() < 4) throw ModelFormatError(Kind::truncated, "model file is truncated");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw ModelFormatError(Kind::bad_magic, "not a model file (bad magic)");
    }
    Reader in(bytes.subspan(4));
    const auto version = in.get<std::uint32_t>();
    if (version != kModelFormatVersion) {
        throw ModelFormatError(Kind::version_mismatch,
                               "model file format version " + std::to_string(version) +
                                   " is not supported (this build reads version " +
                                   std::to_string(kModelFormatVersion) + ")");
    }
    RankModel model;
    model.spec.d = in.get<std::uint32_t>();
    model.k = static_cast<int>(in.get<std::uint32_t>());
    model.m = in.get<std::uint32_t>();
    const auto t = in.get<std::uint64_t>();
    model.spec.sigma = in.get<double>();
    model.master_seed = in.get<std::uint64_t>();
    if (model.k < 2 || model.m < 1) {
        throw ModelFormatError(Kind::truncated, "model header is inconsistent");
    }

    const auto n_thresholds = static_cast<std::uint64_t>(model.k - 1);
    const std::uint64_t width = 2 * static_cast<std::uint64_t>(model.m);
    const std::uint64_t payload_doubles = n_thresholds + t * width;
    if (t > (bytes.size() / 8) || (bytes.size() - kHeaderBytes) / 8 < payload_doubles) {
        throw ModelFormatError(Kind::truncated, "model file is truncated");
    }
    const std::size_t expected = kHeaderBytes + 8 * payload_doubles + 4;
    if (bytes.size() < expected) throw ModelFormatError(Kind::truncated, "model file is truncated");
    if (bytes.size() > expected) {
        throw ModelFormatError(Kind::checksum, "model file has trailing bytes");
    }
    std::uint32_t stored;
    std::memcpy(&stored, bytes.data() + expected - 4, 4);
    if (stored != crc32_of(bytes.first(expected - 4))) {
        throw ModelFormatError(Kind::checksum, "model file checksum mismatch");
    }

    for (std::uint64_t j = 0; j < n_thresholds; ++j) model.thresholds.b.push_back(in.get<double>());
    std::vector<double> coeffs(t * width);
    for (auto& a : coeffs) a = in.get<double>();
    model.coefficients = Matrix(t, width, std::move(coeffs));
    return model;
}

void save_model(const RankModel& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ModelFormatError(ModelFormatError::Kind::io, "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ModelFormatError(ModelFormatError::Kind::io, "write failed: " + path.string());
}

RankModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFormatError(ModelFormatError::Kind::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace qs3orao
