#include "qs3orao/features.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "qs3orao/error.hpp"
#include "qs3orao/rng.hpp"

namespace qs3orao {

namespace {

// Branch-free sine and cosine for |x| <= kReduceLimit: Cody-Waite reduction by pi/2
// and the fdlibm minimax kernels on [-pi/4, pi/4]. Written so the loop vectorizes;
// larger or non-finite arguments go through libm afterwards.
constexpr double kReduceLimit = 1.0e5;

void sincos_array(const double* x, double* s, double* c, std::size_t n) {
    constexpr double kTwoOverPi = 6.36619772367581382433e-01;
    constexpr double kShift = 0x1.8p52;
    constexpr double kPio2_1 = 1.57079632673412561417e+00;
    constexpr double kPio2_2 = 6.07710050630396597660e-11;
    constexpr double kPio2_3 = 2.02226624871116645580e-21;
    constexpr double S1 = -1.66666666666666324348e-01;
    constexpr double S2 = 8.33333333332248946124e-03;
    constexpr double S3 = -1.98412698298579493134e-04;
    constexpr double S4 = 2.75573137070700676789e-06;
    constexpr double S5 = -2.50507602534068634195e-08;
    constexpr double S6 = 1.58969099521155010221e-10;
    constexpr double C1 = 4.16666666666666019037e-02;
    constexpr double C2 = -1.38888888888741095749e-03;
    constexpr double C3 = 2.48015872894767294178e-05;
    constexpr double C4 = -2.75573143513906633035e-07;
    constexpr double C5 = 2.08757232129817482790e-09;
    constexpr double C6 = -1.13596475577881948265e-11;

    bool needs_libm = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::fabs(x[i]);
        needs_libm |= !(a <= kReduceLimit);
        const double shifted = a * kTwoOverPi + kShift;
        const auto q = std::bit_cast<std::uint64_t>(shifted);
        const double k = shifted - kShift;
        const double r = ((a - k * kPio2_1) - k * kPio2_2) - k * kPio2_3;
        const double z = r * r;
        const double ps = r + r * z * (S1 + z * (S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)))));
        const double pc =
            1.0 - 0.5 * z + z * z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6)))));
        const bool odd = (q & 1) != 0;
        const double sv = odd ? pc : ps;
        const double cv = odd ? ps : pc;
        const double s_sign = (q & 2) != 0 ? -1.0 : 1.0;
        const double c_sign = ((q + 1) & 2) != 0 ? -1.0 : 1.0;
        s[i] = std::copysign(1.0, x[i]) * s_sign * sv;
        c[i] = c_sign * cv;
    }
    if (needs_libm) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!(std::fabs(x[i]) <= kReduceLimit)) {
                s[i] = std::sin(x[i]);
                c[i] = std::cos(x[i]);
            }
        }
    }
}

}  // namespace

void KernelSpec::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("kernel bandwidth sigma must be a positive finite number, got " +
                          std::to_string(sigma));
    }
    if (d == 0) throw ConfigError("kernel input dimension must be positive");
}

double kernel_exact(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("kernel_exact: dimension mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - y[i];
        sq += diff * diff;
    }
    return std::exp(-spec.sigma * sq);
}

std::uint64_t FeatureStream::block_seed(std::uint64_t i) const noexcept {
    return derive_seed(master_seed, i);
}

Matrix sample_omega_block(const FeatureStream& stream, std::uint64_t i) {
    Matrix omega;
    sample_omega_block(stream, i, omega);
    return omega;
}

void sample_omega_block(const FeatureStream& stream, std::uint64_t i, Matrix& omega) {
    if (i == 0) throw ValidationError("frequency blocks are indexed from 1");
    const std::size_t d = stream.spec.d;
    if (omega.rows() != stream.m || omega.cols() != d) omega = Matrix(stream.m, d);
    SplitMix64 eng(stream.block_seed(i));
    const double scale = std::sqrt(2.0 * stream.spec.sigma);
    auto& v = omega.values();
    for (std::size_t r = 0; r + 1 < v.size(); r += 2) {
        double z0;
        double z1;
        standard_normal_pair(eng, z0, z1);
        v[r] = scale * z0;
        v[r + 1] = scale * z1;
    }
    if (v.size() % 2 == 1) {
        double z0;
        double z1;
        standard_normal_pair(eng, z0, z1);
        v.back() = scale * z0;
    }
}

void feature_map(const Matrix& omega, std::span<const double> x, std::span<double> out) {
    const std::size_t m = omega.rows();
    if (x.size() != omega.cols()) {
        throw ValidationError("feature_map: row has " + std::to_string(x.size()) +
                              " features, frequencies expect " + std::to_string(omega.cols()));
    }
    if (out.size() != 2 * m) throw ValidationError("feature_map: output must hold 2m values");
    const double norm = 1.0 / std::sqrt(static_cast<double>(m));
    // Projections go into the sine half first and are overwritten in place.
    double* proj = out.data() + m;
    for (std::size_t r = 0; r < m; ++r) {
        const auto w = omega.row(r);
        double p = 0.0;
        for (std::size_t c = 0; c < w.size(); ++c) p += w[c] * x[c];
        proj[r] = p;
    }
    sincos_array(proj, proj, out.data(), m);
    for (std::size_t r = 0; r < 2 * m; ++r) out[r] *= norm;
}

std::vector<double> feature_map(const Matrix& omega, std::span<const double> x) {
    std::vector<double> out(2 * omega.rows());
    feature_map(omega, x, out);
    return out;
}

double block_score(const Matrix& omega, std::span<const double> coeff, std::span<const double> x,
                   std::span<double> scratch) {
    feature_map(omega, x, scratch);
    double s = 0.0;
    for (std::size_t c = 0; c < coeff.size(); ++c) s += coeff[c] * scratch[c];
    return s;
}

}  // namespace qs3orao
