#include "qs3orao/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qs3orao/error.hpp"

namespace qs3orao {

bool Thresholds::strictly_increasing() const noexcept {
    for (std::size_t j = 1; j < b.size(); ++j) {
        if (!(b[j - 1] < b[j])) return false;
    }
    return true;
}

double threshold_objective(std::span<const double> scores, std::span<const int> labels, int j,
                           double b) {
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double margin = labels[i] > j ? scores[i] - b : b - scores[i];
        total += std::max(0.0, 1.0 - margin);
    }
    return total;
}

Thresholds fit_thresholds(std::span<const double> scores, std::span<const int> labels, int k) {
    if (scores.size() != labels.size()) {
        throw ValidationError("fit_thresholds: scores and labels differ in length");
    }
    if (k < 2) throw ValidationError("fit_thresholds: need k >= 2");
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (const int y : labels) {
        if (y < 1 || y > k) throw ValidationError("fit_thresholds: label outside 1..k");
        ++counts[y - 1];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            throw ValidationError("fit_thresholds: class " + std::to_string(c + 1) + " is empty");
        }
    }

    // Every hinge kink raises the slope of the piecewise-linear objective by one,
    // starting from -n_neg. The slope is zero between the n_neg-th and (n_neg+1)-th
    // sorted kinks, so that interval is the minimizer set.
    Thresholds th;
    std::vector<double> kinks(scores.size());
    std::size_t n_neg = 0;
    for (int j = 1; j < k; ++j) {
        n_neg += counts[j - 1];
        for (std::size_t i = 0; i < scores.size(); ++i) {
            kinks[i] = labels[i] > j ? scores[i] - 1.0 : scores[i] + 1.0;
        }
        std::nth_element(kinks.begin(), kinks.begin() + static_cast<std::ptrdiff_t>(n_neg),
                         kinks.end());
        const double hi = kinks[n_neg];
        const double lo = *std::max_element(kinks.begin(),
                                            kinks.begin() + static_cast<std::ptrdiff_t>(n_neg));
        th.b.push_back(0.5 * (lo + hi));
    }

    const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
    const double eps = 1e-9 * std::max(*mx - *mn, 1.0);
    for (std::size_t j = 1; j < th.b.size(); ++j) {
        if (!(th.b[j] > th.b[j - 1])) {
            th.b[j] = std::max(th.b[j - 1] + eps,
                               std::nextafter(th.b[j - 1], std::numeric_limits<double>::infinity()));
        }
    }
    return th;
}

int predict_label(double score, const Thresholds& th) {
    if (!th.strictly_increasing()) throw ValidationError("thresholds are not strictly increasing");
    for (std::size_t j = 0; j < th.b.size(); ++j) {
        if (score < th.b[j]) return static_cast<int>(j) + 1;
    }
    return th.k();
}

}  // namespace qs3orao
