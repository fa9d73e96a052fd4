#pragma once

#include <span>
#include <vector>

namespace qs3orao {

/// Ordered cut points b_1 < ... < b_{k-1} on the ranking score.
struct Thresholds {
    std::vector<double> b;

    int k() const noexcept { return static_cast<int>(b.size()) + 1; }
    bool strictly_increasing() const noexcept;
    friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

/// All-thresholds hinge objective for a single cut b_j:
///   sum_{y > j} max(0, 1 - (s - b)) + sum_{y <= j} max(0, 1 - (b - s)).
double threshold_objective(std::span<const double> scores, std::span<const int> labels, int j,
                           double b);

/// Minimizes each cut independently (midpoint of the minimizing interval), then nudges
/// equal neighbours apart so the result is strictly increasing. Every class must occur.
Thresholds fit_thresholds(std::span<const double> scores, std::span<const int> labels, int k);

/// Smallest j with score < b_j, else k. A score equal to b_j goes to class j + 1.
int predict_label(double score, const Thresholds& th);

}  // namespace qs3orao
