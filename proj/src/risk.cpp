#include "qs3orao/risk.hpp"

#include <cmath>
#include <string>

#include "qs3orao/error.hpp"

namespace qs3orao {

double zero_one_pair(double u, double v) noexcept {
    if (u > v) return 0.0;
    if (u < v) return 1.0;
    return 0.5;
}

double pair_loss(PairLossKind kind, double u, double v) noexcept {
    return kind == PairLossKind::zero_one ? zero_one_pair(u, v) : SquaredPairLoss::value(u, v);
}

PairTally zero_one_tally(std::span<const double> first, std::span<const double> second) {
    if (first.empty() || second.empty()) throw ValidationError("AUC risk needs both sides non-empty");
    PairTally t;
    for (const double u : first) {
        for (const double v : second) {
            if (u < v) {
                t.half_units += 2;
            } else if (!(u > v)) {
                t.half_units += 1;
            }
        }
    }
    t.pairs = static_cast<std::int64_t>(first.size()) * static_cast<std::int64_t>(second.size());
    return t;
}

double pairwise_risk(std::span<const double> first, std::span<const double> second,
                     PairLossKind kind) {
    if (first.empty() || second.empty()) throw ValidationError("AUC risk needs both sides non-empty");
    if (kind == PairLossKind::zero_one) return zero_one_tally(first, second).value();
    double sum = 0.0;
    for (const double u : first) {
        for (const double v : second) sum += SquaredPairLoss::value(u, v);
    }
    return sum / (static_cast<double>(first.size()) * static_cast<double>(second.size()));
}

double risk_pnu(double pn, double pu, double nu, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ConfigError("trade-off gamma must lie in [0, 1], got " + std::to_string(gamma));
    }
    return gamma * pn + (1.0 - gamma) * (pu + nu - 0.5);
}

double overall_risk(std::span<const double> per_subproblem) {
    if (per_subproblem.empty()) throw ValidationError("overall risk needs at least one subproblem");
    double sum = 0.0;
    for (const double r : per_subproblem) sum += r;
    return sum / static_cast<double>(per_subproblem.size());
}

}  // namespace qs3orao
