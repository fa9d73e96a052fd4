#pragma once

#include <cstdint>
#include <span>

namespace qs3orao {

enum class PairLossKind { zero_one, squared };

/// 1/2 (1 - sign(u - v)): 0 when u > v, 1 when u < v, 1/2 on ties.
double zero_one_pair(double u, double v) noexcept;

/// Squared pairwise surrogate (1 - u + v)^2 and its partial derivatives.
struct SquaredPairLoss {
    static double value(double u, double v) noexcept {
        const double r = 1.0 - u + v;
        return r * r;
    }
    static double d_first(double u, double v) noexcept { return -2.0 * (1.0 - u + v); }
    static double d_second(double u, double v) noexcept { return 2.0 * (1.0 - u + v); }
};

double pair_loss(PairLossKind kind, double u, double v) noexcept;

/// Exact zero-one pair tally: the risk is half_units / (2 * pairs).
struct PairTally {
    std::int64_t half_units = 0;
    std::int64_t pairs = 0;
    double value() const noexcept {
        return static_cast<double>(half_units) / (2.0 * static_cast<double>(pairs));
    }
};

/// Zero-one tally over all (first, second) pairs, first expected to rank higher.
PairTally zero_one_tally(std::span<const double> first, std::span<const double> second);

/// Mean pair loss over every (first, second) combination. Throws on an empty side.
double pairwise_risk(std::span<const double> first, std::span<const double> second,
                     PairLossKind kind);

inline double auc_risk_pn(std::span<const double> pos, std::span<const double> neg,
                          PairLossKind kind) {
    return pairwise_risk(pos, neg, kind);
}
/// Unlabeled scores play the negative role.
inline double auc_risk_pu(std::span<const double> pos, std::span<const double> unl,
                          PairLossKind kind) {
    return pairwise_risk(pos, unl, kind);
}
/// Unlabeled scores play the positive role.
inline double auc_risk_nu(std::span<const double> unl, std::span<const double> neg,
                          PairLossKind kind) {
    return pairwise_risk(unl, neg, kind);
}

/// gamma * pn + (1 - gamma) * (pu + nu - 1/2). gamma must lie in [0, 1].
double risk_pnu(double pn, double pu, double nu, double gamma);

/// Mean over the k - 1 subproblem risks.
double overall_risk(std::span<const double> per_subproblem);

}  // namespace qs3orao
