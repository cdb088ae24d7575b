#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtxd/rng.hpp"

namespace rtxd::rdma {

/// Exponential integral E_m(x) = int_1^inf exp(-x t) t^-m dt for m >= 1,
/// x > 0. For x <= 1, E_1 comes from the classic series and higher orders
/// from the upward recurrence E_{m+1} = (exp(-x) - x E_m) / m, which is
/// stable there; for x > 1 each order is evaluated directly with a modified
/// Lentz continued fraction, since the recurrence amplifies error by x/m
/// per step.
inline double exp_integral(int order, double x) {
    if (order < 1)
        throw std::invalid_argument("exp_integral: order must be >= 1");
    if (!(x > 0.0))
        throw std::domain_error("exp_integral: x must be > 0");

    if (x > 1.0) {
        // Modified Lentz on the continued fraction
        // E_m(x) = exp(-x) / (x + m - 1*m/(x + m + 2 - 2(m+1)/(x + m + 4 - ...)))
        constexpr double tiny = 1e-300;
        double b = x + order;
        double c = 1.0 / tiny;
        double d = 1.0 / b;
        double h = d;
        for (int i = 1; i <= 10'000; ++i) {
            const double a = -static_cast<double>(i) * (order - 1 + i);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            const double delta = c * d;
            h *= delta;
            if (std::fabs(delta - 1.0) < 1e-15) break;
        }
        return h * std::exp(-x);
    }

    // series: E_1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k <= 200; ++k) {
        term *= -x / k;
        const double contrib = -term / k;
        sum += contrib;
        if (std::fabs(contrib) < 1e-18 * std::fabs(sum)) break;
    }
    double value = -std::numbers::egamma - std::log(x) + sum;
    const double ex = std::exp(-x);
    for (int m = 1; m < order; ++m) value = (ex - x * value) / m;
    return value;
}

/// How psi is evaluated: the Rayleigh closed form through exponential
/// integrals, or a sample mean over `samples` draws.
struct PsiEvaluator {
    enum class Mode { closed_form_rayleigh, monte_carlo };

    Mode mode = Mode::closed_form_rayleigh;
    std::int64_t samples = 1'000'000;
};

/// psi_M(x) = E[log2(1 + sum of M unit-mean exponential gains scaled by x)],
/// the ergodic rate of a signal with M-fold received power x over Rayleigh
/// fading. psi_0 = 0. Closed form: (1/ln 2) sum_{m<=M} e^{1/x} E_m(1/x).
inline double psi(const PsiEvaluator& evaluator, int m, double x, RngStream* rng = nullptr) {
    if (m < 0) throw std::invalid_argument("psi: M must be >= 0");
    if (!(x > 0.0)) throw std::invalid_argument("psi: x must be > 0");
    if (m == 0) return 0.0;

    if (evaluator.mode == PsiEvaluator::Mode::closed_form_rayleigh) {
        const double inv = 1.0 / x;
        const double scale = std::exp(inv);
        double sum = 0.0;
        for (int order = 1; order <= m; ++order)
            sum += exp_integral(order, inv);
        return scale * sum / std::numbers::ln2;
    }

    if (rng == nullptr)
        throw std::invalid_argument("psi: monte-carlo mode needs an rng stream");
    if (evaluator.samples < 1)
        throw std::invalid_argument("psi: monte-carlo mode needs samples >= 1");
    double mean = 0.0;
    for (std::int64_t i = 0; i < evaluator.samples; ++i) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += rng->exponential(1.0);
        mean += std::log2(1.0 + x * s);
    }
    return mean / static_cast<double>(evaluator.samples);
}

/// Ladder of initial rates matched to the per-stage ergodic rate increments
/// over budget slots: eta_l = T (psi_{L-l+1}(U) - psi_{L-l}(U) - delta),
/// strictly increasing in l with all rates positive.
struct RateLadder {
    std::int64_t budget = 1;       // T
    double margin = 0.0;           // delta, bits/symbol per slot
    double mean_rx_power = 1.0;    // U, linear
    std::vector<double> rates;     // eta_1 < eta_2 < ... < eta_L

    int levels() const { return static_cast<int>(rates.size()); }
};

inline RateLadder build_rate_ladder(int levels, double mean_rx_power, std::int64_t budget,
                                    double margin) {
    if (levels < 1)
        throw std::invalid_argument("build_rate_ladder: need at least one level");
    if (!(mean_rx_power > 0.0))
        throw std::invalid_argument("build_rate_ladder: mean rx power must be > 0");
    if (budget < 1)
        throw std::invalid_argument("build_rate_ladder: budget must be >= 1");
    if (!(margin > 0.0))
        throw std::invalid_argument("build_rate_ladder: margin must be > 0");

    PsiEvaluator closed_form;
    std::vector<double> psis(static_cast<std::size_t>(levels) + 1, 0.0);
    for (int m = 1; m <= levels; ++m)
        psis[static_cast<std::size_t>(m)] = psi(closed_form, m, mean_rx_power);

    RateLadder ladder;
    ladder.budget = budget;
    ladder.margin = margin;
    ladder.mean_rx_power = mean_rx_power;
    ladder.rates.resize(static_cast<std::size_t>(levels));
    for (int l = 1; l <= levels; ++l) {
        const double increment = psis[static_cast<std::size_t>(levels - l + 1)] -
                                 psis[static_cast<std::size_t>(levels - l)];
        const double eta = static_cast<double>(budget) * (increment - margin);
        if (!(eta > 0.0))
            throw std::invalid_argument("build_rate_ladder: rate at level " +
                                        std::to_string(l) +
                                        " is not positive; reduce the margin");
        ladder.rates[static_cast<std::size_t>(l - 1)] = eta;
    }
    for (int l = 1; l < levels; ++l)
        if (!(ladder.rates[static_cast<std::size_t>(l - 1)] <
              ladder.rates[static_cast<std::size_t>(l)]))
            throw std::invalid_argument("build_rate_ladder: rates not strictly increasing at level " +
                                        std::to_string(l + 1));
    return ladder;
}

/// Arithmetic mean of the ladder rates; telescoping gives
/// (T/L) psi_L(U) - T delta.
inline double mean_ladder_rate(const RateLadder& ladder) {
    double sum = 0.0;
    for (double r : ladder.rates) sum += r;
    return sum / static_cast<double>(ladder.rates.size());
}

/// Margin rule used by the experiment presets: one fifth of the smallest
/// per-slot rate increment, psi_L(U) - psi_{L-1}(U).
inline double default_margin(int levels, double mean_rx_power) {
    PsiEvaluator closed_form;
    const double top = psi(closed_form, levels, mean_rx_power);
    const double below = psi(closed_form, levels - 1, mean_rx_power);
    return (top - below) / 5.0;
}

struct EpsilonEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
};

/// Monte Carlo estimate of the per-level failure probability: the fraction
/// of trials where the budget-long sum of per-slot rate increments
/// Z_{l,t} = log2(1 + sum_{k<=L-l+1} a_{k,t} U) - log2(1 + sum_{k<=L-l} a_{k,t} U)
/// stays below eta_l.
inline EpsilonEstimate estimate_epsilon(int level, const RateLadder& ladder,
                                        std::int64_t trials, RngStream& rng) {
    if (level < 1 || level > ladder.levels())
        throw std::invalid_argument("estimate_epsilon: level out of range");
    if (trials < 1'000)
        throw std::invalid_argument("estimate_epsilon: need at least 1000 trials");

    const int signals = ladder.levels() - level + 1;  // user plus L-l interferers
    const double u = ladder.mean_rx_power;
    const double eta = ladder.rates[static_cast<std::size_t>(level - 1)];
    std::int64_t failures = 0;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
        double sum_z = 0.0;
        for (std::int64_t t = 0; t < ladder.budget; ++t) {
            double with_user = 0.0;
            for (int k = 0; k < signals - 1; ++k) with_user += rng.exponential(1.0);
            const double interference = with_user;
            with_user += rng.exponential(1.0);
            sum_z += std::log2(1.0 + u * with_user) - std::log2(1.0 + u * interference);
        }
        if (sum_z < eta) ++failures;
    }
    EpsilonEstimate est;
    est.trials = trials;
    est.value = static_cast<double>(failures) / static_cast<double>(trials);
    est.std_error = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(trials));
    return est;
}

/// Lower bound on the probability that all M distinct-rate users decode
/// within the budget: (1 - epsilon)^M.
inline double success_prob_bound(double epsilon, int m) {
    if (m < 0) throw std::invalid_argument("success_prob_bound: M must be >= 0");
    return std::pow(1.0 - epsilon, m);
}

/// Rate gain of rate-domain access over orthogonal access at equal total
/// power: psi_L(U) / psi_1(L U), at least 1 for every L and U.
inline double oma_gain_bound(int levels, double mean_rx_power) {
    if (levels < 1)
        throw std::invalid_argument("oma_gain_bound: need at least one level");
    PsiEvaluator closed_form;
    return psi(closed_form, levels, mean_rx_power) /
           psi(closed_form, 1, static_cast<double>(levels) * mean_rx_power);
}

} // namespace rtxd::rdma
