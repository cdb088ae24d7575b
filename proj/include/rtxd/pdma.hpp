#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtxd::pdma {

/// Geometric power ladder: v_l = Gamma * (Gamma + 1)^(L - l). Any set of
/// distinct levels guarantees the strongest survivor at least the target
/// SINR Gamma after cancellation, which is what bounds the frame length.
struct PowerLadder {
    double target_sinr = 0.0;     // Gamma, linear
    std::vector<double> powers;   // v_1 > v_2 > ... > v_L

    int levels() const { return static_cast<int>(powers.size()); }
};

/// Partition of the channel-gain axis into L regions that are equally
/// probable given the gain is at least the silence floor A_L. Region 1 is
/// [A_1, inf); region l is [A_l, A_{l-1}); gains below A_L stay silent.
struct RegionPartition {
    std::vector<double> thresholds;  // A_1 > A_2 > ... > A_L >= 0
    double mean_gain = 1.0;
    double tail_factor = 1.0;        // C_L = exp(A_L / mean_gain)

    int levels() const { return static_cast<int>(thresholds.size()); }
    double floor() const { return thresholds.back(); }

    /// 1-based region index of `gain`, nullopt below the floor (silent).
    std::optional<int> region_index(double gain) const {
        if (!(gain >= thresholds.back())) return std::nullopt;
        for (std::size_t l = 0; l < thresholds.size(); ++l)
            if (gain >= thresholds[l]) return static_cast<int>(l + 1);
        return std::nullopt;  // unreachable
    }
};

inline PowerLadder build_power_ladder(double target_sinr, int levels) {
    if (!(target_sinr > 0.0))
        throw std::invalid_argument("build_power_ladder: target SINR must be > 0");
    if (levels < 1)
        throw std::invalid_argument("build_power_ladder: need at least one level");
    PowerLadder ladder;
    ladder.target_sinr = target_sinr;
    ladder.powers.resize(static_cast<std::size_t>(levels));
    for (int l = 1; l <= levels; ++l)
        ladder.powers[static_cast<std::size_t>(l - 1)] =
            target_sinr * std::pow(target_sinr + 1.0, levels - l);
    return ladder;
}

/// Target SINR that makes the frame-length bound equal `budget` slots at
/// rate `rate`: Gamma = 2^(rate/budget) - 1.
inline double gamma_for_budget(double rate, double budget) {
    if (!(rate > 0.0) || !(budget >= 1.0))
        throw std::invalid_argument("gamma_for_budget: need rate > 0 and budget >= 1");
    return std::exp2(rate / budget) - 1.0;
}

/// Frame-length bound for distinct-level users at common rate `rate`:
/// rate / log2(1 + target_sinr).
inline double frame_bound(double rate, double target_sinr) {
    if (!(target_sinr > 0.0))
        throw std::invalid_argument("frame_bound: target SINR must be > 0");
    return rate / std::log2(1.0 + target_sinr);
}

/// Silence floor A_L with Pr(gain < A_L) = drop_prob under the exponential
/// gain model: -mean_gain * ln(1 - drop_prob).
inline double threshold_for_drop_prob(double mean_gain, double drop_prob) {
    if (!(mean_gain > 0.0))
        throw std::invalid_argument("threshold_for_drop_prob: mean_gain must be > 0");
    if (!(drop_prob >= 0.0 && drop_prob < 1.0))
        throw std::invalid_argument("threshold_for_drop_prob: drop_prob out of range [0,1)");
    return -mean_gain * std::log1p(-drop_prob);
}

/// Thresholds from the floor upward via
/// A_{l-1} = A_l + mean_gain * ln(C_L L / (C_L L - exp(A_l / mean_gain))),
/// which makes the L regions conditionally equiprobable.
inline RegionPartition build_regions(double mean_gain, int levels, double floor) {
    if (!(mean_gain > 0.0))
        throw std::invalid_argument("build_regions: mean_gain must be > 0");
    if (levels < 1)
        throw std::invalid_argument("build_regions: need at least one level");
    if (!(floor >= 0.0))
        throw std::invalid_argument("build_regions: floor must be >= 0");

    RegionPartition part;
    part.mean_gain = mean_gain;
    part.tail_factor = std::exp(floor / mean_gain);
    part.thresholds.assign(static_cast<std::size_t>(levels), floor);
    const double cl = part.tail_factor * static_cast<double>(levels);
    for (int l = levels; l >= 2; --l) {
        const double a_l = part.thresholds[static_cast<std::size_t>(l - 1)];
        const double divisor = cl - std::exp(a_l / mean_gain);
        if (!(divisor > 0.0))
            throw std::domain_error("build_regions: threshold recursion left its domain");
        part.thresholds[static_cast<std::size_t>(l - 2)] =
            a_l + mean_gain * std::log(cl / divisor);
    }
    return part;
}

/// Distributed power choice: silent below the floor, otherwise v_l / gain
/// for the region l containing the gain, so the received power is v_l.
inline std::optional<double> allocate_power(double gain, const PowerLadder& ladder,
                                            const RegionPartition& regions) {
    if (!(gain >= 0.0))
        throw std::invalid_argument("allocate_power: gain must be >= 0");
    if (ladder.levels() != regions.levels())
        throw std::invalid_argument("allocate_power: ladder and regions disagree on levels");
    const auto l = regions.region_index(gain);
    if (!l) return std::nullopt;
    return ladder.powers[static_cast<std::size_t>(*l - 1)] / gain;
}

/// Upper bound on the mean transmit power of a non-silent user:
/// (Gamma + 1)^L / (L * floor). Infinite for a zero floor.
inline double avg_power_bound(const PowerLadder& ladder, double floor) {
    if (!(floor > 0.0)) return std::numeric_limits<double>::infinity();
    const double l = static_cast<double>(ladder.levels());
    return std::pow(ladder.target_sinr + 1.0, l) / (l * floor);
}

/// Pr(more than `levels` of `population` users are active), i.e. the upper
/// binomial tail, summed in log space term by term.
inline double overflow_prob(int population, double access_prob, int levels) {
    if (population < 0)
        throw std::invalid_argument("overflow_prob: population must be >= 0");
    if (!(access_prob >= 0.0 && access_prob <= 1.0))
        throw std::invalid_argument("overflow_prob: access_prob out of range [0,1]");
    if (levels >= population) return 0.0;
    if (access_prob == 0.0) return 0.0;
    if (access_prob == 1.0) return 1.0;
    const double n = population;
    const double log_p = std::log(access_prob);
    const double log_q = std::log1p(-access_prob);
    const double log_fact_n = std::lgamma(n + 1.0);
    double tail = 0.0;
    for (int m = population; m > levels; --m) {
        const double dm = m;
        const double log_term = log_fact_n - std::lgamma(dm + 1.0) -
                                std::lgamma(n - dm + 1.0) + dm * log_p +
                                (n - dm) * log_q;
        tail += std::exp(log_term);
    }
    return std::min(tail, 1.0);
}

/// Pr(two of `m` users pick the same of `levels` equiprobable levels):
/// the birthday probability 1 - L!/((L-m)! L^m), evaluated in log space.
inline double collision_prob_exact(int m, int levels) {
    if (m < 0) throw std::invalid_argument("collision_prob_exact: m must be >= 0");
    if (levels < 1)
        throw std::invalid_argument("collision_prob_exact: need at least one level");
    if (m <= 1) return 0.0;
    if (m > levels) return 1.0;
    double log_no_collision = 0.0;
    for (int i = 1; i < m; ++i)
        log_no_collision += std::log1p(-static_cast<double>(i) / levels);
    return -std::expm1(log_no_collision);
}

/// Birthday approximation 1 - exp(-m^2 / (2 levels)), close for m << levels.
inline double collision_prob_approx(int m, int levels) {
    if (m < 0) throw std::invalid_argument("collision_prob_approx: m must be >= 0");
    if (levels < 1)
        throw std::invalid_argument("collision_prob_approx: need at least one level");
    const double x = static_cast<double>(m) * m / (2.0 * levels);
    return -std::expm1(-x);
}

/// Jensen upper bound on the mean of collision_prob_approx over a binomial
/// number of actives: 1 - exp(-K p_a ((K-1) p_a + 1) / (2 L)).
inline double avg_collision_bound(int population, double access_prob, int levels) {
    if (population < 0)
        throw std::invalid_argument("avg_collision_bound: population must be >= 0");
    if (!(access_prob >= 0.0 && access_prob <= 1.0))
        throw std::invalid_argument("avg_collision_bound: access_prob out of range [0,1]");
    if (levels < 1)
        throw std::invalid_argument("avg_collision_bound: need at least one level");
    const double k = population;
    const double mean_m_sq = k * access_prob * ((k - 1.0) * access_prob + 1.0);
    return -std::expm1(-mean_m_sq / (2.0 * levels));
}

} // namespace rtxd::pdma
