#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "rtxd/channel.hpp"
#include "rtxd/harq.hpp"
#include "rtxd/pdma.hpp"
#include "rtxd/rdma.hpp"
#include "rtxd/rng.hpp"
#include "rtxd/table.hpp"

namespace rtxd {

enum class Scheme { pdma, rdma, nosic_baseline, repetition_baseline, oma_reference };

inline std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::pdma: return "pdma";
        case Scheme::rdma: return "rdma";
        case Scheme::nosic_baseline: return "nosic";
        case Scheme::repetition_baseline: return "repetition";
        case Scheme::oma_reference: return "oma";
    }
    return "?";
}

/// Power-domain design: ladder plus gain regions, all users at one rate.
struct PowerDesign {
    pdma::PowerLadder ladder;
    pdma::RegionPartition regions;
    double rate = 4.0;
};

/// Rate-domain design: each active user picks a ladder rate at random.
struct RateDesign {
    rdma::RateLadder ladder;
};

/// One experiment: population and activity, fading, a power- or
/// rate-domain design, termination, trial count and master seed.
struct Scenario {
    Scheme scheme = Scheme::pdma;
    int population = 50;
    double access_prob = 0.1;
    FadingSpec fading;
    std::variant<PowerDesign, RateDesign> design;
    TerminationPolicy termination;
    std::int64_t trials = 1;
    std::uint64_t seed = 1;
    bool include_empty_frames = false;

    bool power_design() const { return std::holds_alternative<PowerDesign>(design); }

    void validate() const {
        ActivitySpec{population, access_prob}.validate();
        fading.validate();
        termination.validate();
        if (trials < 1) throw std::invalid_argument("Scenario: trials must be >= 1");
        if (scheme == Scheme::pdma && !power_design())
            throw std::invalid_argument("Scenario: pdma requires a power design");
        if ((scheme == Scheme::rdma || scheme == Scheme::oma_reference) && power_design())
            throw std::invalid_argument("Scenario: rate-domain schemes require a rate design");
        if (power_design() && fading.mode != FadingSpec::Mode::static_per_frame)
            throw std::invalid_argument("Scenario: a power design pairs with static-per-frame fading");
        if (!power_design() && fading.mode != FadingSpec::Mode::iid_per_slot)
            throw std::invalid_argument("Scenario: a rate design pairs with iid-per-slot fading");
    }
};

/// Everything observed in one simulated frame. Powers and rates are summed
/// over transmitting users; frame_length counts a truncated frame at the
/// policy limit (the slots it actually occupied).
struct FrameRecord {
    std::int64_t frame_length = 0;
    int active_users = 0;
    int transmitting_users = 0;
    int silent_users = 0;
    int decoded_users = 0;
    bool collision = false;
    bool overflow = false;
    bool truncated = false;
    double sum_power = 0.0;
    double sum_power_sq = 0.0;
    double sum_rate = 0.0;

    bool operator==(const FrameRecord&) const = default;
};

struct SummaryStats {
    std::int64_t trials = 0;
    std::int64_t frames_counted = 0;  // frames entering the frame-length mean
    std::int64_t users_counted = 0;   // transmitting users pooled for power stats
    double mean_frame_length = 0.0;
    double stderr_frame_length = 0.0;
    double mean_tx_power = 0.0;
    double stderr_tx_power = 0.0;
    double collision_rate = 0.0;
    double overflow_rate = 0.0;
    double silent_rate = 0.0;
    double spectral_efficiency = 0.0;  // mean initial rate per user / mean frame length
    double truncation_rate = 0.0;

    bool operator==(const SummaryStats&) const = default;
};

namespace detail {

// Orthogonal reference: each user owns 1/L of every slot at L-fold power,
// interference-free, so information accrues at log2(1 + a*L*P)/L per slot.
inline DecodeTrace run_oma_frame(const std::vector<double>& rates, double power,
                                 int levels, const FadingSpec& fading,
                                 TerminationPolicy policy, RngStream& rng) {
    const std::size_t m = rates.size();
    DecodeTrace trace;
    trace.decode_slot.assign(m, std::nullopt);
    std::vector<double> acc(m, 0.0);
    std::size_t remaining = m;
    const double boosted = static_cast<double>(levels) * power;
    for (std::int64_t t = 1; t <= policy.limit && remaining > 0; ++t) {
        for (std::size_t k = 0; k < m; ++k) {
            const double a = draw_gain(fading, rng);
            if (trace.decode_slot[k]) continue;
            acc[k] += std::log2(1.0 + a * boosted) / static_cast<double>(levels);
            if (acc[k] >= rates[k] - kMiTolerance) {
                trace.decode_slot[k] = t;
                trace.decode_order.push_back(k);
                trace.frame_length = std::max(trace.frame_length, t);
                --remaining;
            }
        }
    }
    trace.truncated = remaining > 0;
    return trace;
}

} // namespace detail

/// Simulate one frame. Deterministic in (scenario, trial_index): the trial
/// draws from its own child stream, so results do not depend on execution
/// order or worker count.
inline FrameRecord run_trial(const Scenario& scenario, std::int64_t trial_index) {
    RngStream rng = RngStream::child(scenario.seed, static_cast<std::uint64_t>(trial_index));
    FrameRecord rec;

    const auto active = draw_active_set({scenario.population, scenario.access_prob}, rng);
    rec.active_users = static_cast<int>(active.size());
    if (active.empty()) return rec;

    std::vector<UserSignal> signals;
    std::vector<int> levels_used;
    DecodeTrace trace;

    if (scenario.power_design()) {
        const auto& design = std::get<PowerDesign>(scenario.design);
        rec.overflow = rec.active_users > design.ladder.levels();
        std::vector<double> gains(active.size());
        for (std::size_t i = 0; i < active.size(); ++i)
            gains[i] = draw_gain(scenario.fading, rng);
        for (std::size_t i = 0; i < active.size(); ++i) {
            const auto level = design.regions.region_index(gains[i]);
            if (!level) {
                ++rec.silent_users;
                continue;
            }
            const double power = design.ladder.powers[static_cast<std::size_t>(*level - 1)] / gains[i];
            signals.push_back({design.rate, power, gains[i]});
            levels_used.push_back(*level);
            rec.sum_power += power;
            rec.sum_power_sq += power * power;
            rec.sum_rate += design.rate;
        }
        rec.transmitting_users = static_cast<int>(signals.size());
        if (signals.empty()) return rec;

        switch (scenario.scheme) {
            case Scheme::pdma:
                trace = run_sic_ir_frame(signals, scenario.termination);
                break;
            case Scheme::nosic_baseline:
                trace = run_nosic_ir_frame(signals, scenario.termination);
                break;
            case Scheme::repetition_baseline:
                trace = run_sic_repetition_frame(signals, scenario.termination);
                break;
            default:
                throw std::invalid_argument("run_trial: scheme incompatible with power design");
        }
    } else {
        const auto& design = std::get<RateDesign>(scenario.design);
        const int ladder_levels = design.ladder.levels();
        rec.overflow = rec.active_users > ladder_levels;
        const double power = design.ladder.mean_rx_power / scenario.fading.mean_gain;
        std::vector<double> rates(active.size());
        for (std::size_t i = 0; i < active.size(); ++i) {
            const auto pick = static_cast<int>(rng.pick(static_cast<std::size_t>(ladder_levels)));
            levels_used.push_back(pick + 1);
            rates[i] = design.ladder.rates[static_cast<std::size_t>(pick)];
            signals.push_back({rates[i], power, std::vector<double>{}});
            rec.sum_power += power;
            rec.sum_power_sq += power * power;
            rec.sum_rate += rates[i];
        }
        rec.transmitting_users = static_cast<int>(signals.size());

        if (scenario.scheme == Scheme::oma_reference) {
            trace = detail::run_oma_frame(rates, power, ladder_levels, scenario.fading,
                                          scenario.termination, rng);
        } else {
            GainExtender extend = [&](std::size_t, std::int64_t) {
                return draw_gain(scenario.fading, rng);
            };
            switch (scenario.scheme) {
                case Scheme::rdma:
                    trace = run_sic_ir_frame(signals, scenario.termination, extend);
                    break;
                case Scheme::nosic_baseline:
                    trace = run_nosic_ir_frame(signals, scenario.termination, extend);
                    break;
                case Scheme::repetition_baseline:
                    trace = run_sic_repetition_frame(signals, scenario.termination, extend);
                    break;
                default:
                    throw std::invalid_argument("run_trial: scheme incompatible with rate design");
            }
        }
    }

    std::sort(levels_used.begin(), levels_used.end());
    rec.collision = std::adjacent_find(levels_used.begin(), levels_used.end()) != levels_used.end();
    rec.decoded_users = static_cast<int>(trace.decoded_count());
    rec.truncated = trace.truncated;
    rec.frame_length = trace.truncated ? scenario.termination.limit : trace.frame_length;
    return rec;
}

namespace detail {

inline std::vector<FrameRecord> run_trials(const Scenario& scenario, int workers) {
    scenario.validate();
    std::vector<FrameRecord> records(static_cast<std::size_t>(scenario.trials));
    const auto n = scenario.trials;
    workers = std::clamp<int>(workers, 1, static_cast<int>(std::min<std::int64_t>(n, 64)));
    if (workers == 1) {
        for (std::int64_t i = 0; i < n; ++i)
            records[static_cast<std::size_t>(i)] = run_trial(scenario, i);
        return records;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = n * w / workers;
        const std::int64_t hi = n * (w + 1) / workers;
        pool.emplace_back([&scenario, &records, lo, hi] {
            for (std::int64_t i = lo; i < hi; ++i)
                records[static_cast<std::size_t>(i)] = run_trial(scenario, i);
        });
    }
    for (auto& t : pool) t.join();
    return records;
}

} // namespace detail

/// Merge per-trial records into summary statistics. Frames where nobody
/// transmitted are excluded from the frame-length and rate averages unless
/// include_empty is set; power statistics pool all transmitting users.
inline SummaryStats aggregate(const std::vector<FrameRecord>& records, bool include_empty) {
    SummaryStats s;
    s.trials = static_cast<std::int64_t>(records.size());
    double frame_sum = 0.0, frame_sq = 0.0;
    double power_sum = 0.0, power_sq = 0.0;
    double rate_sum = 0.0;
    std::int64_t active = 0, silent = 0, transmitting = 0;
    std::int64_t collisions = 0, overflows = 0, truncations = 0;
    for (const auto& r : records) {
        if (r.transmitting_users > 0 || include_empty) {
            ++s.frames_counted;
            frame_sum += static_cast<double>(r.frame_length);
            frame_sq += static_cast<double>(r.frame_length) * static_cast<double>(r.frame_length);
        }
        active += r.active_users;
        silent += r.silent_users;
        transmitting += r.transmitting_users;
        power_sum += r.sum_power;
        power_sq += r.sum_power_sq;
        rate_sum += r.sum_rate;
        collisions += r.collision ? 1 : 0;
        overflows += r.overflow ? 1 : 0;
        truncations += r.truncated ? 1 : 0;
    }
    if (s.frames_counted > 0) {
        const auto n = static_cast<double>(s.frames_counted);
        s.mean_frame_length = frame_sum / n;
        if (s.frames_counted > 1) {
            const double var = std::max(0.0, (frame_sq - n * s.mean_frame_length * s.mean_frame_length) / (n - 1.0));
            s.stderr_frame_length = std::sqrt(var / n);
        }
    }
    s.users_counted = transmitting;
    if (transmitting > 0) {
        const auto n = static_cast<double>(transmitting);
        s.mean_tx_power = power_sum / n;
        if (transmitting > 1) {
            const double var = std::max(0.0, (power_sq - n * s.mean_tx_power * s.mean_tx_power) / (n - 1.0));
            s.stderr_tx_power = std::sqrt(var / n);
        }
        if (s.mean_frame_length > 0.0)
            s.spectral_efficiency = rate_sum / n / s.mean_frame_length;
    }
    if (s.trials > 0) {
        s.collision_rate = static_cast<double>(collisions) / static_cast<double>(s.trials);
        s.overflow_rate = static_cast<double>(overflows) / static_cast<double>(s.trials);
        s.truncation_rate = static_cast<double>(truncations) / static_cast<double>(s.trials);
    }
    if (active > 0) s.silent_rate = static_cast<double>(silent) / static_cast<double>(active);
    return s;
}

/// Run every trial of a scenario and aggregate. The result is identical for
/// any worker count.
inline SummaryStats run_scenario(const Scenario& scenario, int workers = 1) {
    return aggregate(detail::run_trials(scenario, workers), scenario.include_empty_frames);
}

enum class DesignKind { power, rate };

/// Knobs from which a Scenario is assembled; sweeps rebuild the design from
/// these after changing one of them.
struct ScenarioRecipe {
    Scheme scheme = Scheme::pdma;
    DesignKind design = DesignKind::power;
    int population = 50;
    double access_prob = 0.1;
    double mean_gain = 1.0;  // gamma
    // power-domain knobs
    double rate = 4.0;          // common initial rate R
    double frame_budget = 10.0; // Lambda, slots
    int levels = 20;            // L
    double drop_prob = 0.1;     // Pr(gain < floor)
    // rate-domain knobs
    double mean_rx_power = 2.0;        // U
    std::int64_t budget = 10;          // T
    std::optional<double> margin;      // delta; smallest-increment/5 when unset
    // run knobs
    TerminationPolicy::Mode termination = TerminationPolicy::Mode::run_to_completion;
    std::int64_t safety_cap = 10'000;
    std::int64_t trials = 100'000;
    std::uint64_t seed = 1;
    bool include_empty_frames = false;
};

inline Scenario build_scenario(const ScenarioRecipe& recipe) {
    Scenario s;
    s.scheme = recipe.scheme;
    s.population = recipe.population;
    s.access_prob = recipe.access_prob;
    s.trials = recipe.trials;
    s.seed = recipe.seed;
    s.include_empty_frames = recipe.include_empty_frames;
    if (recipe.design == DesignKind::power) {
        PowerDesign design;
        const double gamma = pdma::gamma_for_budget(recipe.rate, recipe.frame_budget);
        design.ladder = pdma::build_power_ladder(gamma, recipe.levels);
        const double floor = pdma::threshold_for_drop_prob(recipe.mean_gain, recipe.drop_prob);
        design.regions = pdma::build_regions(recipe.mean_gain, recipe.levels, floor);
        design.rate = recipe.rate;
        s.design = std::move(design);
        s.fading = {FadingSpec::Mode::static_per_frame, recipe.mean_gain};
        s.termination = recipe.termination == TerminationPolicy::Mode::run_to_completion
                            ? TerminationPolicy::run_to_completion(recipe.safety_cap)
                            : TerminationPolicy::truncate(
                                  static_cast<std::int64_t>(std::ceil(recipe.frame_budget)));
    } else {
        RateDesign design;
        const double delta = recipe.margin
                                 ? *recipe.margin
                                 : rdma::default_margin(recipe.levels, recipe.mean_rx_power);
        design.ladder =
            rdma::build_rate_ladder(recipe.levels, recipe.mean_rx_power, recipe.budget, delta);
        s.design = std::move(design);
        s.fading = {FadingSpec::Mode::iid_per_slot, recipe.mean_gain};
        s.termination = recipe.termination == TerminationPolicy::Mode::run_to_completion
                            ? TerminationPolicy::run_to_completion(recipe.safety_cap)
                            : TerminationPolicy::truncate(recipe.budget);
    }
    s.validate();
    return s;
}

/// Apply one named sweep parameter. Names match the config-file keys.
inline void set_parameter(ScenarioRecipe& recipe, const std::string& name, double value) {
    if (name == "levels") recipe.levels = static_cast<int>(std::llround(value));
    else if (name == "frame_budget") recipe.frame_budget = value;
    else if (name == "population") recipe.population = static_cast<int>(std::llround(value));
    else if (name == "budget") recipe.budget = std::llround(value);
    else if (name == "rate") recipe.rate = value;
    else if (name == "mean_rx_power") recipe.mean_rx_power = value;
    else if (name == "access_prob") recipe.access_prob = value;
    else if (name == "mean_gain") recipe.mean_gain = value;
    else if (name == "drop_prob") recipe.drop_prob = value;
    else if (name == "trials") recipe.trials = std::llround(value);
    else throw std::invalid_argument("unknown sweep parameter: " + name);
}

struct SweepPoint {
    std::string param;
    double value = 0.0;
    Scheme scheme = Scheme::pdma;
    SummaryStats stats;
};

/// One run_scenario per value, same master seed, rows in value order.
inline std::vector<SweepPoint> sweep(const ScenarioRecipe& base, const std::string& param,
                                     const std::vector<double>& values, int workers = 1) {
    std::vector<SweepPoint> points;
    points.reserve(values.size());
    for (double v : values) {
        ScenarioRecipe recipe = base;
        set_parameter(recipe, param, v);
        points.push_back({param, v, recipe.scheme, run_scenario(build_scenario(recipe), workers)});
    }
    return points;
}

} // namespace rtxd
