#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace rtxd {

/// Absolute tolerance used when testing "accumulated information >= rate",
/// absorbing floating-point summation error at designed-exact boundaries.
inline constexpr double kMiTolerance = 1e-12;

/// Sentinel slot count for a user that can never decode (zero SINR).
inline constexpr std::int64_t kNeverDecodes =
    std::numeric_limits<std::int64_t>::max() / 2;

/// One active user's transmission for a frame. `gains` holds either a single
/// channel power gain (static within the frame) or a per-slot sequence; the
/// overall channel gain seen by the receiver is gain * power.
struct UserSignal {
    double rate = 0.0;   // initial code rate, bits/symbol
    double power = 1.0;  // transmit power, linear
    std::variant<double, std::vector<double>> gains{0.0};

    bool static_gain() const { return std::holds_alternative<double>(gains); }
};

/// Callback that supplies the gain of `user` at 1-based `slot` when a
/// per-slot sequence runs out. The engine calls it slot-major and
/// user-ascending (including already-decoded users), so a stateful source
/// sees a fixed draw order regardless of the decode path.
using GainExtender = std::function<double(std::size_t user, std::int64_t slot)>;

/// When to stop a frame: run until everything is decoded (with a safety
/// cap), or cut the frame at a fixed re-transmission budget.
struct TerminationPolicy {
    enum class Mode { run_to_completion, truncate_at_budget };

    Mode mode = Mode::run_to_completion;
    std::int64_t limit = 10'000;

    static TerminationPolicy run_to_completion(std::int64_t cap = 10'000) {
        return {Mode::run_to_completion, cap};
    }
    static TerminationPolicy truncate(std::int64_t budget) {
        return {Mode::truncate_at_budget, budget};
    }

    void validate() const {
        if (limit < 1)
            throw std::invalid_argument("TerminationPolicy: limit must be >= 1");
    }
};

/// Outcome of one frame. decode_slot is 1-based, nullopt = not decoded;
/// decode_order lists user indices in decode (stage) order; frame_length is
/// the largest decode slot over decoded users, 0 if nothing decoded.
struct DecodeTrace {
    std::vector<std::optional<std::int64_t>> decode_slot;
    std::vector<std::size_t> decode_order;
    std::int64_t frame_length = 0;
    bool truncated = false;

    std::size_t decoded_count() const { return decode_order.size(); }
    bool all_decoded() const { return decode_order.size() == decode_slot.size(); }
};

/// Smallest T >= 1 with T * bits_per_slot >= rate (within kMiTolerance),
/// kNeverDecodes if bits_per_slot is not positive.
inline std::int64_t slots_needed(double rate, double bits_per_slot) {
    if (!(bits_per_slot > 0.0)) return kNeverDecodes;
    const double need = (rate - kMiTolerance) / bits_per_slot;
    if (!(need < 4.0e18)) return kNeverDecodes;
    const auto t = static_cast<std::int64_t>(std::ceil(need));
    return t < 1 ? 1 : t;
}

namespace detail {

// Repetition counterpart of slots_needed: smallest T >= 1 with
// log2(1 + T * snr) >= rate - tol.
inline std::int64_t slots_needed_repetition(double rate, double snr_per_slot) {
    if (!(snr_per_slot > 0.0)) return kNeverDecodes;
    const double need = (std::exp2(rate - kMiTolerance) - 1.0) / snr_per_slot;
    if (!(need < 4.0e18)) return kNeverDecodes;
    const auto t = static_cast<std::int64_t>(std::ceil(need));
    return t < 1 ? 1 : t;
}

enum class FrameMode { sic_ir, nosic_ir, sic_repetition };

inline void validate_signals(const std::vector<UserSignal>& signals) {
    if (signals.empty())
        throw std::invalid_argument("frame requires at least one signal");
    for (const auto& s : signals) {
        if (!(s.rate > 0.0))
            throw std::invalid_argument("UserSignal: rate must be > 0");
        if (!(s.power > 0.0))
            throw std::invalid_argument("UserSignal: power must be > 0");
        if (s.static_gain()) {
            if (!(std::get<double>(s.gains) >= 0.0))
                throw std::invalid_argument("UserSignal: gain must be >= 0");
        } else {
            for (double a : std::get<std::vector<double>>(s.gains))
                if (!(a >= 0.0))
                    throw std::invalid_argument("UserSignal: gain must be >= 0");
        }
    }
}

// Static-gain frame. Decode times have the closed form ceil(rate / c) per
// survivor set, so the slot loop collapses to the stage recursion: find the
// next decode time, remove every user decodable by then (lowest index
// first), re-evaluate, repeat. Cancellation is retroactive, so a survivor's
// decode time depends only on the current survivor set, not on history.
inline DecodeTrace run_static_frame(const std::vector<UserSignal>& signals,
                                    TerminationPolicy policy, FrameMode mode) {
    const std::size_t m = signals.size();
    std::vector<double> beta(m);
    for (std::size_t k = 0; k < m; ++k)
        beta[k] = std::get<double>(signals[k].gains) * signals[k].power;

    DecodeTrace trace;
    trace.decode_slot.assign(m, std::nullopt);

    if (mode == FrameMode::nosic_ir) {
        // Interference never changes: every decode time is known up front.
        double total = 0.0;
        for (double b : beta) total += b;
        std::vector<std::pair<std::int64_t, std::size_t>> done;
        for (std::size_t k = 0; k < m; ++k) {
            const double c = std::log2(1.0 + beta[k] / (total - beta[k] + 1.0));
            const std::int64_t n = slots_needed(signals[k].rate, c);
            if (n <= policy.limit) {
                trace.decode_slot[k] = n;
                done.emplace_back(n, k);
            }
        }
        std::sort(done.begin(), done.end());
        for (auto& [slot, k] : done) {
            trace.decode_order.push_back(k);
            trace.frame_length = std::max(trace.frame_length, slot);
        }
        trace.truncated = done.size() != m;
        return trace;
    }

    std::vector<std::size_t> survivors(m);
    for (std::size_t k = 0; k < m; ++k) survivors[k] = k;
    double interference = 0.0;
    for (double b : beta) interference += b;

    std::int64_t now = 0;
    while (!survivors.empty()) {
        std::int64_t next = kNeverDecodes;
        std::vector<std::size_t> batch;
        for (std::size_t k : survivors) {
            const double snr = beta[k] / (interference - beta[k] + 1.0);
            const std::int64_t n =
                mode == FrameMode::sic_ir
                    ? slots_needed(signals[k].rate, std::log2(1.0 + snr))
                    : slots_needed_repetition(signals[k].rate, snr);
            if (n <= now)
                batch.push_back(k);  // decodable in the current slot's fixpoint
            else
                next = std::min(next, n);
        }
        if (batch.empty()) {
            if (next > policy.limit) break;
            now = next;
            for (std::size_t k : survivors) {
                const double snr = beta[k] / (interference - beta[k] + 1.0);
                const std::int64_t n =
                    mode == FrameMode::sic_ir
                        ? slots_needed(signals[k].rate, std::log2(1.0 + snr))
                        : slots_needed_repetition(signals[k].rate, snr);
                if (n <= now) batch.push_back(k);
            }
        }
        for (std::size_t k : batch) {
            trace.decode_slot[k] = now;
            trace.decode_order.push_back(k);
            interference -= beta[k];
        }
        std::erase_if(survivors, [&](std::size_t k) {
            return trace.decode_slot[k].has_value();
        });
    }
    trace.frame_length = now;
    trace.truncated = !survivors.empty();
    if (trace.decode_order.empty()) trace.frame_length = 0;
    return trace;
}

// Per-slot-gain frame, simulated slot by slot. For SIC modes a decode
// subtracts the user from every buffered slot and the remaining survivors'
// accumulators are rebuilt at the reduced interference; decoding repeats
// within the slot until no further user crosses its rate.
inline DecodeTrace run_slotwise_frame(const std::vector<UserSignal>& signals,
                                      TerminationPolicy policy, FrameMode mode,
                                      const GainExtender& extend_gain) {
    const std::size_t m = signals.size();
    std::vector<std::vector<double>> alpha(m);
    for (std::size_t k = 0; k < m; ++k) {
        if (signals[k].static_gain())
            alpha[k] = {std::get<double>(signals[k].gains)};
        else
            alpha[k] = std::get<std::vector<double>>(signals[k].gains);
    }
    auto beta_at = [&](std::size_t k, std::int64_t slot) {
        const auto& a = alpha[k];
        const double g = signals[k].static_gain() ? a[0] : a[static_cast<std::size_t>(slot - 1)];
        return g * signals[k].power;
    };

    DecodeTrace trace;
    trace.decode_slot.assign(m, std::nullopt);

    const bool sic = mode != FrameMode::nosic_ir;
    std::vector<std::size_t> survivors(m);
    for (std::size_t k = 0; k < m; ++k) survivors[k] = k;
    std::vector<double> acc(m, 0.0);         // bits (IR) or accumulated SNR (repetition)
    std::vector<double> interference;        // per slot, over current transmitters

    auto decodable = [&](std::size_t k) {
        const double mi = mode == FrameMode::sic_repetition
                              ? std::log1p(acc[k]) / std::numbers::ln2
                              : acc[k];
        return mi >= signals[k].rate - kMiTolerance;
    };

    for (std::int64_t t = 1; t <= policy.limit && !survivors.empty(); ++t) {
        // Extend per-slot sequences for every user in index order, decoded
        // users included, so a stateful extender sees a fixed layout.
        for (std::size_t k = 0; k < m; ++k) {
            if (signals[k].static_gain()) continue;
            if (alpha[k].size() < static_cast<std::size_t>(t)) {
                if (!extend_gain)
                    throw std::out_of_range("per-slot gains exhausted and no extender given");
                const double g = extend_gain(k, t);
                if (!(g >= 0.0))
                    throw std::invalid_argument("gain extender returned a negative gain");
                alpha[k].push_back(g);
            }
        }

        double tot = 0.0;
        if (sic) {
            for (std::size_t k : survivors) tot += beta_at(k, t);
        } else {
            for (std::size_t k = 0; k < m; ++k) tot += beta_at(k, t);
        }
        interference.push_back(tot);

        for (std::size_t k : survivors) {
            const double b = beta_at(k, t);
            const double snr = b / (tot - b + 1.0);
            acc[k] += mode == FrameMode::sic_repetition ? snr : std::log2(1.0 + snr);
        }

        while (true) {
            std::vector<std::size_t> batch;
            for (std::size_t k : survivors)
                if (decodable(k)) batch.push_back(k);
            if (batch.empty()) break;
            for (std::size_t k : batch) {
                trace.decode_slot[k] = t;
                trace.decode_order.push_back(k);
            }
            std::erase_if(survivors, [&](std::size_t k) {
                return trace.decode_slot[k].has_value();
            });
            if (!sic) break;  // no cancellation: one pass per slot
            // Retroactive cancellation: strip the batch from every buffered
            // slot and re-credit the survivors.
            for (std::int64_t s = 1; s <= t; ++s)
                for (std::size_t k : batch)
                    interference[static_cast<std::size_t>(s - 1)] -= beta_at(k, s);
            for (std::size_t k : survivors) acc[k] = 0.0;
            for (std::int64_t s = 1; s <= t; ++s) {
                const double tot_s = interference[static_cast<std::size_t>(s - 1)];
                for (std::size_t k : survivors) {
                    const double b = beta_at(k, s);
                    const double snr = b / (tot_s - b + 1.0);
                    acc[k] += mode == FrameMode::sic_repetition ? snr : std::log2(1.0 + snr);
                }
            }
        }
    }

    for (std::size_t k = 0; k < m; ++k)
        if (trace.decode_slot[k])
            trace.frame_length = std::max(trace.frame_length, *trace.decode_slot[k]);
    trace.truncated = !survivors.empty();
    return trace;
}

inline DecodeTrace run_frame(const std::vector<UserSignal>& signals,
                             TerminationPolicy policy, FrameMode mode,
                             const GainExtender& extend_gain) {
    validate_signals(signals);
    policy.validate();
    const bool all_static = std::all_of(signals.begin(), signals.end(),
                                        [](const UserSignal& s) { return s.static_gain(); });
    if (all_static) return run_static_frame(signals, policy, mode);
    return run_slotwise_frame(signals, policy, mode, extend_gain);
}

} // namespace detail

/// SINR of `user` at `slot` (1-based) when the users in `survivors` are
/// still transmitting, with unit noise power:
/// beta_user / (sum of other survivors' beta + 1).
inline double sinr(std::size_t user, const std::vector<std::size_t>& survivors,
                   const std::vector<UserSignal>& signals, std::int64_t slot = 1) {
    if (std::find(survivors.begin(), survivors.end(), user) == survivors.end())
        throw std::invalid_argument("sinr: user is not in the survivor set");
    auto beta = [&](std::size_t k) {
        const auto& s = signals.at(k);
        if (s.static_gain()) return std::get<double>(s.gains) * s.power;
        const auto& v = std::get<std::vector<double>>(s.gains);
        if (slot < 1 || static_cast<std::size_t>(slot) > v.size())
            throw std::out_of_range("sinr: slot outside the stored gain sequence");
        return v[static_cast<std::size_t>(slot - 1)] * s.power;
    };
    double interference = 0.0;
    for (std::size_t m : survivors)
        if (m != user) interference += beta(m);
    return beta(user) / (interference + 1.0);
}

/// HARQ-IR with successive interference cancellation. Every undecoded
/// user's information accumulates as sum_t log2(1 + SINR); a decode removes
/// that user from all buffered slots (re-crediting the past at the lower
/// interference) and decoding repeats within the slot until no further user
/// crosses its rate, so several users can be acknowledged in the same slot.
inline DecodeTrace run_sic_ir_frame(const std::vector<UserSignal>& signals,
                                    TerminationPolicy policy = {},
                                    const GainExtender& extend_gain = {}) {
    return detail::run_frame(signals, policy, detail::FrameMode::sic_ir, extend_gain);
}

/// HARQ-IR baseline without interference cancellation: every user faces the
/// full multiple-access interference in every slot, even after other users
/// finish, and the frame ends at the slowest user.
inline DecodeTrace run_nosic_ir_frame(const std::vector<UserSignal>& signals,
                                      TerminationPolicy policy = {},
                                      const GainExtender& extend_gain = {}) {
    return detail::run_frame(signals, policy, detail::FrameMode::nosic_ir, extend_gain);
}

/// Repetition baseline with SIC: identical coded blocks, so SNR accumulates
/// instead of information and a user decodes once log2(1 + sum of SINRs)
/// reaches its rate. Cancellation semantics match run_sic_ir_frame.
inline DecodeTrace run_sic_repetition_frame(const std::vector<UserSignal>& signals,
                                            TerminationPolicy policy = {},
                                            const GainExtender& extend_gain = {}) {
    return detail::run_frame(signals, policy, detail::FrameMode::sic_repetition, extend_gain);
}

/// Slots a single interference-free user needs: ceil(rate / log2(1 + gain*power)).
/// nullopt if the received power is zero (never decodes).
inline std::optional<std::int64_t> conventional_harq_length(double gain, double power,
                                                            double rate) {
    const double received = gain * power;
    if (!(received > 0.0)) return std::nullopt;
    return slots_needed(rate, std::log2(1.0 + received));
}

/// Frame length when all users share one overall channel gain `beta`:
/// the smallest T with R_(n) <= T * log2(1 + beta / ((M-n) beta + 1)) for
/// every n, rates sorted ascending (the weakest-stage user decodes first).
inline std::int64_t frame_length_equal_gain(double beta, std::vector<double> rates) {
    if (!(beta > 0.0))
        throw std::invalid_argument("frame_length_equal_gain: beta must be > 0");
    if (rates.empty())
        throw std::invalid_argument("frame_length_equal_gain: rates must be nonempty");
    std::sort(rates.begin(), rates.end());
    const auto m = static_cast<double>(rates.size());
    std::int64_t frame = 1;
    for (std::size_t n = 1; n <= rates.size(); ++n) {
        const double c = std::log2(1.0 + beta / ((m - static_cast<double>(n)) * beta + 1.0));
        frame = std::max(frame, slots_needed(rates[n - 1], c));
    }
    return frame;
}

namespace detail {

// Stage SINRs zeta_(n) = beta_(n) / (B_(n) + 1) for descending-sorted betas,
// where B_(n) is the residual interference sum_{m > n} beta_(m).
inline std::vector<double> stage_sinrs(std::vector<double> betas) {
    std::sort(betas.begin(), betas.end(), std::greater<>());
    double residual = 0.0;
    for (double b : betas) residual += b;
    std::vector<double> zeta(betas.size());
    for (std::size_t n = 0; n < betas.size(); ++n) {
        residual -= betas[n];
        zeta[n] = betas[n] / (residual + 1.0);
    }
    return zeta;
}

} // namespace detail

/// Frame length when all users share one rate: decoding proceeds in
/// descending order of overall gain, and the frame is the smallest T with
/// R <= T * log2(1 + zeta_(n)) at every stage n.
inline std::int64_t frame_length_equal_rate(const std::vector<double>& betas, double rate) {
    if (betas.empty())
        throw std::invalid_argument("frame_length_equal_rate: betas must be nonempty");
    for (double b : betas)
        if (!(b > 0.0))
            throw std::invalid_argument("frame_length_equal_rate: betas must be > 0");
    std::int64_t frame = 1;
    for (double z : detail::stage_sinrs(betas))
        frame = std::max(frame, slots_needed(rate, std::log2(1.0 + z)));
    return frame;
}

/// If every stage SINR falls in the window where a user decodes at exactly
/// slot T (2^{R/T} - 1 <= zeta, left-closed, and below the T-1 threshold),
/// every stage completes at the same slot T; returns that T, else nullopt.
/// Whenever this returns T, frame_length_equal_rate returns T as well.
inline std::optional<std::int64_t> uniform_decode_window(const std::vector<double>& betas,
                                                         double rate) {
    if (betas.empty())
        throw std::invalid_argument("uniform_decode_window: betas must be nonempty");
    for (double b : betas)
        if (!(b > 0.0))
            throw std::invalid_argument("uniform_decode_window: betas must be > 0");
    std::optional<std::int64_t> window;
    for (double z : detail::stage_sinrs(betas)) {
        const std::int64_t t = slots_needed(rate, std::log2(1.0 + z));
        if (t >= kNeverDecodes) return std::nullopt;
        if (!window) window = t;
        if (*window != t) return std::nullopt;
    }
    return window;
}

} // namespace rtxd
