#pragma once

#include <stdexcept>
#include <vector>

#include "rtxd/rng.hpp"

namespace rtxd {

/// Rayleigh fading model for the channel power gain |h|^2: exponentially
/// distributed with mean `mean_gain`. `static_per_frame` draws one gain per
/// user per frame; `iid_per_slot` draws a fresh gain per user per slot.
struct FadingSpec {
    enum class Mode { static_per_frame, iid_per_slot };

    Mode mode = Mode::static_per_frame;
    double mean_gain = 1.0;

    void validate() const {
        if (!(mean_gain > 0.0))
            throw std::invalid_argument("FadingSpec: mean_gain must be > 0");
    }
};

/// Population of `population` users, each independently active with
/// probability `access_prob` in a frame.
struct ActivitySpec {
    int population = 0;
    double access_prob = 0.0;

    void validate() const {
        if (population < 0)
            throw std::invalid_argument("ActivitySpec: population must be >= 0");
        if (!(access_prob >= 0.0 && access_prob <= 1.0))
            throw std::invalid_argument("ActivitySpec: access_prob out of range [0,1]");
    }
};

/// One channel power gain draw (inverse-CDF, see RngStream::exponential).
inline double draw_gain(const FadingSpec& spec, RngStream& rng) {
    spec.validate();
    return rng.exponential(spec.mean_gain);
}

/// Indices of the users active in this frame, ascending.
inline std::vector<std::size_t> draw_active_set(const ActivitySpec& spec, RngStream& rng) {
    spec.validate();
    std::vector<std::size_t> active;
    for (int k = 0; k < spec.population; ++k)
        if (rng.bernoulli(spec.access_prob)) active.push_back(static_cast<std::size_t>(k));
    return active;
}

} // namespace rtxd
