#pragma once

// Test-only oracles and helpers, independent of the library's own
// evaluation paths.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace testsupport {

// ---- adaptive Simpson quadrature -------------------------------------

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return adaptive_simpson(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 60);
}

// Defining integral of the exponential integral, via the substitution
// t = 1 + u: E_m(x) = exp(-x) * int_0^inf exp(-x u) (1 + u)^-m du.
inline double exp_integral_quadrature(int m, double x) {
    const double cut = 60.0 / x + 60.0;
    auto integrand = [m, x](double u) {
        return std::exp(-x * u) * std::pow(1.0 + u, -m);
    };
    double total = 0.0;
    // piecewise to keep the adaptive recursion shallow on wide ranges
    double lo = 0.0;
    for (double hi : {1.0, 10.0, cut}) {
        if (hi <= lo) continue;
        total += integrate(integrand, lo, hi, 1e-15);
        lo = hi;
    }
    return std::exp(-x) * total;
}

// ---- literal slot-by-slot frame reference -----------------------------
//
// Implements the decode rules directly: at each slot, every undecoded
// user's metric is recomputed from scratch over all elapsed slots with the
// current decoded set, and decoding repeats (snapshot batches) until no
// user crosses its rate. beta[t][k] is the overall gain of user k at slot
// t+1. Mode: 'i' = IR with SIC, 'n' = IR without SIC, 'r' = repetition
// with SIC.
struct ReferenceTrace {
    std::vector<std::int64_t> decode_slot;  // -1 = undecoded
    std::int64_t frame_length = 0;
    bool truncated = false;
};

inline ReferenceTrace reference_frame(const std::vector<std::vector<double>>& beta,
                                      const std::vector<double>& rates, char mode,
                                      std::int64_t limit) {
    const std::size_t m = rates.size();
    ReferenceTrace out;
    out.decode_slot.assign(m, -1);
    std::vector<char> decoded(m, 0);
    std::size_t remaining = m;

    auto metric = [&](std::size_t k, std::int64_t t) {
        double acc = 0.0;
        for (std::int64_t s = 1; s <= t; ++s) {
            double interference = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (j == k) continue;
                if (mode == 'n' || !decoded[j])
                    interference += beta[static_cast<std::size_t>(s - 1)][j];
            }
            const double snr =
                beta[static_cast<std::size_t>(s - 1)][k] / (interference + 1.0);
            acc += mode == 'r' ? snr : std::log2(1.0 + snr);
        }
        return mode == 'r' ? std::log2(1.0 + acc) : acc;
    };

    for (std::int64_t t = 1; t <= limit && remaining > 0; ++t) {
        if (beta.size() < static_cast<std::size_t>(t))
            throw std::invalid_argument("reference_frame: beta matrix too short");
        while (true) {
            std::vector<std::size_t> batch;
            for (std::size_t k = 0; k < m; ++k)
                if (!decoded[k] && metric(k, t) >= rates[k] - 1e-12) batch.push_back(k);
            if (batch.empty()) break;
            for (std::size_t k : batch) {
                decoded[k] = 1;
                out.decode_slot[k] = t;
                out.frame_length = std::max(out.frame_length, t);
                --remaining;
            }
            if (mode == 'n') break;
        }
    }
    out.truncated = remaining > 0;
    return out;
}

// ---- running mean / standard error ------------------------------------

struct Accumulator {
    std::int64_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sum_sq += x * x;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double nn = static_cast<double>(n);
        return std::fmax(0.0, (sum_sq - nn * mean() * mean()) / (nn - 1.0));
    }
    double std_error() const {
        return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
};

} // namespace testsupport
