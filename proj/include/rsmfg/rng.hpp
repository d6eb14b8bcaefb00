#pragma once

#include <cmath>
#include <cstdint>

namespace rsmfg {

/// Counter-based stream: output k is a bijective mix of (key + k * gamma),
/// so a stream is fully determined by its key and position. Streams for
/// independent paths are derived by hashing (seed, indices), which makes
/// Monte Carlo results independent of scheduling order.
class CounterRng {
public:
    explicit CounterRng(uint64_t key) : key_(key) {}

    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Stream key from a seed and up to three structural indices
    /// (path, repetition, player ...).
    static uint64_t derive_key(uint64_t seed, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) {
        uint64_t k = mix(seed + 0x9E3779B97F4A7C15ull);
        k = mix(k ^ (a + 0xD1B54A32D192ED03ull));
        k = mix(k ^ (b + 0x8CB92BA72F3D8DD7ull));
        k = mix(k ^ (c + 0xABCC5167CCAD925Full));
        return k;
    }

    uint64_t next_u64() {
        counter_ += 0x9E3779B97F4A7C15ull;
        return mix(key_ + counter_);
    }

    /// Uniform draw in the open interval (0, 1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    /// Standard normal via the inverse CDF (rational approximation plus one
    /// Halley refinement). Consumes exactly one uniform, which keeps stream
    /// consumption fixed per simulation step for common-random-number reuse.
    double next_normal() { return normal_quantile(next_uniform()); }

    static double normal_quantile(double p) {
        static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                       -2.759285104469687e+02, 1.383577518672690e+02,
                                       -3.066479806614716e+01, 2.506628277459239e+00};
        static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                       -1.556989798598866e+02, 6.680131188771972e+01,
                                       -1.328068155288572e+01};
        static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                       -2.400758277161838e+00, -2.549732539343734e+00,
                                       4.374664141464968e+00,  2.938163982698783e+00};
        static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                       2.445134137142996e+00, 3.754408661907416e+00};
        constexpr double p_low = 0.02425;
        double x;
        if (p < p_low) {
            const double q = std::sqrt(-2.0 * std::log(p));
            x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        } else if (p <= 1.0 - p_low) {
            const double q = p - 0.5;
            const double r = q * q;
            x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
                (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
        } else {
            const double q = std::sqrt(-2.0 * std::log(1.0 - p));
            x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
        }
        // one Halley step against the exact CDF
        const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
        const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
        return x - u / (1.0 + 0.5 * x * u);
    }

private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace rsmfg
