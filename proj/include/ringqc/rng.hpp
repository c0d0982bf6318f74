#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace ringqc {

// Deterministic random stream. The engine is std::mt19937_64 (fully specified
// by the standard); every transform below is hand-rolled so that a given seed
// produces the same sample sequence on any platform.
class Rng {
  public:
    Rng() : engine_(0x9e3779b97f4a7c15ull) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (always draws two uniforms).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * 3.141592653589793 * u2);
    }

    /// Poisson sample. Multiplication method for small means, normal
    /// approximation with continuity correction above 64 (kick counts per
    /// step are tiny in practice; the tail path keeps long runs cheap).
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0)
            return 0;
        if (mean < 64.0) {
            const double limit = std::exp(-mean);
            double prod = uniform();
            std::uint64_t n = 0;
            while (prod > limit) {
                prod *= uniform();
                ++n;
            }
            return n;
        }
        const double x = mean + std::sqrt(mean) * normal();
        return x < 0.5 ? 0 : static_cast<std::uint64_t>(x + 0.5);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniformly distributed unit vector (Marsaglia rejection).
    std::array<double, 3> unit_vector() {
        for (;;) {
            const double a = 2.0 * uniform() - 1.0;
            const double b = 2.0 * uniform() - 1.0;
            const double s = a * a + b * b;
            if (s >= 1.0 || s == 0.0)
                continue;
            const double t = 2.0 * std::sqrt(1.0 - s);
            return {a * t, b * t, 1.0 - 2.0 * s};
        }
    }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // modulo rejection to avoid bias
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x = engine_();
        while (x >= limit)
            x = engine_();
        return x % n;
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace ringqc
