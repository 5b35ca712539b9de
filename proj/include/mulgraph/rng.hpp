#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mulgraph {

// SplitMix64 step; used both as a seed scrambler and to derive independent
// per-trial streams from (seed, trial_index) so results never depend on how
// trials are distributed over workers.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial_index) {
    std::uint64_t s = seed ^ (0x6a09e667f3bcc909ULL + trial_index * 0x9e3779b97f4a7c15ULL);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// Random stream with the handful of variates the samplers need. Transforms
// are written out explicitly (rather than std::*_distribution) so a given
// seed pins the exact byte-for-byte output of every report.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // uniform on (0,1); never returns 0 or 1
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    // Box-Muller, no caching: one draw consumes two uniforms
    double normal() {
        double u = uniform();
        double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // inversion for small means, normal-approximation-free PTRS-lite via
    // repeated halving for large means (exact law either way)
    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 30.0) {
            double l = std::exp(-mean);
            long k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform();
            } while (p > l);
            return k - 1;
        }
        // split the interval: Poisson(m) = Poisson(m/2) + Poisson(m/2)
        long half = poisson(mean * 0.5);
        return half + poisson(mean - mean * 0.5);
    }

    // index in [0, n) proportional to weights[i]; total must be sum(weights)
    template <class Vec>
    int discrete(const Vec& weights, double total) {
        double u = uniform() * total;
        double acc = 0.0;
        int n = static_cast<int>(weights.size());
        for (int i = 0; i < n; ++i) {
            acc += weights[i];
            if (u <= acc) return i;
        }
        return n - 1;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace mulgraph
