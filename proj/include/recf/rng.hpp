#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace recf {

// splitmix64 finalizer. Used only to derive well-separated seeds for the
// mt19937_64 streams below; the constants are the standard ones.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Deterministic seed derivation: one master seed fans out into independent
// streams identified by (stream, index), e.g. (noise, run 17). Stable across
// platforms, so recorded seeds replay exactly.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ (stream * 0xD1B54A32D192ED03ull));
    h = splitmix64(h ^ (index * 0x2545F4914F6CDD1Dull));
    return h;
}

// Seeded generator with explicitly specified sampling algorithms.
// mt19937_64's bit stream is pinned by the C++ standard, and the Gaussian
// transform below is a plain Box-Muller over 53-bit uniforms, so a seed
// fully determines every draw (std::normal_distribution is deliberately
// avoided: its algorithm is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform on [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Standard normal via Box-Muller; caches the second value of each pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] keeps the log finite.
        double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
        double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Circular complex Gaussian with E|z|^2 = variance.
    std::complex<double> cnormal(double variance) {
        double s = std::sqrt(0.5 * variance);
        double re = normal();
        double im = normal();
        return {s * re, s * im};
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace recf
