#pragma once

// Counter-based random source. A draw is a pure function of
// (seed, stream, counter), so derived streams are reproducible
// regardless of scheduling.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace csphere {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class RandomSource {
public:
    RandomSource(std::uint64_t seed = 0, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Independent child stream, e.g. one per trial.
    RandomSource derive(std::uint64_t i) const {
        return RandomSource(seed_, splitmix64(stream_ ^ splitmix64(i + 0x632BE59BD9B4E019ULL)));
    }

    std::uint64_t next_u64() {
        const std::uint64_t key = splitmix64(seed_ ^ splitmix64(stream_));
        return splitmix64(key + 0xD1B54A32D192ED03ULL * (++counter_));
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

    // Box-Muller; the spare value is cached so draws come in pairs.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Standard complex Gaussian, E|z|^2 = 1.
    std::complex<double> complex_normal() {
        const double a = normal(), b = normal();
        return {a * std::sqrt(0.5), b * std::sqrt(0.5)};
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace csphere
