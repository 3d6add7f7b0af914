// Deterministic RNG used everywhere randomness is needed. SplitMix64 with
// hand-rolled uniform/normal transforms so streams are reproducible
// bit-for-bit regardless of the standard library.
#pragma once

#include <cmath>
#include <cstdint>

namespace boxfuse {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(
                        next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    /// Box-Muller normal draw; one value per call.
    double normal(double mean, double stddev) {
        const double u1 = std::fmax(uniform(), 1e-300);
        const double u2 = uniform();
        return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Independent child stream; mixing keeps streams decorrelated.
    Rng fork(std::uint64_t salt) const {
        Rng child(state_ ^ (0x9e3779b97f4a7c15ULL + salt * 0xbf58476d1ce4e5b9ULL));
        child.next_u64();
        return child;
    }

  private:
    std::uint64_t state_;
};

}  // namespace boxfuse
