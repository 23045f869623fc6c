#pragma once

#include <cmath>
#include <cstdint>

namespace ebitsim {

/**
 * splitmix64 generator. Chosen over std::mt19937 because its output is
 * pinned by the algorithm itself, so identical seeds give identical data
 * files on every platform and standard library. Each phase bin derives an
 * independent stream from (seed, bin index), making the scan order and any
 * future parallelism irrelevant to the output.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Stream for one phase bin, decorrelated from neighbours.
    static Rng for_bin(std::uint64_t seed, std::uint64_t bin) {
        Rng mix(seed + 0x9e3779b97f4a7c15ULL * (bin + 1));
        mix.next_u64();
        return Rng(mix.next_u64());
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in (0,1): 53 random bits, never exactly 0.
    double uniform() {
        return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are generated together.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = uniform();
        double v = uniform();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 2.0 * M_PI * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double exponential() { return -std::log(uniform()); }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Name recorded in data file headers.
inline const char* rng_name() { return "splitmix64-boxmuller"; }

} // namespace ebitsim
