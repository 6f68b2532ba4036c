// Seedable random stream. One stream per simulation run; run seeds are the
// base seed plus the run index, mixed through SplitMix64 before feeding the
// mt19937_64 engine so adjacent seeds give uncorrelated streams.

#pragma once

#include <cstdint>
#include <random>

namespace pktsched {

inline constexpr const char* kRngName = "mt19937_64+splitmix64";

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RunRng {
public:
    explicit RunRng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t s = seed;
        engine_.seed(splitmix64(s));
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Uniform in [0, bound) via 128-bit multiply-shift.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    bool next_bool() { return (next_u64() & 1) != 0; }

    // Knuth product-of-uniforms inversion; fine for the small rates used here.
    int next_poisson(double mean) {
        double limit = std::exp(-mean);
        double prod = 1.0;
        int count = -1;
        do {
            prod *= next_unit();
            ++count;
        } while (prod > limit);
        return count;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace pktsched
