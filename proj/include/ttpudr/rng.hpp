#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace ttpudr::rng {

/// splitmix64 step; the workhorse behind all seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-free deterministic random stream. Identical sequences on every
/// platform for a given seed, unlike std::normal_distribution.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1).
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (cached spare).
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = next_uniform();
        } while (u1 <= 0.0);
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derive an independent substream by hashing the master seed with
/// coordinates (sweep cell, shuffle index, ...). Serial and parallel runs
/// see the same streams.
inline Stream derive(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
    std::uint64_t s = master;
    splitmix64(s);
    for (std::uint64_t c : coords) {
        s ^= splitmix64(s) + c;
        splitmix64(s);
    }
    return Stream(s);
}

}  // namespace ttpudr::rng
