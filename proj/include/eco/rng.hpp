#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace eco {

// splitmix64; used both as a generator core and to mix stream ids.
inline std::uint64_t splitmix64_next(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic generator with its own uniform/normal transforms so that
// seeded runs reproduce byte-identical traces regardless of the standard
// library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        splitmix64_next(state_);
        splitmix64_next(state_);
    }

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // uniform on [0, 1)
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, hi]
    double uniform_pos(double hi) { return (1.0 - uniform01()) * hi; }

    // Box-Muller
    double normal(double mean, double stddev) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return mean + stddev * r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Derives an independent stream seed from (master, a, b, c), e.g.
// (master seed, user id, day index, purpose tag). Parallel workers can
// then draw from disjoint deterministic streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = master;
    splitmix64_next(s);
    s ^= 0x9e3779b97f4a7c15ULL * (a + 1);
    splitmix64_next(s);
    s ^= 0xbf58476d1ce4e5b9ULL * (b + 1);
    splitmix64_next(s);
    s ^= 0x94d049bb133111ebULL * (c + 1);
    return splitmix64_next(s);
}

} // namespace eco
