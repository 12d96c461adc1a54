#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace lactate {

// Counter-free random streams for reproducible Monte Carlo. Every consumer
// derives its own stream from (master seed, key...) so results never depend
// on execution order or thread count. The generator is xoshiro256**, seeded
// through SplitMix64; normals use Box-Muller with a fixed two-draw layout so
// the stream position is a pure function of how many variates were taken.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RngStream {
public:
    /// Derive an independent stream from a master seed and a key path.
    static RngStream derive(std::uint64_t master_seed, std::initializer_list<std::uint64_t> keys) {
        std::uint64_t h = master_seed;
        splitmix64(h);
        for (std::uint64_t k : keys) {
            h ^= splitmix64(k) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            splitmix64(h);
        }
        RngStream s;
        std::uint64_t sm = h;
        for (auto& word : s.state_) word = splitmix64(sm);
        return s;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log() argument.
    double uniform01_open_low() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal; consumes exactly two raw draws.
    double normal() {
        const double u1 = uniform01_open_low();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Unbiased integer in [0, n) via mask rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t mask = std::bit_ceil(n) - 1;
        for (;;) {
            const std::uint64_t v = next_u64() & mask;
            if (v < n) return v;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {1, 2, 3, 4};
};

// Key-path tags so unrelated consumers of the same master seed never collide.
namespace stream_tag {
inline constexpr std::uint64_t resample_selection = 0x5245534d504c4531ULL;
inline constexpr std::uint64_t measurement_noise = 0x4e4f495345303031ULL;
inline constexpr std::uint64_t bootstrap_mean = 0x424f4f5453545250ULL;
inline constexpr std::uint64_t synth_athlete = 0x53594e5448415448ULL;
}  // namespace stream_tag

}  // namespace lactate
