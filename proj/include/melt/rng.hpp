#pragma once

#include <cmath>
#include <cstdint>

namespace melt {

// Counter-free splittable generator built on splitmix64. Every probe draws
// from its own stream derived from (seed, stream id), so results do not
// depend on how probes are scheduled across threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Independent stream for substream `id` of a logical seed. Two rounds of
    // splitmix output keyed by id decorrelate streams with nearby seeds.
    static Rng derive(std::uint64_t seed, std::uint64_t id) {
        Rng r(seed);
        std::uint64_t a = r.next_u64();
        Rng k(id + 0x9E3779B97F4A7C15ULL);
        std::uint64_t b = k.next_u64();
        return Rng(a ^ (b + 0x2545F4914F6CDD1DULL));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in (0, 1]; safe as a log() argument.
    double next_double_open() { return 1.0 - next_double(); }

    // Standard normal via Box-Muller. Caches the second variate of each pair
    // so consecutive calls consume bits deterministically.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = next_double_open();
        double v = next_double();
        double r = std::sqrt(-2.0 * std::log(u));
        double theta = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // +1 or -1 with equal probability.
    double next_sign() {
        return (next_u64() >> 63) ? 1.0 : -1.0;
    }

    std::uint64_t next_below(std::uint64_t n) {
        // Multiply-shift bounded draw; bias is negligible for n << 2^64.
        unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(wide >> 64);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace melt
