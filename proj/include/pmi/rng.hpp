#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace pmi {

// SplitMix64 finalizer. Used to derive independent stream seeds from
// (global seed, stream tag, cell coordinates, ...) so that results do not
// depend on scheduling or evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ b);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag,
                              std::span<const int> coords) {
    std::uint64_t s = mix_seed(seed, tag);
    for (int c : coords) s = mix_seed(s, static_cast<std::uint64_t>(c) + 0x51ed2701ULL);
    return s;
}

// Seeded random stream. All transforms are written out explicitly because
// std::uniform_real_distribution / std::normal_distribution are
// implementation-defined; mt19937_64 itself is fully specified.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // uniform in [0, 1) with 53 random bits
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [0, n); modulo bias is ~n/2^64 and irrelevant here
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // standard normal via Box-Muller, pair-cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        // u1 = 0 would take log(0); the smallest representable draw is fine
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace pmi
