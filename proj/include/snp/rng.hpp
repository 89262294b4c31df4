#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace snp {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Derive an independent child seed from a base seed and up to two labels.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = base;
    detail::splitmix64(s);
    s ^= 0x517cc1b727220a95ULL * (a + 1);
    detail::splitmix64(s);
    s ^= 0x2545f4914f6cdd1dULL * (b + 1);
    return detail::splitmix64(s);
}

/// Counter-based substream generator. Stream (seed, index) is independent of
/// every other index, so per-point sampling parallelizes without coupling and
/// reproduces bit-for-bit regardless of the thread count.
class SubstreamRng {
public:
    SubstreamRng(std::uint64_t seed, std::uint64_t stream)
        : state_(derive_seed(seed, stream)) {}

    std::uint64_t next_u64() { return detail::splitmix64(state_); }

    /// Uniform in (0, 1].
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; generates in pairs.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        have_spare_ = true;
        return r * std::cos(angle);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace snp
