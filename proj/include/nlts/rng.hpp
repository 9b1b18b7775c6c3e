#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace nlts {

/// Deterministic random stream. Wraps std::mt19937_64 (whose output sequence
/// is fixed by the standard) and implements the distribution transforms
/// in-house so that results are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(mix(seed, 0x6a09e667f3bcc909ull)) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return lo + static_cast<int>(r % span);
    }

    /// Uniform in (0, 1], 53-bit resolution.
    double uniform_pos() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal draw (Box-Muller, two uniforms per call).
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform_pos();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// splitmix64-style combine for deriving independent substreams.
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static std::uint64_t hash_str(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace nlts
