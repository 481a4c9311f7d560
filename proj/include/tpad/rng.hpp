#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tpad/errors.hpp"
#include "tpad/types.hpp"

namespace tpad {

/// Deterministic counter-based generator (splitmix64). The output stream is
/// a pure function of the seed, identical across platforms, compilers and
/// runs; every seeded pipeline in this library bottoms out here.
///
/// Reference sequence: Steele, Lea & Flood's SplittableRandom finalizer,
/// state advanced by the 64-bit golden-ratio increment.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi). Degenerate lo == hi yields lo.
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    std::uint64_t uniform_index(std::uint64_t n) {
        // modulo bias is irrelevant at the sizes used here (n << 2^64)
        return next_u64() % n;
    }

    /// One Gaussian draw via Box-Muller on the uniform stream. The sine
    /// variate of the pair is discarded so each draw consumes exactly two
    /// uniforms; the sequence stays a pure function of the counter.
    double gaussian(double mean = 0.0, double std = 1.0) {
        if (std < 0.0) throw ParamError("gaussian: negative std");
        if (std == 0.0) {
            next_u64();
            next_u64();
            return mean;
        }
        constexpr double two_pi = 6.283185307179586476925286766559;
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + std * r * std::cos(two_pi * u2);
    }

    /// Derived generator for a parallel stream. Never share one Rng across
    /// tasks; derive one child per task index instead.
    Rng child(std::uint64_t stream) const {
        std::uint64_t z = seed_ ^ (0x9e3779b97f4a7c15ull * (stream + 1));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return Rng(z ^ (z >> 31));
    }

    /// Fisher-Yates shuffle of [0, n) as an index permutation.
    std::vector<Index> permutation(Index n) {
        std::vector<Index> idx(static_cast<size_t>(n));
        for (Index i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
        for (Index i = n - 1; i > 0; --i) {
            Index j = static_cast<Index>(uniform_index(static_cast<std::uint64_t>(i) + 1));
            std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
        }
        return idx;
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

/// n Gaussian draws. std = 0 degenerates to a constant sequence.
inline Vector gaussian(Rng& rng, Index n, double mean, double std) {
    if (std < 0.0) throw ParamError("gaussian: negative std");
    Vector out(n);
    for (Index i = 0; i < n; ++i) out[i] = rng.gaussian(mean, std);
    return out;
}

} // namespace tpad
