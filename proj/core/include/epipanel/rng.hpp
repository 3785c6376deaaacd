#pragma once

#include <cstdint>
#include <vector>

namespace epipanel {

/// splitmix64 finalizer; good avalanche, used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for an (x, y) grid cell, independent of evaluation order. Identical
/// (seed, x, y) always yields the identical substream, which is what makes
/// parallel permutation batteries reproducible.
inline std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t x, std::uint64_t y) {
    return mix64(mix64(seed ^ mix64(x)) ^ mix64(y + 0x632be59bd9b4e019ULL));
}

/// Small deterministic PRNG (xoshiro-style splitmix stream). We avoid
/// std::shuffle / std::uniform_int_distribution because their draw sequences
/// are implementation-defined.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound) by rejection; unbiased.
    std::uint64_t bounded(std::uint64_t bound) {
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Fisher-Yates with an explicit draw sequence (stable across platforms).
template <typename T>
void shuffle(std::vector<T>& v, SplitMix& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace epipanel
