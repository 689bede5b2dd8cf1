#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace prnu {

// Counter-based random numbers built on the SplitMix64 finalizer. Every draw
// is a pure function of (seed, stream, counter), so tiles of a field can be
// generated in parallel with output bit-identical to sequential generation.
//
// Stream layout:
//   kStreamPrnu     PRNU gain field, counter = pixel index
//   kStreamCapture  additive capture noise, counter = pixel index
//   kStreamTexture  textured test content, counter = pixel index
//   kStreamShuffle  subset sampling / split shuffles
//   kStreamTrial    per-trial seeds in the evaluation harness
// Gaussian draws consume counters (2i, 2i+1).

inline constexpr std::uint64_t kStreamPrnu = 0;
inline constexpr std::uint64_t kStreamCapture = 1;
inline constexpr std::uint64_t kStreamTexture = 2;
inline constexpr std::uint64_t kStreamShuffle = 3;
inline constexpr std::uint64_t kStreamTrial = 4;

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// A fresh 64-bit seed for sub-experiment k (trials, splits, repetitions).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
    return mix64(mix64(seed + kGolden) + (k + 1) * kGolden);
}

class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : base_(mix64(mix64(seed + kGolden) ^ mix64((stream + 1) * kGolden))) {}

    std::uint64_t bits(std::uint64_t i) const { return mix64(base_ + (i + 1) * kGolden); }

    // [0, 1)
    double uniform(std::uint64_t i) const {
        return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
    }

    // (0, 1], safe under log()
    double uniform_oc(std::uint64_t i) const {
        return static_cast<double>((bits(i) >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller on counters (2i, 2i+1).
    double gaussian(std::uint64_t i) const {
        const double u1 = uniform_oc(2 * i);
        const double u2 = uniform(2 * i + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t base_;
};

// Stateful convenience wrapper for inherently sequential uses (shuffles).
class SequentialRng {
public:
    SequentialRng(std::uint64_t seed, std::uint64_t stream) : s_(seed, stream) {}

    std::uint64_t next() { return s_.bits(ctr_++); }
    double uniform() { return s_.uniform(ctr_++); }
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

private:
    RandomStream s_;
    std::uint64_t ctr_ = 0;
};

template <class T>
void shuffle(std::vector<T>& v, SequentialRng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

// k distinct indices from [0, n), returned in ascending order so downstream
// accumulation always runs in image-index order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, SequentialRng& rng);

} // namespace prnu
