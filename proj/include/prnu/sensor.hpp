#pragma once

#include <cstdint>

#include "prnu/image.hpp"

namespace prnu {

// The simulator's true PRNU: K is i.i.d. Gaussian(0, sigma_k^2).
struct SensorGroundTruth {
    Image k;
    double sigma_k = 0.0;
    std::uint64_t seed = 0;
};

struct CaptureConfig {
    double sigma_n = 2.0;      // additive noise std, luminance levels
    bool clip_to_8bit = false; // clamp to [0,255] and round (for file output)
    std::uint64_t seed = 0;
};

SensorGroundTruth gen_prnu(int rows, int cols, double sigma_k, std::uint64_t seed);

// Y = (1 + K) o X + N with N i.i.d. Gaussian(0, sigma_n^2).
Image capture(const Image& x, const SensorGroundTruth& sensor, const CaptureConfig& cfg);

Image flat_field(int rows, int cols, double level);

// Pseudo-natural content: uniform noise in [0,255] blurred with a Gaussian
// kernel of std `smoothness` (0 = raw i.i.d. field).
Image textured_field(int rows, int cols, std::uint64_t seed, double smoothness);

namespace serial {
SensorGroundTruth gen_prnu(int rows, int cols, double sigma_k, std::uint64_t seed);
Image capture(const Image& x, const SensorGroundTruth& sensor, const CaptureConfig& cfg);
} // namespace serial

} // namespace prnu
