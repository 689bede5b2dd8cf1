#pragma once

#include "prnu/image.hpp"

namespace prnu {

// Half-sample symmetric extension: [x2 x1 x0 | x0 x1 x2]. Used by every
// spatial-window kernel so no pixel is privileged at the boundary.
int reflect_index(int i, int n);

// Mean over a w x w window (w odd), symmetric extension.
Image box_mean(const Image& a, int window);

// Unbiased local sample variance over a w x w window (denominator w*w-1),
// clamped at 0 against rounding.
Image local_sample_variance(const Image& a, int window);

// Separable Gaussian blur, kernel radius ceil(3*sigma), symmetric extension.
// sigma <= 0 returns the input unchanged.
Image gaussian_blur(const Image& a, double sigma);

namespace serial {
Image box_mean(const Image& a, int window);
Image local_sample_variance(const Image& a, int window);
Image gaussian_blur(const Image& a, double sigma);
} // namespace serial

} // namespace prnu
