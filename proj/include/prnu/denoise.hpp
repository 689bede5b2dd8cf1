#pragma once

#include <string>

#include "prnu/image.hpp"

namespace prnu {

enum class DenoiserKind { WaveletMihcak, GaussianBlur, Oracle };

struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::WaveletMihcak;
    double sigma0 = 5.0;    // assumed noise std in coefficient units (wavelet kind)
    int levels = 4;         // decomposition depth (wavelet kind)
    double blur_sigma = 1.0; // std of the blur kernel (gaussian kind)

    // e.g. "mihcak-db8-l4-s5.0", "gauss-b1.5", "oracle"
    std::string id() const;
    void validate(int rows, int cols) const;
};

// Locally adaptive Wiener shrinkage of one detail subband: the signal
// variance at each coefficient is the smallest windowed mean of c^2 over
// window sizes {3,5,7,9} minus sigma0^2, clamped at 0; the coefficient is
// scaled by s/(s+sigma0^2). Exposed for direct testing.
Image shrink_subband(const Image& coeffs, double sigma0);

// Estimate the noise-free image. kind=Oracle returns *truth.
Image denoise(const Image& y, const DenoiserSpec& spec, const Image* truth = nullptr);

// W = Y - Xhat
Image residual(const Image& y, const Image& xhat);

namespace serial {
Image shrink_subband(const Image& coeffs, double sigma0);
Image denoise(const Image& y, const DenoiserSpec& spec, const Image* truth = nullptr);
} // namespace serial

} // namespace prnu
