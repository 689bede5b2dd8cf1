#pragma once

#include <vector>

#include "prnu/image.hpp"

namespace prnu {

// One decomposition level. lh = horizontal detail, hl = vertical detail,
// hh = diagonal detail. in_rows/in_cols record the size fed into this level
// (odd lengths are replicate-padded to even before the split, and the
// inverse crops back).
struct DetailBands {
    Image lh, hl, hh;
    int in_rows = 0;
    int in_cols = 0;
};

struct WaveletPyramid {
    std::vector<DetailBands> detail; // finest level first
    Image approx;
    int levels() const { return static_cast<int>(detail.size()); }
};

// Separable 2-D orthonormal Daubechies-8 transform, periodized at the
// boundary. The transform matrix is orthogonal, so reconstruction is exact
// and coefficient energy equals pixel energy (for even dimensions).
WaveletPyramid dwt2(const Image& x, int levels);
Image idwt2(const WaveletPyramid& pyr);

namespace serial {
WaveletPyramid dwt2(const Image& x, int levels);
Image idwt2(const WaveletPyramid& pyr);
} // namespace serial

namespace wavelet_detail {
inline constexpr int kFilterLen = 16;
// Daubechies-8 orthonormal scaling filter, computed once by spectral
// factorization so the taps are accurate to full double precision.
const double* scaling_filter();
} // namespace wavelet_detail

} // namespace prnu
