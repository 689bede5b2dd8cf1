#pragma once

#include <cstddef>
#include <vector>

#include "prnu/image.hpp"
#include "prnu/io.hpp"

namespace prnu {

inline constexpr double kDefaultEpsR = 1e-6;

// Running sums of the maximum-likelihood estimator: numerator = sum W o Xhat,
// r = sum Xhat o Xhat.
struct EstimationAccumulator {
    Image numerator;
    Image r;
    std::uint32_t l = 0;

    EstimationAccumulator(int rows, int cols)
        : numerator(rows, cols, 0.0), r(rows, cols, 0.0) {}

    void add(const Image& w, const Image& xhat);
};

struct FinalizeStats {
    std::size_t low_r_pixels = 0; // pixels where r < eps_r (division guarded)
};

// K_hat = numerator / max(R, eps_r) pointwise. Dark content makes R tiny and
// boosts whatever noise sits in the numerator; that boosting is real leakage,
// so it is guarded against 0 but never suppressed.
FingerprintBundle finalize(const EstimationAccumulator& acc, double eps_r = kDefaultEpsR,
                           FinalizeStats* stats = nullptr);

// Residual/denoised pairs held as parallel arrays, the shared currency of
// fingerprint estimation, split-based power estimation and query scoring.
struct ResidualSet {
    std::vector<Image> w;
    std::vector<Image> xhat;

    std::size_t count() const { return w.size(); }
    int rows() const { return w.empty() ? 0 : w.front().rows(); }
    int cols() const { return w.empty() ? 0 : w.front().cols(); }
};

// Accumulates the chosen images in ascending index order (bit-identical
// result for any permutation of `indices` and any thread count).
FingerprintBundle estimate_fingerprint(const ResidualSet& set,
                                       const std::vector<std::size_t>& indices,
                                       double eps_r = kDefaultEpsR,
                                       FinalizeStats* stats = nullptr);

// Subtracts every row mean, then every column mean of the result.
Image zero_mean(const Image& k);

// Suppresses periodic (non-unique) spectral components: the bin power plane
// |F|^2 is box-averaged (periodic wrap), a white floor sigma_f^2 is taken as
// median/ln 2 over non-DC bins, and the Wiener estimate of the excess above
// the floor is removed, leaving gain sigma_f^2 / max(S, sigma_f^2) <= 1.
// The DC bin passes through unchanged.
Image dft_wiener(const Image& k, int window = 5);

// Divides by the local standard deviation (floored at 1e-12) at every pixel.
Image whiten(const Image& k, int window = 5);

struct PostprocessOptions {
    bool zero_mean = true;
    bool dft_wiener = true;
    bool whiten = false; // mitigation, off by default
    int wiener_window = 5;
    int whiten_window = 5;
};

// Applies the enabled steps in the fixed order zero_mean -> dft_wiener ->
// whiten and records them in the bundle flags.
void postprocess(FingerprintBundle& b, const PostprocessOptions& opts);

} // namespace prnu
