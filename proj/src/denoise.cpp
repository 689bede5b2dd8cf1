#include "prnu/denoise.hpp"

#include <cmath>
#include <cstdio>

#include "prnu/kernels.hpp"
#include "prnu/wavelet.hpp"

namespace prnu {

std::string DenoiserSpec::id() const {
    char buf[64];
    switch (kind) {
    case DenoiserKind::WaveletMihcak:
        std::snprintf(buf, sizeof(buf), "mihcak-db8-l%d-s%.1f", levels, sigma0);
        return buf;
    case DenoiserKind::GaussianBlur:
        std::snprintf(buf, sizeof(buf), "gauss-b%.1f", blur_sigma);
        return buf;
    case DenoiserKind::Oracle:
        return "oracle";
    }
    return "unknown";
}

void DenoiserSpec::validate(int rows, int cols) const {
    switch (kind) {
    case DenoiserKind::WaveletMihcak: {
        if (sigma0 <= 0.0) throw DataError("denoiser: sigma0 must be positive");
        if (levels < 1) throw DataError("denoiser: levels must be >= 1");
        const int min_dim = rows < cols ? rows : cols;
        if (min_dim < (1 << levels)) throw DataError("denoiser: dims too small for level count");
        break;
    }
    case DenoiserKind::GaussianBlur:
        if (blur_sigma <= 0.0) throw DataError("denoiser: blur_sigma must be positive");
        break;
    case DenoiserKind::Oracle:
        break;
    }
}

namespace {

const int kVarianceWindows[4] = {3, 5, 7, 9};

Image shrink_subband_impl(const Image& c, double sigma0, bool par) {
    const double n0 = sigma0 * sigma0;
    Image csq(c.rows(), c.cols());
#pragma omp parallel for schedule(static) if (par)
    for (long long i = 0; i < static_cast<long long>(c.size()); ++i) csq[i] = c[i] * c[i];

    Image svar; // min over windows of boxmean(c^2)
    for (int w : kVarianceWindows) {
        Image m = par ? box_mean(csq, w) : serial::box_mean(csq, w);
        if (svar.empty()) {
            svar = std::move(m);
        } else {
#pragma omp parallel for schedule(static) if (par)
            for (long long i = 0; i < static_cast<long long>(svar.size()); ++i)
                if (m[i] < svar[i]) svar[i] = m[i];
        }
    }

    Image out(c.rows(), c.cols());
#pragma omp parallel for schedule(static) if (par)
    for (long long i = 0; i < static_cast<long long>(c.size()); ++i) {
        const double s = svar[i] - n0 > 0.0 ? svar[i] - n0 : 0.0;
        out[i] = s > 0.0 ? c[i] * (s / (s + n0)) : 0.0;
    }
    return out;
}

Image denoise_impl(const Image& y, const DenoiserSpec& spec, const Image* truth, bool par) {
    spec.validate(y.rows(), y.cols());
    switch (spec.kind) {
    case DenoiserKind::Oracle:
        if (truth == nullptr) throw DataError("oracle denoiser requires the true image");
        require_same_shape(y, *truth, "oracle denoiser");
        return *truth;
    case DenoiserKind::GaussianBlur:
        return par ? gaussian_blur(y, spec.blur_sigma)
                   : serial::gaussian_blur(y, spec.blur_sigma);
    case DenoiserKind::WaveletMihcak: {
        WaveletPyramid pyr = par ? dwt2(y, spec.levels) : serial::dwt2(y, spec.levels);
        for (DetailBands& b : pyr.detail) {
            b.lh = shrink_subband_impl(b.lh, spec.sigma0, par);
            b.hl = shrink_subband_impl(b.hl, spec.sigma0, par);
            b.hh = shrink_subband_impl(b.hh, spec.sigma0, par);
        }
        return par ? idwt2(pyr) : serial::idwt2(pyr);
    }
    }
    throw DataError("denoise: invalid spec");
}

} // namespace

Image shrink_subband(const Image& c, double sigma0) { return shrink_subband_impl(c, sigma0, true); }

Image denoise(const Image& y, const DenoiserSpec& spec, const Image* truth) {
    return denoise_impl(y, spec, truth, true);
}

Image residual(const Image& y, const Image& xhat) {
    require_same_shape(y, xhat, "residual");
    return subtract(y, xhat);
}

namespace serial {
Image shrink_subband(const Image& c, double sigma0) { return shrink_subband_impl(c, sigma0, false); }
Image denoise(const Image& y, const DenoiserSpec& spec, const Image* truth) {
    return denoise_impl(y, spec, truth, false);
}
} // namespace serial

} // namespace prnu
