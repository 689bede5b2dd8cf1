#include "prnu/wavelet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstring>

namespace prnu {

namespace wavelet_detail {

namespace {

using cplx = std::complex<double>;

// Roots of a real-coefficient polynomial (ascending coefficients) by
// Durand-Kerner iteration; plenty for the degree-7 Daubechies polynomial.
std::vector<cplx> poly_roots(const std::vector<double>& coeff) {
    const int deg = static_cast<int>(coeff.size()) - 1;
    auto eval = [&](cplx z) {
        cplx v = 0.0;
        for (int i = deg; i >= 0; --i) v = v * z + coeff[static_cast<std::size_t>(i)];
        return v;
    };
    std::vector<cplx> r(static_cast<std::size_t>(deg));
    const cplx seed(0.4, 0.9);
    cplx p = 1.0;
    for (auto& x : r) {
        p *= seed;
        x = p;
    }
    const double lead = coeff.back();
    for (int it = 0; it < 500; ++it) {
        double moved = 0.0;
        for (int i = 0; i < deg; ++i) {
            cplx denom = lead;
            for (int j = 0; j < deg; ++j)
                if (j != i) denom *= r[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(j)];
            const cplx delta = eval(r[static_cast<std::size_t>(i)]) / denom;
            r[static_cast<std::size_t>(i)] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-16) break;
    }
    return r;
}

// Spectral factorization: |m0|^2 = (cos^2(w/2))^p P(sin^2(w/2)) with
// P(y) = sum_k C(p-1+k, k) y^k; minimal-phase z-roots are kept and the
// filter is (1+z)^p times their product, normalized to sum sqrt(2).
std::array<double, kFilterLen> compute_db8() {
    constexpr int p = 8;
    std::vector<double> py(p);
    double binom = 1.0; // C(p-1+k, k)
    for (int k = 0; k < p; ++k) {
        py[static_cast<std::size_t>(k)] = binom;
        binom = binom * static_cast<double>(p + k) / static_cast<double>(k + 1);
    }

    std::vector<cplx> poly{1.0};
    for (const cplx y : poly_roots(py)) {
        // sin^2(w/2) = (2 - z - 1/z)/4 = y  ->  z^2 - (2 - 4y) z + 1 = 0
        const cplx b = 2.0 - 4.0 * y;
        const cplx s = std::sqrt(b * b - 4.0);
        cplx z = 0.5 * (b + s);
        if (std::abs(z) > 1.0) z = 0.5 * (b - s);
        std::vector<cplx> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i] * (-z);
            next[i + 1] += poly[i];
        }
        poly = std::move(next);
    }
    for (int i = 0; i < p; ++i) { // (1+z)^p
        std::vector<cplx> next(poly.size() + 1, 0.0);
        for (std::size_t j = 0; j < poly.size(); ++j) {
            next[j] += poly[j];
            next[j + 1] += poly[j];
        }
        poly = std::move(next);
    }

    std::array<double, kFilterLen> h{};
    double total = 0.0;
    for (int j = 0; j < kFilterLen; ++j) {
        // canonical (extremal-phase) ordering puts the large taps first
        h[static_cast<std::size_t>(j)] = poly[static_cast<std::size_t>(kFilterLen - 1 - j)].real();
        total += h[static_cast<std::size_t>(j)];
    }
    const double scale = std::sqrt(2.0) / total;
    for (double& v : h) v *= scale;
    return h;
}

const std::array<double, kFilterLen> g_db8 = compute_db8();

} // namespace

const double* scaling_filter() { return g_db8.data(); }

} // namespace wavelet_detail

namespace {

using wavelet_detail::kFilterLen;

struct Qmf {
    double h[kFilterLen];
    double g[kFilterLen];
    Qmf() {
        const double* f = wavelet_detail::scaling_filter();
        for (int j = 0; j < kFilterLen; ++j) {
            h[j] = f[j];
            g[j] = (j % 2 == 0 ? 1.0 : -1.0) * f[kFilterLen - 1 - j];
        }
    }
};

const Qmf& qmf() {
    static const Qmf q;
    return q;
}

// x has even length n; lo/hi receive n/2 coefficients each.
void dwt1d(const double* x, int n, double* lo, double* hi) {
    const Qmf& q = qmf();
    const int half = n / 2;
    for (int k = 0; k < half; ++k) {
        double a = 0.0, d = 0.0;
        for (int j = 0; j < kFilterLen; ++j) {
            const double v = x[(2 * k + j) % n];
            a += q.h[j] * v;
            d += q.g[j] * v;
        }
        lo[k] = a;
        hi[k] = d;
    }
}

// Adjoint of dwt1d; exact inverse because the analysis matrix is orthogonal.
void idwt1d(const double* lo, const double* hi, int half, double* x) {
    const Qmf& q = qmf();
    const int n = 2 * half;
    std::memset(x, 0, sizeof(double) * static_cast<std::size_t>(n));
    for (int k = 0; k < half; ++k) {
        for (int j = 0; j < kFilterLen; ++j) {
            x[(2 * k + j) % n] += q.h[j] * lo[k] + q.g[j] * hi[k];
        }
    }
}

int padded_len(int n) { return n % 2 == 0 ? n : n + 1; }
int half_len(int n) { return padded_len(n) / 2; }

// Single-level split of x into ll plus the three detail bands.
void split_level(const Image& x, Image& ll, DetailBands& bands, bool par) {
    const int rows = x.rows(), cols = x.cols();
    const int c2 = half_len(cols), r2 = half_len(rows);

    Image lo_row(rows, c2), hi_row(rows, c2);
#pragma omp parallel for schedule(static) if (par)
    for (int r = 0; r < rows; ++r) {
        std::vector<double> buf(padded_len(cols));
        for (int c = 0; c < cols; ++c) buf[c] = x(r, c);
        if (cols % 2 != 0) buf[cols] = x(r, cols - 1);
        std::vector<double> lo(c2), hi(c2);
        dwt1d(buf.data(), padded_len(cols), lo.data(), hi.data());
        for (int c = 0; c < c2; ++c) {
            lo_row(r, c) = lo[c];
            hi_row(r, c) = hi[c];
        }
    }

    ll = Image(r2, c2);
    bands.lh = Image(r2, c2);
    bands.hl = Image(r2, c2);
    bands.hh = Image(r2, c2);
    bands.in_rows = rows;
    bands.in_cols = cols;
#pragma omp parallel for schedule(static) if (par)
    for (int c = 0; c < c2; ++c) {
        std::vector<double> buf(padded_len(rows)), lo(r2), hi(r2);
        for (int r = 0; r < rows; ++r) buf[r] = lo_row(r, c);
        if (rows % 2 != 0) buf[rows] = lo_row(rows - 1, c);
        dwt1d(buf.data(), padded_len(rows), lo.data(), hi.data());
        for (int r = 0; r < r2; ++r) {
            ll(r, c) = lo[r];
            bands.hl(r, c) = hi[r];
        }
        for (int r = 0; r < rows; ++r) buf[r] = hi_row(r, c);
        if (rows % 2 != 0) buf[rows] = hi_row(rows - 1, c);
        dwt1d(buf.data(), padded_len(rows), lo.data(), hi.data());
        for (int r = 0; r < r2; ++r) {
            bands.lh(r, c) = lo[r];
            bands.hh(r, c) = hi[r];
        }
    }
}

Image merge_level(const Image& ll, const DetailBands& bands, bool par) {
    const int rows = bands.in_rows, cols = bands.in_cols;
    const int r2 = ll.rows(), c2 = ll.cols();

    Image lo_row(rows, c2), hi_row(rows, c2);
#pragma omp parallel for schedule(static) if (par)
    for (int c = 0; c < c2; ++c) {
        std::vector<double> lo(r2), hi(r2), buf(2 * r2);
        for (int r = 0; r < r2; ++r) {
            lo[r] = ll(r, c);
            hi[r] = bands.hl(r, c);
        }
        idwt1d(lo.data(), hi.data(), r2, buf.data());
        for (int r = 0; r < rows; ++r) lo_row(r, c) = buf[r];
        for (int r = 0; r < r2; ++r) {
            lo[r] = bands.lh(r, c);
            hi[r] = bands.hh(r, c);
        }
        idwt1d(lo.data(), hi.data(), r2, buf.data());
        for (int r = 0; r < rows; ++r) hi_row(r, c) = buf[r];
    }

    Image out(rows, cols);
#pragma omp parallel for schedule(static) if (par)
    for (int r = 0; r < rows; ++r) {
        std::vector<double> lo(c2), hi(c2), buf(2 * c2);
        for (int c = 0; c < c2; ++c) {
            lo[c] = lo_row(r, c);
            hi[c] = hi_row(r, c);
        }
        idwt1d(lo.data(), hi.data(), c2, buf.data());
        for (int c = 0; c < cols; ++c) out(r, c) = buf[c];
    }
    return out;
}

WaveletPyramid dwt2_impl(const Image& x, int levels, bool par) {
    if (levels < 1) throw DataError("dwt2: levels must be >= 1");
    const int min_dim = x.rows() < x.cols() ? x.rows() : x.cols();
    if (min_dim < (1 << levels)) throw DataError("dwt2: dims too small for level count");
    WaveletPyramid pyr;
    Image cur = x;
    for (int l = 0; l < levels; ++l) {
        DetailBands bands;
        Image ll;
        split_level(cur, ll, bands, par);
        pyr.detail.push_back(std::move(bands));
        cur = std::move(ll);
    }
    pyr.approx = std::move(cur);
    return pyr;
}

Image idwt2_impl(const WaveletPyramid& pyr, bool par) {
    if (pyr.detail.empty()) throw DataError("idwt2: empty pyramid");
    Image cur = pyr.approx;
    for (int l = pyr.levels() - 1; l >= 0; --l) cur = merge_level(cur, pyr.detail[l], par);
    return cur;
}

} // namespace

WaveletPyramid dwt2(const Image& x, int levels) { return dwt2_impl(x, levels, true); }
Image idwt2(const WaveletPyramid& pyr) { return idwt2_impl(pyr, true); }

namespace serial {
WaveletPyramid dwt2(const Image& x, int levels) { return dwt2_impl(x, levels, false); }
Image idwt2(const WaveletPyramid& pyr) { return idwt2_impl(pyr, false); }
} // namespace serial

} // namespace prnu
