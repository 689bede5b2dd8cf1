#include "prnu/kernels.hpp"

#include <cmath>

namespace prnu {

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    int j = i % period;
    if (j < 0) j += period;
    return j < n ? j : period - 1 - j;
}

namespace {

// Horizontal then vertical window sums; every output pixel is an independent
// fixed-order sum, so parallel and serial passes agree bitwise.
Image box_mean_impl(const Image& a, int window, bool par) {
    if (window < 1 || window % 2 == 0) throw DataError("box window must be odd and positive");
    const int rows = a.rows(), cols = a.cols(), h = window / 2;
    Image tmp(rows, cols), out(rows, cols);
#pragma omp parallel for schedule(static) if (par)
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int d = -h; d <= h; ++d) s += a(r, reflect_index(c + d, cols));
            tmp(r, c) = s;
        }
    const double inv = 1.0 / (static_cast<double>(window) * window);
#pragma omp parallel for schedule(static) if (par)
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int d = -h; d <= h; ++d) s += tmp(reflect_index(r + d, rows), c);
            out(r, c) = s * inv;
        }
    return out;
}

Image local_sample_variance_impl(const Image& a, int window, bool par) {
    const int n = window * window;
    if (n < 2) throw DataError("variance window must cover at least 2 samples");
    Image sq(a.rows(), a.cols());
#pragma omp parallel for schedule(static) if (par)
    for (long long i = 0; i < static_cast<long long>(a.size()); ++i) sq[i] = a[i] * a[i];
    const Image m = box_mean_impl(a, window, par);
    const Image msq = box_mean_impl(sq, window, par);
    Image out(a.rows(), a.cols());
    const double corr = static_cast<double>(n) / (n - 1);
#pragma omp parallel for schedule(static) if (par)
    for (long long i = 0; i < static_cast<long long>(a.size()); ++i) {
        const double v = (msq[i] - m[i] * m[i]) * corr;
        out[i] = v > 0.0 ? v : 0.0;
    }
    return out;
}

std::vector<double> gauss_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double s = 0.0;
    for (int d = -radius; d <= radius; ++d) {
        k[d + radius] = std::exp(-0.5 * d * d / (sigma * sigma));
        s += k[d + radius];
    }
    for (double& w : k) w /= s;
    return k;
}

Image gaussian_blur_impl(const Image& a, double sigma, bool par) {
    if (sigma <= 0.0) return a;
    const auto k = gauss_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    const int rows = a.rows(), cols = a.cols();
    Image tmp(rows, cols), out(rows, cols);
#pragma omp parallel for schedule(static) if (par)
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int d = -radius; d <= radius; ++d)
                s += k[d + radius] * a(r, reflect_index(c + d, cols));
            tmp(r, c) = s;
        }
#pragma omp parallel for schedule(static) if (par)
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int d = -radius; d <= radius; ++d)
                s += k[d + radius] * tmp(reflect_index(r + d, rows), c);
            out(r, c) = s;
        }
    return out;
}

} // namespace

Image box_mean(const Image& a, int window) { return box_mean_impl(a, window, true); }
Image local_sample_variance(const Image& a, int window) {
    return local_sample_variance_impl(a, window, true);
}
Image gaussian_blur(const Image& a, double sigma) { return gaussian_blur_impl(a, sigma, true); }

namespace serial {
Image box_mean(const Image& a, int window) { return box_mean_impl(a, window, false); }
Image local_sample_variance(const Image& a, int window) {
    return local_sample_variance_impl(a, window, false);
}
Image gaussian_blur(const Image& a, double sigma) { return gaussian_blur_impl(a, sigma, false); }
} // namespace serial

} // namespace prnu
