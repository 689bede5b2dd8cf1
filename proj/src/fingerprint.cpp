#include "prnu/fingerprint.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "prnu/kernels.hpp"
#include "prnu/parallel.hpp"

namespace prnu {

void EstimationAccumulator::add(const Image& w, const Image& xhat) {
    require_same_shape(w, numerator, "accumulate");
    require_same_shape(xhat, numerator, "accumulate");
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(numerator.size()); ++i) {
        numerator[i] += w[i] * xhat[i];
        r[i] += xhat[i] * xhat[i];
    }
    ++l;
}

FingerprintBundle finalize(const EstimationAccumulator& acc, double eps_r, FinalizeStats* stats) {
    if (acc.l < 1) throw DataError("finalize: no images accumulated");
    if (eps_r <= 0.0) throw DataError("finalize: eps_r must be positive");
    if (max_abs(acc.r) == 0.0) throw NumericalError("finalize: all-zero normalizer R");

    FingerprintBundle b;
    b.l = acc.l;
    b.k_hat = Image(acc.numerator.rows(), acc.numerator.cols());
    b.r = acc.r;
    long long low = 0;
#pragma omp parallel for schedule(static) reduction(+ : low)
    for (long long i = 0; i < static_cast<long long>(acc.numerator.size()); ++i) {
        const double r = acc.r[i];
        if (r < eps_r) ++low;
        b.k_hat[i] = acc.numerator[i] / (r > eps_r ? r : eps_r);
    }
    if (stats) stats->low_r_pixels = static_cast<std::size_t>(low);
    return b;
}

FingerprintBundle estimate_fingerprint(const ResidualSet& set,
                                       const std::vector<std::size_t>& indices, double eps_r,
                                       FinalizeStats* stats) {
    if (indices.empty()) throw DataError("estimate_fingerprint: empty index set");
    std::vector<std::size_t> order = indices;
    std::sort(order.begin(), order.end());
    EstimationAccumulator acc(set.rows(), set.cols());
    // Pixels are independent; per pixel the sum runs in ascending image order.
    const long long npix = static_cast<long long>(acc.numerator.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < npix; ++i) {
        double num = 0.0, den = 0.0;
        for (const std::size_t idx : order) {
            const double x = set.xhat[idx][static_cast<std::size_t>(i)];
            num += set.w[idx][static_cast<std::size_t>(i)] * x;
            den += x * x;
        }
        acc.numerator[static_cast<std::size_t>(i)] = num;
        acc.r[static_cast<std::size_t>(i)] = den;
    }
    acc.l = static_cast<std::uint32_t>(order.size());
    return finalize(acc, eps_r, stats);
}

Image zero_mean(const Image& k) {
    const int rows = k.rows(), cols = k.cols();
    Image out(rows, cols);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        double m = 0.0;
        for (int c = 0; c < cols; ++c) m += k(r, c);
        m /= cols;
        for (int c = 0; c < cols; ++c) out(r, c) = k(r, c) - m;
    }
#pragma omp parallel for schedule(static)
    for (int c = 0; c < cols; ++c) {
        double m = 0.0;
        for (int r = 0; r < rows; ++r) m += out(r, c);
        m /= rows;
        for (int r = 0; r < rows; ++r) out(r, c) -= m;
    }
    return out;
}

namespace {

// FFTW plan creation/destruction is not thread-safe.
std::mutex g_fftw_mutex;

struct FftBuffers {
    fftw_complex* in;
    fftw_complex* out;
    fftw_plan fwd;
    fftw_plan bwd;
    FftBuffers(int rows, int cols) {
        in = fftw_alloc_complex(static_cast<std::size_t>(rows) * cols);
        out = fftw_alloc_complex(static_cast<std::size_t>(rows) * cols);
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fwd = fftw_plan_dft_2d(rows, cols, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_2d(rows, cols, out, in, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftBuffers() {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(in);
        fftw_free(out);
    }
};

double median_of(std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (n % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid - 1),
                         v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

} // namespace

Image dft_wiener(const Image& k, int window) {
    if (window < 3 || window % 2 == 0) throw DataError("dft_wiener: window must be odd and >= 3");
    const int rows = k.rows(), cols = k.cols();
    const std::size_t n = k.size();
    if (n < 2) return k;
    FftBuffers fft(rows, cols);
    for (std::size_t i = 0; i < n; ++i) {
        fft.in[i][0] = k[i];
        fft.in[i][1] = 0.0;
    }
    fftw_execute(fft.fwd);

    Image power(rows, cols);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        power[i] = fft.out[i][0] * fft.out[i][0] + fft.out[i][1] * fft.out[i][1];

    std::vector<double> nondc(power.data() + 1, power.data() + n);
    const double noise_floor = median_of(nondc) / 0.693147180559945309417232121458; // ln 2
    if (noise_floor <= 0.0) return k; // flat spectrum (e.g. zero input): nothing to remove

    // Local average of |F|^2 with periodic wrap.
    const int h = window / 2;
    Image avg(rows, cols);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int dr = -h; dr <= h; ++dr)
                for (int dc = -h; dc <= h; ++dc)
                    s += power(((r + dr) % rows + rows) % rows, ((c + dc) % cols + cols) % cols);
            avg(r, c) = s / (static_cast<double>(window) * window);
        }

#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        if (i == 0) continue; // DC preserved
        const double s = avg[static_cast<std::size_t>(i)];
        const double gain = s > noise_floor ? noise_floor / s : 1.0;
        fft.out[i][0] *= gain;
        fft.out[i][1] *= gain;
    }
    fftw_execute(fft.bwd);

    Image out(rows, cols);
    const double inv = 1.0 / static_cast<double>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        out[i] = fft.in[i][0] * inv; // imaginary residue discarded
    return out;
}

Image whiten(const Image& k, int window) {
    if (window < 3 || window % 2 == 0) throw DataError("whiten: window must be odd and >= 3");
    const Image var = local_sample_variance(k, window);
    Image out(k.rows(), k.cols());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(k.size()); ++i) {
        const double sd = std::sqrt(var[static_cast<std::size_t>(i)]);
        // featureless neighborhoods carry nothing to whiten
        out[i] = sd > 1e-12 ? k[i] / sd : 0.0;
    }
    return out;
}

void postprocess(FingerprintBundle& b, const PostprocessOptions& opts) {
    if (opts.zero_mean) {
        b.k_hat = zero_mean(b.k_hat);
        b.zero_meaned = true;
    }
    if (opts.dft_wiener) {
        b.k_hat = dft_wiener(b.k_hat, opts.wiener_window);
        b.dft_wienered = true;
    }
    if (opts.whiten) {
        b.k_hat = whiten(b.k_hat, opts.whiten_window);
        b.whitened = true;
    }
}

} // namespace prnu
