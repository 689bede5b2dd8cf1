#include "prnu/image.hpp"

#include <cmath>

#include "prnu/parallel.hpp"

namespace prnu {

Image::Image(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw DataError("image dimensions must be positive");
    v_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill);
}

Image Image::from_data(int rows, int cols, std::vector<double> data) {
    if (rows < 1 || cols < 1) throw DataError("image dimensions must be positive");
    if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
        throw DataError("data length does not match rows*cols");
    Image img;
    img.rows_ = rows;
    img.cols_ = cols;
    img.v_ = std::move(data);
    return img;
}

void require_same_shape(const Image& a, const Image& b, const std::string& what) {
    if (!a.same_shape(b))
        throw DataError(what + ": dimension mismatch (" + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()) + ")");
}

namespace {

template <class F>
Image elementwise2(const Image& a, const Image& b, const char* what, F f) {
    require_same_shape(a, b, what);
    Image out(a.rows(), a.cols());
    const long long n = static_cast<long long>(a.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
    return out;
}

} // namespace

Image hadamard(const Image& a, const Image& b) {
    return elementwise2(a, b, "hadamard", [](double x, double y) { return x * y; });
}

Image add(const Image& a, const Image& b) {
    return elementwise2(a, b, "add", [](double x, double y) { return x + y; });
}

Image subtract(const Image& a, const Image& b) {
    return elementwise2(a, b, "subtract", [](double x, double y) { return x - y; });
}

Image scale(const Image& a, double s) {
    Image out(a.rows(), a.cols());
    const long long n = static_cast<long long>(a.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) out[i] = a[i] * s;
    return out;
}

double sum(const Image& a) {
    return block_sum(a.size(), [&](std::size_t i) { return a[i]; });
}

double mean(const Image& a) { return sum(a) / static_cast<double>(a.size()); }

double sample_std(const Image& a) {
    if (a.size() < 2) return 0.0;
    const double m = mean(a);
    const double ss = block_sum(a.size(), [&](std::size_t i) {
        const double d = a[i] - m;
        return d * d;
    });
    return std::sqrt(ss / static_cast<double>(a.size() - 1));
}

double frobenius_dot(const Image& a, const Image& b) {
    require_same_shape(a, b, "frobenius_dot");
    return block_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double max_abs(const Image& a) {
    double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
    for (long long i = 0; i < static_cast<long long>(a.size()); ++i) {
        const double v = std::fabs(a[i]);
        if (v > m) m = v;
    }
    return m;
}

bool all_finite(const Image& a) {
    long long bad = 0;
#pragma omp parallel for schedule(static) reduction(+ : bad)
    for (long long i = 0; i < static_cast<long long>(a.size()); ++i)
        if (!std::isfinite(a[i])) ++bad;
    return bad == 0;
}

double pearson(const Image& a, const Image& b) {
    require_same_shape(a, b, "pearson");
    const double ma = mean(a), mb = mean(b);
    const double saa = block_sum(a.size(), [&](std::size_t i) {
        const double d = a[i] - ma;
        return d * d;
    });
    const double sbb = block_sum(b.size(), [&](std::size_t i) {
        const double d = b[i] - mb;
        return d * d;
    });
    const double sab = block_sum(a.size(), [&](std::size_t i) { return (a[i] - ma) * (b[i] - mb); });
    const double denom = std::sqrt(saa) * std::sqrt(sbb);
    if (denom == 0.0) throw NumericalError("pearson: zero-variance input");
    return sab / denom;
}

double rmse(const Image& a, const Image& b) {
    require_same_shape(a, b, "rmse");
    const double ss = block_sum(a.size(), [&](std::size_t i) {
        const double d = a[i] - b[i];
        return d * d;
    });
    return std::sqrt(ss / static_cast<double>(a.size()));
}

} // namespace prnu
