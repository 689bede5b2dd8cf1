#include "prnu/sensor.hpp"

#include <cmath>

#include "prnu/kernels.hpp"
#include "prnu/rng.hpp"

namespace prnu {

namespace {

SensorGroundTruth gen_prnu_impl(int rows, int cols, double sigma_k, std::uint64_t seed, bool par) {
    if (rows < 1 || cols < 1) throw DataError("gen_prnu: dimensions must be positive");
    if (sigma_k < 0.0) throw DataError("gen_prnu: sigma_k must be nonnegative");
    SensorGroundTruth s;
    s.sigma_k = sigma_k;
    s.seed = seed;
    s.k = Image(rows, cols);
    const RandomStream rng(seed, kStreamPrnu);
#pragma omp parallel for schedule(static) if (par)
    for (long long i = 0; i < static_cast<long long>(s.k.size()); ++i)
        s.k[i] = sigma_k == 0.0 ? 0.0 : sigma_k * rng.gaussian(static_cast<std::uint64_t>(i));
    return s;
}

Image capture_impl(const Image& x, const SensorGroundTruth& sensor, const CaptureConfig& cfg,
                   bool par) {
    require_same_shape(x, sensor.k, "capture");
    if (cfg.sigma_n < 0.0) throw DataError("capture: sigma_n must be nonnegative");
    Image y(x.rows(), x.cols());
    const RandomStream rng(cfg.seed, kStreamCapture);
#pragma omp parallel for schedule(static) if (par)
    for (long long i = 0; i < static_cast<long long>(x.size()); ++i) {
        const double noise =
            cfg.sigma_n == 0.0 ? 0.0 : cfg.sigma_n * rng.gaussian(static_cast<std::uint64_t>(i));
        double v = (1.0 + sensor.k[i]) * x[i] + noise;
        if (cfg.clip_to_8bit) {
            v = std::round(v);
            if (v < 0.0) v = 0.0;
            if (v > 255.0) v = 255.0;
        }
        y[i] = v;
    }
    return y;
}

} // namespace

SensorGroundTruth gen_prnu(int rows, int cols, double sigma_k, std::uint64_t seed) {
    return gen_prnu_impl(rows, cols, sigma_k, seed, true);
}

Image capture(const Image& x, const SensorGroundTruth& sensor, const CaptureConfig& cfg) {
    return capture_impl(x, sensor, cfg, true);
}

Image flat_field(int rows, int cols, double level) {
    if (level < 0.0 || level > 255.0) throw DataError("flat_field: level must be in [0,255]");
    return Image(rows, cols, level);
}

Image textured_field(int rows, int cols, std::uint64_t seed, double smoothness) {
    if (smoothness < 0.0) throw DataError("textured_field: smoothness must be nonnegative");
    Image noise(rows, cols);
    const RandomStream rng(seed, kStreamTexture);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(noise.size()); ++i)
        noise[i] = 255.0 * rng.uniform(static_cast<std::uint64_t>(i));
    if (smoothness == 0.0) return noise;
    // Normalized kernel keeps every output a convex combination of [0,255].
    return gaussian_blur(noise, smoothness);
}

namespace serial {
SensorGroundTruth gen_prnu(int rows, int cols, double sigma_k, std::uint64_t seed) {
    return gen_prnu_impl(rows, cols, sigma_k, seed, false);
}
Image capture(const Image& x, const SensorGroundTruth& sensor, const CaptureConfig& cfg) {
    return capture_impl(x, sensor, cfg, false);
}
} // namespace serial

} // namespace prnu
