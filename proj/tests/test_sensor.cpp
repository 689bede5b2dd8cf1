#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "prnu/rng.hpp"
#include "prnu/sensor.hpp"

using namespace prnu;

TEST_CASE("gen_prnu: degenerate, deterministic, right moments") {
    const SensorGroundTruth zero = gen_prnu(8, 8, 0.0, 1);
    for (std::size_t i = 0; i < zero.k.size(); ++i) CHECK(zero.k[i] == 0.0);

    const SensorGroundTruth a = gen_prnu(32, 32, 0.02, 99);
    const SensorGroundTruth b = gen_prnu(32, 32, 0.02, 99);
    CHECK(a.k == b.k);

    const SensorGroundTruth big = gen_prnu(256, 256, 0.02, 7);
    CHECK(sample_std(big.k) > 0.018);
    CHECK(sample_std(big.k) < 0.022);
    CHECK(std::fabs(mean(big.k)) < 5.0 * 0.02 / 256.0);
}

TEST_CASE("capture: identity when noiseless and fingerprint-free") {
    const SensorGroundTruth s = gen_prnu(6, 6, 0.0, 1);
    const Image x = flat_field(6, 6, 100.0);
    CaptureConfig cfg;
    cfg.sigma_n = 0.0;
    CHECK(capture(x, s, cfg) == x);
}

TEST_CASE("capture applies the multiplicative gain exactly") {
    SensorGroundTruth s = gen_prnu(2, 2, 0.0, 1);
    s.k(0, 0) = 0.02;
    const Image x = flat_field(2, 2, 100.0);
    CaptureConfig cfg;
    cfg.sigma_n = 0.0;
    const Image y = capture(x, s, cfg);
    CHECK(y(0, 0) == doctest::Approx(102.0).epsilon(1e-15));
    CHECK(y(0, 1) == 100.0);
}

TEST_CASE("capture noise has the configured moments") {
    const int n = 256;
    const SensorGroundTruth s = gen_prnu(n, n, 0.02, 5);
    const Image x = flat_field(n, n, 128.0);
    CaptureConfig cfg;
    cfg.sigma_n = 2.0;
    cfg.seed = 11;
    const Image y = capture(x, s, cfg);
    // residual against the exact signal part
    Image resid(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) resid(r, c) = y(r, c) - (1.0 + s.k(r, c)) * x(r, c);
    CHECK(std::fabs(mean(resid)) < 5.0 * 2.0 / n);
    CHECK(sample_std(resid) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("capture is deterministic and clip clamps") {
    const SensorGroundTruth s = gen_prnu(16, 16, 0.05, 3);
    const Image x = flat_field(16, 16, 250.0);
    CaptureConfig cfg;
    cfg.sigma_n = 20.0;
    cfg.seed = 17;
    CHECK(capture(x, s, cfg) == capture(x, s, cfg));
    cfg.clip_to_8bit = true;
    const Image y = capture(x, s, cfg);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] >= 0.0);
        CHECK(y[i] <= 255.0);
        CHECK(y[i] == std::round(y[i]));
    }
}

TEST_CASE("capture dimension mismatch") {
    const SensorGroundTruth s = gen_prnu(4, 4, 0.02, 1);
    CHECK_THROWS_AS(capture(flat_field(4, 5, 10.0), s, CaptureConfig{}), DataError);
}

TEST_CASE("flat_field examples") {
    const Image a = flat_field(2, 2, 128.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] == 128.0);
    const Image b = flat_field(1, 1, 0.0);
    CHECK(b(0, 0) == 0.0);
    const Image bright = flat_field(4, 4, 240.0), dark = flat_field(4, 4, 16.0);
    CHECK(mean(bright) == 240.0);
    CHECK(mean(dark) == 16.0);
    CHECK_THROWS_AS(flat_field(2, 2, 300.0), DataError);
}

TEST_CASE("textured_field: deterministic, bounded, uniform when unsmoothed") {
    const Image a = textured_field(64, 64, 9, 0.0);
    CHECK(a == textured_field(64, 64, 9, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] >= 0.0);
        CHECK(a[i] <= 255.0);
    }
    CHECK(mean(a) == doctest::Approx(127.5).epsilon(0.03));
    CHECK(sample_std(a) == doctest::Approx(255.0 / std::sqrt(12.0)).epsilon(0.05));
}

TEST_CASE("textured_field: smoothness drives lag-1 autocorrelation above 0.9") {
    const Image t = textured_field(256, 256, 4, 8.0);
    const double m = mean(t);
    double num = 0.0, den = 0.0;
    for (int r = 0; r < t.rows(); ++r)
        for (int c = 0; c + 1 < t.cols(); ++c) {
            num += (t(r, c) - m) * (t(r, c + 1) - m);
            den += (t(r, c) - m) * (t(r, c) - m);
        }
    CHECK(num / den > 0.9);
}

TEST_CASE("oracle-denoiser identity: noiseless residual is K o X to machine precision") {
    const SensorGroundTruth s = gen_prnu(32, 32, 0.02, 21);
    const Image x = flat_field(32, 32, 128.0);
    CaptureConfig cfg;
    cfg.sigma_n = 0.0;
    const Image y = capture(x, s, cfg);
    const Image w = subtract(y, x);
    const Image kx = hadamard(s.k, x);
    // only the rounding of 1+K separates the two routes
    CHECK(max_abs(subtract(w, kx)) < 2e-14);
}

TEST_CASE("serial capture path agrees bitwise") {
    const SensorGroundTruth s = gen_prnu(32, 24, 0.02, 2);
    const SensorGroundTruth s2 = serial::gen_prnu(32, 24, 0.02, 2);
    CHECK(s.k == s2.k);
    const Image x = textured_field(32, 24, 5, 2.0);
    CaptureConfig cfg;
    cfg.sigma_n = 2.0;
    cfg.seed = 31;
    CHECK(capture(x, s, cfg) == serial::capture(x, s2, cfg));
}
