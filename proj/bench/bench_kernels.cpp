// Compares the OpenMP kernels against their serial references: wall time,
// speedup, and the max abs difference (must be 0 — same bits).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "prnu/denoise.hpp"
#include "prnu/kernels.hpp"
#include "prnu/parallel.hpp"
#include "prnu/rng.hpp"
#include "prnu/sensor.hpp"
#include "prnu/wavelet.hpp"

using namespace prnu;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

struct Case {
    const char* name;
    std::function<Image()> omp_fn;
    std::function<Image()> serial_fn;
};

} // namespace

int main(int argc, char** argv) {
    const int size = argc > 1 ? std::atoi(argv[1]) : 1024;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 3;

    Image noise(size, size);
    const RandomStream rng(7, kStreamTexture);
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = rng.gaussian(i);
    const Image scene = textured_field(size, size, 7, 2.0);
    const SensorGroundTruth sensor = gen_prnu(size, size, 0.02, 7);
    CaptureConfig cc;
    cc.seed = 9;
    const Image shot = capture(scene, sensor, cc);
    DenoiserSpec dspec;

    const Case cases[] = {
        {"box_mean w=5", [&] { return box_mean(noise, 5); },
         [&] { return serial::box_mean(noise, 5); }},
        {"local_variance w=5", [&] { return local_sample_variance(noise, 5); },
         [&] { return serial::local_sample_variance(noise, 5); }},
        {"gaussian_blur s=2", [&] { return gaussian_blur(noise, 2.0); },
         [&] { return serial::gaussian_blur(noise, 2.0); }},
        {"dwt2+idwt2 l=4", [&] { return idwt2(dwt2(noise, 4)); },
         [&] { return serial::idwt2(serial::dwt2(noise, 4)); }},
        {"denoise mihcak", [&] { return denoise(shot, dspec); },
         [&] { return serial::denoise(shot, dspec); }},
        {"capture", [&] { return capture(scene, sensor, cc); },
         [&] { return serial::capture(scene, sensor, cc); }},
    };

    std::printf("%-20s %10s %10s %8s %10s\n", "kernel", "serial ms", "omp ms", "speedup",
                "max|diff|");
    for (const Case& c : cases) {
        double t_serial = 1e300, t_omp = 1e300;
        Image a, b;
        for (int r = 0; r < reps; ++r) {
            auto t0 = std::chrono::steady_clock::now();
            b = c.serial_fn();
            t_serial = std::min(t_serial, ms_since(t0));
            t0 = std::chrono::steady_clock::now();
            a = c.omp_fn();
            t_omp = std::min(t_omp, ms_since(t0));
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            diff = std::max(diff, std::fabs(a[i] - b[i]));
        std::printf("%-20s %10.2f %10.2f %7.2fx %10.3g\n", c.name, t_serial, t_omp,
                    t_serial / t_omp, diff);
    }

    // Fixed-tree reduction at scale.
    {
        const std::size_t n = static_cast<std::size_t>(size) * size * 16;
        auto term = [](std::size_t i) { return std::sin(static_cast<double>(i) * 1e-6); };
        double t_serial = 1e300, t_omp = 1e300, a = 0, b = 0;
        for (int r = 0; r < reps; ++r) {
            auto t0 = std::chrono::steady_clock::now();
            b = serial::block_sum(n, term);
            t_serial = std::min(t_serial, ms_since(t0));
            t0 = std::chrono::steady_clock::now();
            a = block_sum(n, term);
            t_omp = std::min(t_omp, ms_since(t0));
        }
        std::printf("%-20s %10.2f %10.2f %7.2fx %10.3g\n", "block_sum", t_serial, t_omp,
                    t_serial / t_omp, std::fabs(a - b));
    }
    return 0;
}
