#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "prnu/leakage.hpp"
#include "prnu/rng.hpp"
#include "prnu/sensor.hpp"

using namespace prnu;

namespace {

constexpr double kLn2 = 0.693147180559945309417232121458;

Image gaussian_image(int rows, int cols, std::uint64_t seed, double sd = 1.0) {
    Image img(rows, cols);
    const RandomStream s(seed, kStreamTexture);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = sd * s.gaussian(i);
    return img;
}

GammaMap gamma_of(std::vector<double> vals) {
    const int n = static_cast<int>(vals.size());
    return GammaMap{Image::from_data(1, n, std::move(vals)), 0};
}

// direct evaluation of the mu equation's left side
double spend(const std::vector<double>& gsq, double mu) {
    double s = 0.0;
    for (const double g : gsq)
        if (g > kGammaFloor) s += 0.5 * g * (std::sqrt(1.0 + 4.0 / (mu * g)) - 1.0);
    return s;
}

// fine grid search over the 2-channel simplex (independent of everything)
double grid_oracle2(double g0, double g1, double p, int steps = 400000) {
    double best = 1e300;
    for (int i = 1; i < steps; ++i) {
        const double p0 = p * i / steps;
        const double f =
            0.5 * std::log2(1.0 + g0 / p0) + 0.5 * std::log2(1.0 + g1 / (p - p0));
        best = std::min(best, f);
    }
    return best;
}

} // namespace

TEST_CASE("estimate_gamma: constant map is zero; iid matches the variance") {
    const GammaMap zero = estimate_gamma(Image(32, 32, 0.123));
    CHECK(max_abs(zero.var) < 1e-15);

    const double v = 0.04;
    const GammaMap g = estimate_gamma(gaussian_image(256, 256, 3, std::sqrt(v)), 5);
    std::vector<double> vals(g.var.data(), g.var.data() + g.var.size());
    std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2),
                     vals.end());
    const double med = vals[vals.size() / 2];
    CHECK(med > 0.7 * v);
    CHECK(med < 1.3 * v);
}

TEST_CASE("estimate_P: equal halves give the squared norm") {
    // two images, Xhat = 1, W = C: both half-estimates equal C
    ResidualSet set;
    const Image c = gaussian_image(8, 8, 5);
    set.w = {c, c};
    set.xhat = {Image(8, 8, 1.0), Image(8, 8, 1.0)};
    const PEstimate pe = estimate_p(set, {0, 1}, 4, 1, 0.0);
    const double expected = frobenius_dot(c, c);
    for (const double s : pe.samples) CHECK(s == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pe.p_hat == doctest::Approx(expected).epsilon(1e-12));
    CHECK(!pe.clamped);
}

TEST_CASE("estimate_P: orthogonal halves clamp to the floor with a warning") {
    ResidualSet set;
    Image a(2, 2, 0.0), b(2, 2, 0.0);
    a(0, 0) = 1.0; // <a, b>_F = 0
    b(1, 1) = 1.0;
    set.w = {a, b};
    set.xhat = {Image(2, 2, 1.0), Image(2, 2, 1.0)};
    const PEstimate pe = estimate_p(set, {0, 1}, 3, 9, 1e-9);
    CHECK(pe.p_hat == 1e-9);
    CHECK(pe.clamped);
}

TEST_CASE("estimate_P on a synthetic sensor lands near sigma_k^2 MN") {
    const int n = 128;
    const SensorGroundTruth s = gen_prnu(n, n, 0.02, 77);
    const Image x = flat_field(n, n, 128.0);
    ResidualSet set;
    std::vector<std::size_t> idx;
    for (int i = 0; i < 64; ++i) {
        CaptureConfig cfg;
        cfg.sigma_n = 2.0;
        cfg.seed = derive_seed(3, static_cast<std::uint64_t>(i));
        set.xhat.push_back(x);
        set.w.push_back(subtract(capture(x, s, cfg), x));
        idx.push_back(static_cast<std::size_t>(i));
    }
    const PEstimate pe = estimate_p(set, idx, 10, 4, 0.0);
    const double truth = 0.02 * 0.02 * n * n;
    CHECK(pe.p_hat / truth > 0.5);
    CHECK(pe.p_hat / truth < 1.5);
}

TEST_CASE("solve_mu satisfies the budget equation to tolerance") {
    SequentialRng rng(13, kStreamTrial);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(12));
        std::vector<double> gsq(static_cast<std::size_t>(n));
        for (double& g : gsq) g = 1e-4 * std::pow(10.0, 5.0 * rng.uniform());
        const double p = 1e-3 * std::pow(10.0, 4.0 * rng.uniform());
        const GammaMap gm = gamma_of(gsq);
        const double mu = solve_mu(gm, p, 1e-10);
        CHECK(mu > 0.0);
        CHECK(std::fabs(spend(gsq, mu) - p) / p < 1e-9);
    }
}

TEST_CASE("solve_mu: n equal channels behave like one with budget P/n") {
    const double g = 0.7, p = 0.35;
    const double mu_n = solve_mu(gamma_of({g, g, g, g}), p, 1e-12);
    const double mu_1 = solve_mu(gamma_of({g}), p / 4.0, 1e-12);
    CHECK(mu_n == doctest::Approx(mu_1).epsilon(1e-9));
}

TEST_CASE("solve_mu: doubling the budget strictly lowers mu") {
    const GammaMap gm = gamma_of({0.1, 0.5, 2.0, 3.0});
    CHECK(solve_mu(gm, 2.0, 1e-10) < solve_mu(gm, 1.0, 1e-10));
}

TEST_CASE("solve_mu errors") {
    CHECK_THROWS_AS(solve_mu(gamma_of({1.0}), 0.0, 1e-10), NumericalError);
    CHECK_THROWS_AS(solve_mu(gamma_of({0.0, 1e-31}), 1.0, 1e-10), NumericalError);
}

TEST_CASE("ilb: single channel closed form and degenerate cases") {
    // gamma^2 = 3, P = 1: eliminating mu gives (1/2)log2(1 + 3) = 1 bit
    const GammaMap gm = gamma_of({3.0});
    const double mu = solve_mu(gm, 1.0, 1e-12);
    const IlbValue v = ilb(gm, mu);
    CHECK(v.bits == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(v.bpp == doctest::Approx(1.0).epsilon(1e-9));

    // all gamma below the floor: zero leakage at any mu
    const IlbValue zero = ilb(gamma_of({0.0, 0.0, 1e-31}), 5.0);
    CHECK(zero.bits == 0.0);

    CHECK_THROWS_AS(ilb(gm, 0.0), NumericalError);
}

TEST_CASE("ilb: n equal channels equal n single-channel bounds at budget P/n") {
    const double g = 1.3, p = 0.9;
    const int n = 6;
    const GammaMap multi = gamma_of(std::vector<double>(n, g));
    const double mu = solve_mu(multi, p, 1e-12);
    const double total = ilb(multi, mu).bits;
    const GammaMap single = gamma_of({g});
    const double one = ilb(single, solve_mu(single, p / n, 1e-12)).bits;
    CHECK(total == doctest::Approx(n * one).epsilon(1e-9));
}

TEST_CASE("ilb monotonicity: more disturbance masks, more signal leaks") {
    const GammaMap gm = gamma_of({0.2, 1.0, 4.0});
    auto bound = [&](const GammaMap& g, double p) { return ilb(g, solve_mu(g, p, 1e-12)).bits; };
    CHECK(bound(gm, 2.0) < bound(gm, 1.0));
    CHECK(bound(gm, 1.0) < bound(gm, 0.5));
    const GammaMap gm_up = gamma_of({0.3, 1.1, 4.5});
    CHECK(bound(gm_up, 1.0) > bound(gm, 1.0));
}

TEST_CASE("ilb_oracle: closed form, symmetry, grid cross-check") {
    CHECK(ilb_oracle({3.0}, 1.0) == doctest::Approx(1.0).epsilon(1e-9));

    // minimizer beats any suboptimal equal split
    const std::vector<double> gsq{1.0, 2.0, 4.0, 8.0};
    const double p = 2.0;
    double equal_split = 0.0;
    for (const double g : gsq) equal_split += 0.5 * std::log1p(g / (p / 4.0)) / kLn2;
    CHECK(ilb_oracle(gsq, p) <= equal_split + 1e-12);

    CHECK(ilb_oracle({0.8, 2.5}, 1.7) ==
          doctest::Approx(grid_oracle2(0.8, 2.5, 1.7)).epsilon(1e-6));
}

TEST_CASE("water-filling optimality: solver matches the independent oracle") {
    SequentialRng rng(21, kStreamTrial);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(8));
        std::vector<double> gsq(static_cast<std::size_t>(n));
        for (double& g : gsq) g = 1e-4 * std::pow(10.0, 5.0 * rng.uniform());
        const double p = 1e-3 * std::pow(10.0, 4.0 * rng.uniform());
        const GammaMap gm = gamma_of(gsq);
        const double via_mu = ilb(gm, solve_mu(gm, p, 1e-12)).bits;
        const double via_oracle = ilb_oracle(gsq, p);
        CHECK(std::fabs(via_mu - via_oracle) / via_oracle < 1e-6);
    }
}

TEST_CASE("zero-limit consistency at the variance floor") {
    const GammaMap with_tiny = gamma_of({1.0, 2.0, 1e-30});
    const GammaMap without = gamma_of({1.0, 2.0});
    const double mu_a = solve_mu(with_tiny, 0.5, 1e-12);
    const double mu_b = solve_mu(without, 0.5, 1e-12);
    CHECK(mu_a == doctest::Approx(mu_b).epsilon(1e-10));
    CHECK(ilb(with_tiny, mu_a).bits == doctest::Approx(ilb(without, mu_b).bits).epsilon(1e-10));
}

TEST_CASE("checkerboard gamma matches its brute-force local variance") {
    const double a = 0.03;
    Image cb(32, 32);
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) cb(r, c) = ((r + c) % 2 == 0 ? a : -a);
    const GammaMap g = estimate_gamma(cb, 3);
    // interior: 9 samples split 5/4, sample variance = a^2 * 10/9
    CHECK(g.var(16, 16) == doctest::Approx(a * a * 10.0 / 9.0).epsilon(1e-12));
}

namespace {

ResidualSet textured_pool(int n, int count, double sigma_k, double sigma_n, std::uint64_t seed,
                          const DenoiserSpec& dn) {
    const SensorGroundTruth s = gen_prnu(n, n, sigma_k, seed);
    ResidualSet set;
    for (int i = 0; i < count; ++i) {
        const Image x =
            textured_field(n, n, derive_seed(seed, 2 * static_cast<std::uint64_t>(i)), 2.0);
        CaptureConfig cfg;
        cfg.sigma_n = sigma_n;
        cfg.seed = derive_seed(seed, 2 * static_cast<std::uint64_t>(i) + 1);
        const Image y = capture(x, s, cfg);
        set.xhat.push_back(denoise(y, dn));
        set.w.push_back(residual(y, set.xhat.back()));
    }
    return set;
}

} // namespace

TEST_CASE("leakage_report: deterministic, and ILB falls as L grows") {
    const ResidualSet pool = textured_pool(64, 56, 0.02, 2.0, 31, DenoiserSpec{});
    LeakageConfig cfg;
    cfg.l = 26;
    cfg.seed = 5;
    const LeakageReport a = leakage_report(pool, cfg);
    const LeakageReport b = leakage_report(pool, cfg);
    CHECK(a.ilb_bpp == b.ilb_bpp);
    CHECK(a.p_hat == b.p_hat);
    CHECK(a.mu == b.mu);
    CHECK(a.ilb_bpp == doctest::Approx(a.ilb_bits / (64.0 * 64.0)));
    CHECK(a.mu > 0.0);
    CHECK(a.ilb_bits >= 0.0);

    cfg.l = 50;
    const LeakageReport c = leakage_report(pool, cfg);
    CHECK(a.ilb_bpp > c.ilb_bpp);

    const std::string json = leakage_report_json(a);
    CHECK(json.find("\"ilb_bpp\"") != std::string::npos);
    CHECK(json.find("\"p_samples\"") != std::string::npos);
}

TEST_CASE("dark flat fields leak more than bright ones") {
    const int n = 64, count = 50;
    int dark_wins = 0;
    for (std::uint64_t rep = 0; rep < 3; ++rep) {
        const SensorGroundTruth s = gen_prnu(n, n, 0.02, 100 + rep);
        auto flat_pool = [&](double level) {
            ResidualSet set;
            const Image x = flat_field(n, n, level);
            for (int i = 0; i < count; ++i) {
                CaptureConfig cfg;
                cfg.sigma_n = 2.0;
                cfg.seed = derive_seed(rep * 977 + 7, static_cast<std::uint64_t>(i));
                const Image y = capture(x, s, cfg);
                set.xhat.push_back(denoise(y, DenoiserSpec{}));
                set.w.push_back(residual(y, set.xhat.back()));
            }
            return set;
        };
        LeakageConfig cfg;
        cfg.l = count;
        cfg.seed = rep;
        const double dark = leakage_report(flat_pool(16.0), cfg).ilb_bpp;
        const double bright = leakage_report(flat_pool(240.0), cfg).ilb_bpp;
        if (dark > bright) ++dark_wins;
    }
    CHECK(dark_wins == 3);
}

TEST_CASE("contribution-variance gamma estimator is available and sane") {
    const ResidualSet pool = textured_pool(64, 20, 0.02, 2.0, 41, DenoiserSpec{});
    std::vector<std::size_t> idx(20);
    for (std::size_t i = 0; i < 20; ++i) idx[i] = i;
    const GammaMap g = estimate_gamma_contrib(pool, idx);
    CHECK(g.var.rows() == 64);
    double mn = 1e300;
    for (std::size_t i = 0; i < g.var.size(); ++i) mn = std::min(mn, g.var[i]);
    CHECK(mn >= 0.0);

    LeakageConfig cfg;
    cfg.l = 20;
    cfg.gamma_contrib = true;
    cfg.seed = 3;
    const LeakageReport rep = leakage_report(pool, cfg);
    CHECK(rep.ilb_bpp > 0.0);
}
