#pragma once

#include <cstdint>
#include <vector>

#include "prnu/denoise.hpp"
#include "prnu/fingerprint.hpp"
#include "prnu/image.hpp"
#include "prnu/io.hpp"

namespace prnu {

// Pixels whose variance falls at or below this floor are excluded from the
// water-filling sums; their analytic limit contribution is 0.
inline constexpr double kGammaFloor = 1e-30;

// Per-pixel variance map of the estimation noise N_k, the "desired" (leaking)
// signal of the bound.
struct GammaMap {
    Image var;
    int window = 5;
};

// Local sample variance of the (post-processed) fingerprint estimate; valid
// because the estimation noise dominates the attenuated PRNU for moderate L.
GammaMap estimate_gamma(const Image& k_hat, int window = 5);

// Alternative estimator for sensitivity analysis: per-pixel sample variance
// across the per-image contributions (W_i o Xhat_i) * L / R, divided by L.
GammaMap estimate_gamma_contrib(const ResidualSet& set,
                                const std::vector<std::size_t>& indices,
                                double eps_r = kDefaultEpsR);

struct PEstimate {
    double p_hat = 0.0;
    std::vector<double> samples;
    bool clamped = false; // p_hat fell below p_floor and was raised to it
};

// Splits the image set in half S times; each sample is the Frobenius
// cross-product of the two half-set estimates (raw MLE, no post-processing).
PEstimate estimate_p(const ResidualSet& set, const std::vector<std::size_t>& indices, int splits,
                     std::uint64_t seed, double p_floor, double eps_r = kDefaultEpsR);

// Solves (1/2) sum gamma^2 (sqrt(1 + 4/(mu gamma^2)) - 1) = P for the
// Lagrange multiplier mu. The left side is strictly decreasing in mu, so the
// root is unique; bracket by doubling/halving from mu0 = MN/P, then bisect.
double solve_mu(const GammaMap& gamma, double p, double rel_tol = 1e-10);

struct IlbValue {
    double bits = 0.0;
    double bpp = 0.0;
};

// (1/2) sum log2(1 + 2/(sqrt(1 + 4/(mu gamma^2)) - 1)) over included pixels.
IlbValue ilb(const GammaMap& gamma, double mu);

// Independent oracle for small instances: minimizes
//   f(p) = sum_i (1/2) log2(1 + gamma_i^2 / p_i)   s.t. p_i >= 0, sum p_i = P
// directly by pairwise power exchanges, never forming the mu equation.
double ilb_oracle(const std::vector<double>& gamma_sq, double p);

struct LeakageConfig {
    int l = 0;                 // images to draw from the estimation pool
    int splits = 10;
    std::uint64_t seed = 0;
    DenoiserSpec denoiser;
    PostprocessOptions post;   // applied to the K_hat used for gamma
    int gamma_window = 5;
    bool gamma_from_raw = false;   // bypass post-processing for gamma
    bool gamma_contrib = false;    // use the contribution-variance estimator
    double eps_r = kDefaultEpsR;
    double mu_rel_tol = 1e-10;
};

struct LeakageReport {
    double p_hat = 0.0;
    int splits = 0;
    std::vector<double> p_samples;
    double mu = 0.0;
    double ilb_bits = 0.0;
    double ilb_bpp = 0.0;
    double gamma_min = 0.0, gamma_median = 0.0, gamma_max = 0.0;
    std::size_t excluded_pixels = 0;
    bool p_clamped = false;
    // provenance
    int l = 0, rows = 0, cols = 0;
    std::uint64_t seed = 0;
    std::string denoiser_id;
    std::string source_note;
};

// Full pipeline on an already-denoised pool; indices are sampled from the
// pool by the config seed when pool.count() > l.
LeakageReport leakage_report(const ResidualSet& pool, const LeakageConfig& cfg);

// Convenience wrapper: loads and denoises the manifest's estimation images.
LeakageReport leakage_report(const DatasetManifest& manifest,
                             const std::filesystem::path& base_dir, const LeakageConfig& cfg);

std::string leakage_report_json(const LeakageReport& rep);

} // namespace prnu
