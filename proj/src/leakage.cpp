#include "prnu/leakage.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "prnu/kernels.hpp"
#include "prnu/parallel.hpp"
#include "prnu/rng.hpp"

namespace prnu {

namespace {
constexpr double kLn2 = 0.693147180559945309417232121458;
}

GammaMap estimate_gamma(const Image& k_hat, int window) {
    if (window < 3 || window % 2 == 0)
        throw DataError("estimate_gamma: window must be odd and >= 3");
    return GammaMap{local_sample_variance(k_hat, window), window};
}

GammaMap estimate_gamma_contrib(const ResidualSet& set, const std::vector<std::size_t>& indices,
                                double eps_r) {
    if (indices.size() < 2) throw DataError("estimate_gamma_contrib: need at least 2 images");
    std::vector<std::size_t> order = indices;
    std::sort(order.begin(), order.end());
    const double l = static_cast<double>(order.size());
    const long long npix = static_cast<long long>(set.w.front().size());

    Image r(set.rows(), set.cols(), 0.0);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < npix; ++i) {
        double den = 0.0;
        for (const std::size_t idx : order) {
            const double x = set.xhat[idx][static_cast<std::size_t>(i)];
            den += x * x;
        }
        r[static_cast<std::size_t>(i)] = den > eps_r ? den : eps_r;
    }

    Image var(set.rows(), set.cols());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < npix; ++i) {
        const std::size_t p = static_cast<std::size_t>(i);
        double m = 0.0;
        for (const std::size_t idx : order) m += set.w[idx][p] * set.xhat[idx][p] * l / r[p];
        m /= l;
        double ss = 0.0;
        for (const std::size_t idx : order) {
            const double d = set.w[idx][p] * set.xhat[idx][p] * l / r[p] - m;
            ss += d * d;
        }
        // sample variance of the contributions, scaled to the variance of
        // their mean
        var[p] = ss / (l - 1.0) / l;
    }
    return GammaMap{std::move(var), 0};
}

PEstimate estimate_p(const ResidualSet& set, const std::vector<std::size_t>& indices, int splits,
                     std::uint64_t seed, double p_floor, double eps_r) {
    if (indices.size() < 2) throw DataError("estimate_p: need at least 2 images");
    if (splits < 1) throw DataError("estimate_p: need at least 1 split");

    PEstimate est;
    est.samples.resize(static_cast<std::size_t>(splits));
    for (int s = 0; s < splits; ++s) {
        SequentialRng rng(derive_seed(seed, static_cast<std::uint64_t>(s)), kStreamShuffle);
        std::vector<std::size_t> order = indices;
        shuffle(order, rng);
        const std::size_t half = order.size() / 2;
        const std::vector<std::size_t> first(order.begin(), order.begin() + half);
        const std::vector<std::size_t> second(order.begin() + half, order.end());
        const FingerprintBundle k1 = estimate_fingerprint(set, first, eps_r);
        const FingerprintBundle k2 = estimate_fingerprint(set, second, eps_r);
        est.samples[static_cast<std::size_t>(s)] = frobenius_dot(k1.k_hat, k2.k_hat);
    }
    double total = 0.0;
    for (const double v : est.samples) total += v;
    est.p_hat = total / splits;
    if (est.p_hat < p_floor) {
        est.p_hat = p_floor;
        est.clamped = true;
    }
    return est;
}

namespace {

// g(mu) = (1/2) sum gamma^2 (sqrt(1+4/(mu gamma^2)) - 1), written as
// (2/mu) sum 1/(1 + sqrt(1+4/(mu gamma^2))) to stay accurate for tiny gamma.
double waterfill_spend(const Image& gsq, double mu) {
    const double s = block_sum(gsq.size(), [&](std::size_t i) {
        const double g = gsq[i];
        if (g <= kGammaFloor) return 0.0;
        return 1.0 / (1.0 + std::sqrt(1.0 + 4.0 / (mu * g)));
    });
    return 2.0 * s / mu;
}

} // namespace

double solve_mu(const GammaMap& gamma, double p, double rel_tol) {
    if (p <= 0.0) throw NumericalError("solve_mu: P must be positive");
    if (rel_tol <= 0.0) throw DataError("solve_mu: rel_tol must be positive");
    const Image& gsq = gamma.var;
    bool any = false;
    for (std::size_t i = 0; i < gsq.size(); ++i)
        if (gsq[i] > kGammaFloor) { any = true; break; }
    if (!any) throw NumericalError("solve_mu: all pixels below the variance floor");

    double mu0 = static_cast<double>(gsq.size()) / p;
    double lo, hi; // g(lo) >= P >= g(hi)
    if (waterfill_spend(gsq, mu0) >= p) {
        lo = mu0;
        hi = mu0;
        for (int it = 0; it < 2100; ++it) {
            hi *= 2.0;
            if (waterfill_spend(gsq, hi) <= p) break;
            if (it == 2099) throw NumericalError("solve_mu: bracket exhaustion (upper)");
        }
    } else {
        hi = mu0;
        lo = mu0;
        for (int it = 0; it < 2100; ++it) {
            lo *= 0.5;
            if (waterfill_spend(gsq, lo) >= p) break;
            if (it == 2099) throw NumericalError("solve_mu: bracket exhaustion (lower)");
        }
    }
    double mu = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mu = 0.5 * (lo + hi);
        const double g = waterfill_spend(gsq, mu);
        if (std::fabs(g - p) / p <= rel_tol) return mu;
        if (g > p)
            lo = mu;
        else
            hi = mu;
    }
    const double g = waterfill_spend(gsq, mu);
    if (std::fabs(g - p) / p <= 1e3 * rel_tol) return mu;
    throw NumericalError("solve_mu: bisection failed to converge");
}

IlbValue ilb(const GammaMap& gamma, double mu) {
    if (mu <= 0.0) throw NumericalError("ilb: mu must be positive");
    const Image& gsq = gamma.var;
    const double bits = block_sum(gsq.size(), [&](std::size_t i) {
        const double g = gsq[i];
        if (g <= kGammaFloor) return 0.0;
        // 2/(sqrt(1+t)-1) = (sqrt(1+t)+1)/(t/2) with t = 4/(mu g)
        const double t = 4.0 / (mu * g);
        const double y = 0.5 * mu * g * (std::sqrt(1.0 + t) + 1.0);
        return 0.5 * std::log1p(y) / kLn2;
    });
    IlbValue v;
    v.bits = bits;
    v.bpp = bits / static_cast<double>(gsq.size());
    return v;
}

namespace {

double oracle_objective(const std::vector<double>& gsq, const std::vector<double>& p) {
    double f = 0.0;
    for (std::size_t i = 0; i < gsq.size(); ++i)
        f += 0.5 * std::log1p(gsq[i] / p[i]) / kLn2;
    return f;
}

// d/dx of (1/2)log2(1 + g/x): -g / (2 ln2 * x(x+g))
double channel_slope(double g, double x) { return -g / (2.0 * kLn2 * x * (x + g)); }

} // namespace

double ilb_oracle(const std::vector<double>& gamma_sq, double p) {
    const std::size_t n = gamma_sq.size();
    if (n == 0 || n > 16) throw DataError("ilb_oracle: supports 1..16 channels");
    if (p <= 0.0) throw NumericalError("ilb_oracle: P must be positive");
    for (const double g : gamma_sq)
        if (g < 0.0) throw DataError("ilb_oracle: negative variance");
    if (n == 1) return 0.5 * std::log1p(gamma_sq[0] / p) / kLn2;

    std::vector<double> alloc(n, p / static_cast<double>(n));
    // Pairwise exchange: move power between channels (i,j) to the point where
    // marginal slopes balance; the objective is convex and separable, so
    // sweeps converge to the global minimum.
    for (int sweep = 0; sweep < 400; ++sweep) {
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double c = alloc[i] + alloc[j];
                if (c <= 0.0) continue;
                // psi(x) = slope_i(x) - slope_j(c-x) is strictly increasing
                // with psi(0+) = -inf and psi(c-) = +inf.
                double lo = c * 1e-12, hi = c * (1.0 - 1e-12);
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double psi =
                        channel_slope(gamma_sq[i], mid) - channel_slope(gamma_sq[j], c - mid);
                    if (psi < 0.0)
                        lo = mid;
                    else
                        hi = mid;
                }
                const double x = 0.5 * (lo + hi);
                moved += std::fabs(x - alloc[i]);
                alloc[i] = x;
                alloc[j] = c - x;
            }
        if (moved <= 1e-15 * p) break;
    }
    return oracle_objective(gamma_sq, alloc);
}

LeakageReport leakage_report(const ResidualSet& pool, const LeakageConfig& cfg) {
    if (cfg.l < 2) throw DataError("leakage_report: L must be >= 2");
    if (pool.count() < static_cast<std::size_t>(cfg.l))
        throw DataError("leakage_report: pool smaller than L");

    SequentialRng rng(derive_seed(cfg.seed, 0x5eeded), kStreamShuffle);
    std::vector<std::size_t> indices =
        sample_indices(pool.count(), static_cast<std::size_t>(cfg.l), rng);

    FingerprintBundle bundle = estimate_fingerprint(pool, indices, cfg.eps_r);
    Image raw_k = bundle.k_hat;
    postprocess(bundle, cfg.post);

    GammaMap gamma = cfg.gamma_contrib
                         ? estimate_gamma_contrib(pool, indices, cfg.eps_r)
                         : estimate_gamma(cfg.gamma_from_raw ? raw_k : bundle.k_hat,
                                          cfg.gamma_window);

    const double gamma_total = sum(gamma.var);
    const double p_floor = 1e-12 * gamma_total;
    PEstimate pe = estimate_p(pool, indices, cfg.splits, cfg.seed, p_floor, cfg.eps_r);

    LeakageReport rep;
    rep.mu = solve_mu(gamma, pe.p_hat, cfg.mu_rel_tol);
    const IlbValue v = ilb(gamma, rep.mu);
    rep.ilb_bits = v.bits;
    rep.ilb_bpp = v.bpp;
    rep.p_hat = pe.p_hat;
    rep.p_samples = pe.samples;
    rep.p_clamped = pe.clamped;
    rep.splits = cfg.splits;
    rep.l = cfg.l;
    rep.rows = pool.rows();
    rep.cols = pool.cols();
    rep.seed = cfg.seed;
    rep.denoiser_id = cfg.denoiser.id();

    std::vector<double> g(gamma.var.data(), gamma.var.data() + gamma.var.size());
    std::sort(g.begin(), g.end());
    rep.gamma_min = g.front();
    rep.gamma_max = g.back();
    rep.gamma_median = g.size() % 2 == 1 ? g[g.size() / 2]
                                         : 0.5 * (g[g.size() / 2 - 1] + g[g.size() / 2]);
    rep.excluded_pixels = static_cast<std::size_t>(
        std::count_if(g.begin(), g.end(), [](double x) { return x <= kGammaFloor; }));
    return rep;
}

LeakageReport leakage_report(const DatasetManifest& manifest,
                             const std::filesystem::path& base_dir, const LeakageConfig& cfg) {
    const std::vector<std::size_t> est = manifest.entries_with_role(Role::Estimation);
    if (est.size() < static_cast<std::size_t>(cfg.l))
        throw DataError("leakage_report: manifest has fewer estimation images than L");

    ResidualSet pool;
    pool.w.resize(est.size());
    pool.xhat.resize(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) {
        const Image y = load_image(base_dir / manifest.entries[est[i]].path);
        if (i > 0) require_same_shape(y, pool.xhat[0], "leakage_report pool");
        pool.xhat[i] = denoise(y, cfg.denoiser);
        pool.w[i] = residual(y, pool.xhat[i]);
    }
    LeakageReport rep = leakage_report(pool, cfg);
    rep.source_note = manifest.source_note;
    return rep;
}

std::string leakage_report_json(const LeakageReport& rep) {
    nlohmann::json j;
    j["p_hat"] = rep.p_hat;
    j["p_samples"] = rep.p_samples;
    j["p_clamped"] = rep.p_clamped;
    j["splits"] = rep.splits;
    j["mu"] = rep.mu;
    j["ilb_bits"] = rep.ilb_bits;
    j["ilb_bpp"] = rep.ilb_bpp;
    j["gamma_stats"] = {{"min", rep.gamma_min}, {"median", rep.gamma_median}, {"max", rep.gamma_max}};
    j["excluded_pixels"] = rep.excluded_pixels;
    j["L"] = rep.l;
    j["rows"] = rep.rows;
    j["cols"] = rep.cols;
    j["seed"] = rep.seed;
    j["denoiser_id"] = rep.denoiser_id;
    if (!rep.source_note.empty()) j["source_note"] = rep.source_note;
    return j.dump(2);
}

} // namespace prnu
