#include "prnu/membership.hpp"

#include <cmath>

#include "prnu/kernels.hpp"
#include "prnu/parallel.hpp"

namespace prnu {

std::string detector_name(Detector d) { return d == Detector::NP ? "np" : "ncc"; }

Detector parse_detector(const std::string& s) {
    if (s == "np" || s == "NP") return Detector::NP;
    if (s == "ncc" || s == "NCC") return Detector::NCC;
    throw DataError("unknown detector '" + s + "'");
}

double np_statistic(const Image& k_hat, const Image& w_r, const Image& xhat_r, const Image& r,
                    int window, double eps_r, double floor_scale) {
    require_same_shape(k_hat, w_r, "np_statistic");
    require_same_shape(k_hat, xhat_r, "np_statistic");
    require_same_shape(k_hat, r, "np_statistic");
    if (window < 3 || window % 2 == 0) throw DataError("np_statistic: window must be odd and >= 3");

    Image pmat(k_hat.rows(), k_hat.cols());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(k_hat.size()); ++i) {
        const double denom = r[i] > eps_r ? r[i] : eps_r;
        const double q = w_r[i] * xhat_r[i] / denom;
        pmat[i] = k_hat[i] - q;
    }

    const double mean_ksq =
        block_sum(k_hat.size(), [&](std::size_t i) { return k_hat[i] * k_hat[i]; }) /
        static_cast<double>(k_hat.size());
    double floor = floor_scale * mean_ksq;
    if (floor <= 0.0) floor = 1e-300;

    const Image lambda_sq = local_sample_variance(k_hat, window);
    const Image theta_sq = local_sample_variance(pmat, window);

    return block_sum(k_hat.size(), [&](std::size_t i) {
        const double l2 = lambda_sq[i] > floor ? lambda_sq[i] : floor;
        const double t2 = theta_sq[i] > floor ? theta_sq[i] : floor;
        return 0.5 * std::log(l2 / t2) - pmat[i] * pmat[i] / (2.0 * t2) +
               k_hat[i] * k_hat[i] / (2.0 * l2);
    });
}

double ncc_statistic(const Image& k_hat, const Image& w_r) {
    require_same_shape(k_hat, w_r, "ncc_statistic");
    if (k_hat.size() < 2) throw DataError("ncc_statistic: image too small");
    const double n1 = static_cast<double>(k_hat.size() - 1);
    const double mu_k = mean(k_hat), mu_t = mean(w_r);
    const double sd_k = sample_std(k_hat), sd_t = sample_std(w_r);
    if (sd_k <= 1e-15 || sd_t <= 1e-15)
        throw NumericalError("ncc_statistic: constant input (zero variance)");
    const double cross =
        block_sum(k_hat.size(), [&](std::size_t i) { return (k_hat[i] - mu_k) * (w_r[i] - mu_t); });
    return cross / (n1 * sd_k * sd_t);
}

bool decide(double statistic, double psi) { return statistic > psi; }

} // namespace prnu
