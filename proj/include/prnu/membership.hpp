#pragma once

#include <optional>
#include <string>

#include "prnu/image.hpp"

namespace prnu {

enum class Detector { NP, NCC };

std::string detector_name(Detector d);
Detector parse_detector(const std::string& s);

struct MembershipScore {
    double statistic = 0.0;
    Detector detector = Detector::NCC;
    std::string image_id;
    std::optional<bool> is_member_truth;
    int trial = -1; // evaluation harness bookkeeping; -1 for single runs
    int l = 0;      // estimation-set size behind the tested fingerprint
};

// Genie Neyman-Pearson statistic. Needs the normalizer R (unknown to a real
// attacker): Q = (W_r o Xhat_r)/R, Pmat = K_hat - Q, and lambda^2/theta^2 are
// the local variances of K_hat and Pmat. Returns
//   sum [ log(lambda/theta) - Pmat^2/(2 theta^2) + K_hat^2/(2 lambda^2) ]
// (natural log; only the ordering matters for thresholding). Both variance
// maps are floored at floor_scale * mean(K_hat^2).
double np_statistic(const Image& k_hat, const Image& w_r, const Image& xhat_r, const Image& r,
                    int window = 5, double eps_r = 1e-6, double floor_scale = 1e-12);

// Realizable detector: sample-normalized cross-correlation of K_hat and W_r
// with denominator MN-1.
double ncc_statistic(const Image& k_hat, const Image& w_r);

// statistic > psi -> member (strict).
bool decide(double statistic, double psi);

} // namespace prnu
