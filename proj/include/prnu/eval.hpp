#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "prnu/denoise.hpp"
#include "prnu/fingerprint.hpp"
#include "prnu/io.hpp"
#include "prnu/membership.hpp"
#include "prnu/sensor.hpp"

namespace prnu {

// Synthetic capture pool: `count` textured scenes shot through one simulated
// sensor. sigma_k/sigma_n defaults are toolkit choices, not literature values.
struct SyntheticPoolSpec {
    int rows = 128, cols = 128;
    int count = 250;
    double sigma_k = 0.02;
    double sigma_n = 2.0;
    double smoothness = 2.0;
    std::uint64_t seed = 1;
    DenoiserSpec denoiser;
};

// Denoised pool; per-image residuals/denoised frames are fixed regardless of
// which subset a trial draws, so they are computed once.
struct PoolCache {
    ResidualSet set;
    std::optional<Image> truth_k; // synthetic pools only

    std::size_t count() const { return set.count(); }
};

PoolCache build_pool(const SyntheticPoolSpec& spec);
PoolCache build_pool(const DatasetManifest& manifest, const std::filesystem::path& base_dir,
                     const DenoiserSpec& denoiser);

struct QueryCounts {
    int members = 8;
    int non_members = 8;
};

struct TrialConfig {
    int l = 50;
    int n_trials = 30;
    std::vector<Detector> detectors = {Detector::NCC};
    QueryCounts queries;
    std::uint64_t seed = 0;
    PostprocessOptions post;
    double eps_r = kDefaultEpsR;
    int window = 5; // local-variance window of the NP detector
};

// Repeated membership trials: each trial draws an estimation subset of size
// L, estimates and post-processes the fingerprint, and scores member and
// held-out non-member queries with every requested detector.
std::vector<MembershipScore> run_trials(const PoolCache& pool, const TrialConfig& cfg);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; // (0,0) .. (1,1), nondecreasing
    double auc = 0.0;
    Detector detector = Detector::NCC;
    int l = 0;
};

// Threshold sweep over all distinct statistic values plus the +-inf
// endpoints, member decided by the strict > rule; AUC by trapezoid.
RocCurve roc_points(const std::vector<MembershipScore>& scores);

// Trial-level bootstrap standard error of the AUC.
double bootstrap_auc_se(const std::vector<MembershipScore>& scores, int resamples = 200,
                        std::uint64_t seed = 0);

struct AucRow {
    Detector detector = Detector::NCC;
    int l = 0;
    double auc = 0.0;
    double se = 0.0;
    int n_trials = 0;
    std::optional<double> ilb_bpp; // same-pool leakage, for side-by-side reading
};

// AUC(detector, L) table over the requested L values; trials are shared
// across detectors so their comparison is paired.
std::vector<AucRow> auc_compare(const PoolCache& pool, const std::vector<int>& l_values,
                                const std::vector<Detector>& detectors, const TrialConfig& base);

// ---- renderings ---------------------------------------------------------

std::string roc_csv(const RocCurve& curve);
std::string auc_table_csv(const std::vector<AucRow>& rows);
std::string scores_csv(const std::vector<MembershipScore>& scores);
std::vector<MembershipScore> parse_scores_csv(const std::string& text);

// ROC overlays, one polyline per (detector, L) pair, with the chance line.
std::string render_roc_svg(const std::vector<RocCurve>& curves);

// Statistic trace in query order with members first, one panel per detector.
std::string render_trace_svg(const std::vector<MembershipScore>& scores);

} // namespace prnu
