// prnuleak: estimate PRNU camera fingerprints, quantify how much the
// estimation images leak into them, and run membership-inference attacks.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "prnu/eval.hpp"
#include "prnu/leakage.hpp"
#include "prnu/parallel.hpp"
#include "prnu/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw prnu::DataError("cannot write " + path.string());
    out << text;
    if (!out) throw prnu::DataError("short write to " + path.string());
}

// The echoed config records the scientific parameters and inputs. The thread
// count and output directory are execution details and stay out of it:
// outputs are bit-identical for any --threads value.
void write_run_config(const fs::path& out_dir, json cfg) {
    write_text(out_dir / "run_config.json", cfg.dump(2) + "\n");
}

void ensure_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw prnu::DataError("cannot create output directory " + dir.string());
}

int thread_arg_or_env(int threads) {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("PRNULEAK_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;
}

struct DenoiserFlags {
    std::string kind = "mihcak";
    double sigma0 = 5.0;
    int levels = 4;
    double blur_sigma = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--denoiser", kind, "Denoiser kind: mihcak|gaussian")
            ->check(CLI::IsMember({"mihcak", "gaussian"}))
            ->capture_default_str();
        cmd->add_option("--sigma0", sigma0, "Assumed noise std of the wavelet denoiser")
            ->capture_default_str();
        cmd->add_option("--levels", levels, "Wavelet decomposition levels")
            ->capture_default_str();
        cmd->add_option("--blur-sigma", blur_sigma, "Std of the gaussian denoiser kernel")
            ->capture_default_str();
    }

    prnu::DenoiserSpec spec() const {
        prnu::DenoiserSpec d;
        d.kind = kind == "gaussian" ? prnu::DenoiserKind::GaussianBlur
                                    : prnu::DenoiserKind::WaveletMihcak;
        d.sigma0 = sigma0;
        d.levels = levels;
        d.blur_sigma = blur_sigma;
        return d;
    }

    json to_json() const {
        return {{"kind", kind},
                {"sigma0", sigma0},
                {"levels", levels},
                {"blur_sigma", blur_sigma}};
    }
};

// ---- simulate -----------------------------------------------------------

struct SimulateArgs {
    std::string out;
    std::string preset;
    int count = 50;
    std::string content = "flat";
    double level = 128.0;
    int rows = 128, cols = 128;
    double sigma_k = 0.02, sigma_n = 2.0, smoothness = 2.0;
    std::uint64_t seed = 1;
    bool clip = false;
    int threads = 0;
};

int cmd_simulate(const SimulateArgs& a) {
    int flat_count = a.count, tex_count = 0;
    double level = a.level;
    if (!a.preset.empty()) {
        if (a.preset == "brt50") {
            flat_count = 50; level = 240.0;
        } else if (a.preset == "drk50") {
            flat_count = 50; level = 16.0;
        } else if (a.preset == "brt49+tex") {
            flat_count = 49; tex_count = 1; level = 240.0;
        } else if (a.preset == "drk49+tex") {
            flat_count = 49; tex_count = 1; level = 16.0;
        } else {
            throw CLI::ValidationError("--preset",
                                       "unknown preset (brt50|drk50|brt49+tex|drk49+tex)");
        }
    } else if (a.content == "textured") {
        tex_count = a.count;
        flat_count = 0;
    }

    ensure_out_dir(a.out);
    const prnu::SensorGroundTruth sensor = prnu::gen_prnu(a.rows, a.cols, a.sigma_k, a.seed);

    prnu::DatasetManifest manifest;
    {
        char note[160];
        std::snprintf(note, sizeof(note),
                      "synthetic sensor: sigma_k=%g, sigma_n=%g (toolkit defaults, not taken "
                      "from any measured camera)",
                      a.sigma_k, a.sigma_n);
        manifest.source_note = note;
    }

    const int total = flat_count + tex_count;
    for (int i = 0; i < total; ++i) {
        const bool textured = i >= flat_count;
        prnu::Image x = textured
                            ? prnu::textured_field(a.rows, a.cols,
                                                   prnu::derive_seed(a.seed, 2 * static_cast<std::uint64_t>(i)),
                                                   a.smoothness)
                            : prnu::flat_field(a.rows, a.cols, level);
        prnu::CaptureConfig cc;
        cc.sigma_n = a.sigma_n;
        cc.clip_to_8bit = a.clip;
        cc.seed = prnu::derive_seed(a.seed, 2 * static_cast<std::uint64_t>(i) + 1);
        const prnu::Image y = prnu::capture(x, sensor, cc);

        char name[32];
        std::snprintf(name, sizeof(name), "img_%04d.pgm", i);
        prnu::save_pgm(y, fs::path(a.out) / name);
        prnu::ManifestEntry e;
        e.path = name;
        e.role = prnu::Role::Estimation;
        e.label = textured ? "textured" : (level < 128.0 ? "dark-flat" : "bright-flat");
        manifest.entries.push_back(std::move(e));
    }
    prnu::save_manifest(manifest, fs::path(a.out) / "manifest.json");

    prnu::FingerprintBundle truth;
    truth.k_hat = sensor.k;
    truth.l = static_cast<std::uint32_t>(total);
    truth.denoiser_id = "groundtruth";
    truth.creation_seed = a.seed;
    prnu::save_bundle(truth, fs::path(a.out) / "groundtruth.bundle");

    write_run_config(a.out, json{{"command", "simulate"},
                                 {"preset", a.preset},
                                 {"flat_count", flat_count},
                                 {"tex_count", tex_count},
                                 {"level", level},
                                 {"rows", a.rows},
                                 {"cols", a.cols},
                                 {"sigma_k", a.sigma_k},
                                 {"sigma_n", a.sigma_n},
                                 {"smoothness", a.smoothness},
                                 {"clip", a.clip},
                                 {"seed", a.seed}});
    std::cout << "wrote " << total << " images + manifest + ground-truth sidecar to " << a.out
              << "\n";
    return 0;
}

// ---- extract -------------------------------------------------------------

struct ExtractArgs {
    std::string manifest;
    std::string out;
    int l = 0; // 0: use all estimation entries
    std::uint64_t seed = 0;
    DenoiserFlags denoiser;
    bool keep_r = false;
    bool no_zero_mean = false, no_dft_wiener = false, whiten = false;
    double eps_r = prnu::kDefaultEpsR;
    int threads = 0;
};

int cmd_extract(const ExtractArgs& a) {
    const fs::path mpath(a.manifest);
    const prnu::DatasetManifest manifest = prnu::load_manifest(mpath);
    const std::vector<std::size_t> est = manifest.entries_with_role(prnu::Role::Estimation);
    if (est.empty()) throw prnu::DataError("extract: manifest has no estimation entries");

    std::vector<std::size_t> chosen = est;
    if (a.l > 0) {
        if (static_cast<std::size_t>(a.l) > est.size())
            throw prnu::DataError("extract: --L exceeds available estimation images");
        prnu::SequentialRng rng(prnu::derive_seed(a.seed, 0xe57), prnu::kStreamShuffle);
        const std::vector<std::size_t> pick =
            prnu::sample_indices(est.size(), static_cast<std::size_t>(a.l), rng);
        chosen.clear();
        for (const std::size_t p : pick) chosen.push_back(est[p]);
    }

    const prnu::DenoiserSpec dspec = a.denoiser.spec();
    const fs::path base = mpath.parent_path();
    std::optional<prnu::EstimationAccumulator> acc;
    std::vector<std::string> used_paths;
    for (const std::size_t idx : chosen) {
        const prnu::Image y = prnu::load_image(base / manifest.entries[idx].path);
        const prnu::Image xhat = prnu::denoise(y, dspec);
        const prnu::Image w = prnu::residual(y, xhat);
        if (!acc) acc.emplace(y.rows(), y.cols());
        acc->add(w, xhat);
        used_paths.push_back(manifest.entries[idx].path);
    }

    prnu::FinalizeStats stats;
    prnu::FingerprintBundle bundle = prnu::finalize(*acc, a.eps_r, &stats);
    prnu::PostprocessOptions post;
    post.zero_mean = !a.no_zero_mean;
    post.dft_wiener = !a.no_dft_wiener;
    post.whiten = a.whiten;
    prnu::postprocess(bundle, post);
    bundle.denoiser_id = dspec.id();
    bundle.creation_seed = a.seed;
    if (!a.keep_r) bundle.r.reset();

    ensure_out_dir(a.out);
    const fs::path final_path = fs::path(a.out) / "fingerprint.bundle";
    const fs::path tmp_path = fs::path(a.out) / ".fingerprint.bundle.tmp";
    prnu::save_bundle(bundle, tmp_path);
    fs::rename(tmp_path, final_path);

    write_run_config(a.out, json{{"command", "extract"},
                                 {"manifest", a.manifest},
                                 {"L", bundle.l},
                                 {"seed", a.seed},
                                 {"denoiser", a.denoiser.to_json()},
                                 {"keep_R", a.keep_r},
                                 {"zero_mean", post.zero_mean},
                                 {"dft_wiener", post.dft_wiener},
                                 {"whiten", post.whiten},
                                 {"eps_r", a.eps_r},
                                 {"low_r_pixels", stats.low_r_pixels},
                                 {"used_paths", used_paths}});
    std::cout << "fingerprint from " << bundle.l << " images -> " << final_path.string() << "\n";
    return 0;
}

// ---- leakage ---------------------------------------------------------------

struct LeakageArgs {
    std::string manifest;
    std::string out;
    std::vector<int> l_values;
    int reps = 1;
    int splits = 10;
    std::uint64_t seed = 0;
    int window = 5;
    std::string gamma_src = "post";
    std::string gamma_est = "local";
    DenoiserFlags denoiser;
    bool whiten = false;
    int threads = 0;
};

int cmd_leakage(const LeakageArgs& a) {
    const fs::path mpath(a.manifest);
    const prnu::DatasetManifest manifest = prnu::load_manifest(mpath);
    ensure_out_dir(a.out);

    const prnu::PoolCache pool =
        prnu::build_pool(manifest, mpath.parent_path(), a.denoiser.spec());

    std::string csv =
        "label,L,rep,seed,ilb_bpp,ilb_bits,p_hat,mu,splits,gamma_median,excluded_pixels,"
        "p_clamped\n";
    const std::string label = mpath.stem().string();
    for (const int l : a.l_values) {
        for (int rep = 0; rep < a.reps; ++rep) {
            prnu::LeakageConfig cfg;
            cfg.l = l;
            cfg.splits = a.splits;
            cfg.seed = prnu::derive_seed(prnu::derive_seed(a.seed, static_cast<std::uint64_t>(l)),
                                         static_cast<std::uint64_t>(rep));
            cfg.denoiser = a.denoiser.spec();
            cfg.post.whiten = a.whiten;
            cfg.gamma_window = a.window;
            cfg.gamma_from_raw = a.gamma_src == "raw";
            cfg.gamma_contrib = a.gamma_est == "contrib";
            prnu::LeakageReport rep_out = prnu::leakage_report(pool.set, cfg);
            rep_out.source_note = manifest.source_note;

            char name[48];
            std::snprintf(name, sizeof(name), "leakage_L%d_r%d.json", l, rep);
            write_text(fs::path(a.out) / name, prnu::leakage_report_json(rep_out) + "\n");

            char row[320];
            std::snprintf(row, sizeof(row), "%s,%d,%d,%llu,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%zu,%d\n",
                          label.c_str(), l, rep,
                          static_cast<unsigned long long>(cfg.seed), rep_out.ilb_bpp,
                          rep_out.ilb_bits, rep_out.p_hat, rep_out.mu, rep_out.splits,
                          rep_out.gamma_median, rep_out.excluded_pixels,
                          rep_out.p_clamped ? 1 : 0);
            csv += row;
            std::cout << "L=" << l << " rep=" << rep << " ILB=" << rep_out.ilb_bpp << " bpp\n";
        }
    }
    write_text(fs::path(a.out) / "leakage.csv", csv);

    write_run_config(a.out, json{{"command", "leakage"},
                                 {"manifest", a.manifest},
                                 {"L", a.l_values},
                                 {"reps", a.reps},
                                 {"splits", a.splits},
                                 {"seed", a.seed},
                                 {"window", a.window},
                                 {"gamma_src", a.gamma_src},
                                 {"gamma_est", a.gamma_est},
                                 {"whiten", a.whiten},
                                 {"denoiser", a.denoiser.to_json()}});
    return 0;
}

// ---- membership ------------------------------------------------------------

struct MembershipArgs {
    std::string manifest;
    std::string bundle;
    std::string out;
    std::string extract_config;
    std::string detector = "both";
    int window = 5;
    // trial mode
    int trials = 0;
    std::vector<int> l_values;
    std::string pool_manifest;
    int pool_count = 250, pool_rows = 128, pool_cols = 128;
    double sigma_k = 0.02, sigma_n = 2.0, smoothness = 2.0;
    int members = 8, non_members = 8;
    bool whiten = false;
    DenoiserFlags denoiser;
    std::uint64_t seed = 0;
    int threads = 0;
};

std::vector<prnu::Detector> detectors_from(const std::string& s, bool have_r) {
    std::vector<prnu::Detector> dets;
    if (s == "both") {
        dets = {prnu::Detector::NP, prnu::Detector::NCC};
    } else {
        dets = {prnu::parse_detector(s)};
    }
    if (!have_r) {
        std::vector<prnu::Detector> filtered;
        for (const prnu::Detector d : dets)
            if (d != prnu::Detector::NP) filtered.push_back(d);
        if (filtered.empty())
            throw prnu::DataError(
                "the NP detector needs the bundle's R map (re-extract with --keep-R)");
        if (filtered.size() != dets.size())
            std::cerr << "note: bundle has no R map, scoring NCC only\n";
        dets = filtered;
    }
    return dets;
}

int cmd_membership(const MembershipArgs& a) {
    ensure_out_dir(a.out);
    std::vector<prnu::MembershipScore> scores;
    json cfg_echo{{"command", "membership"}, {"detector", a.detector}, {"window", a.window},
                  {"seed", a.seed}};

    if (a.trials > 0) {
        // Repeated-trial protocol over a pool of candidate images.
        prnu::PoolCache pool;
        if (!a.pool_manifest.empty()) {
            const fs::path mpath(a.pool_manifest);
            pool = prnu::build_pool(prnu::load_manifest(mpath), mpath.parent_path(),
                                    a.denoiser.spec());
            cfg_echo["pool_manifest"] = a.pool_manifest;
        } else {
            prnu::SyntheticPoolSpec spec;
            spec.rows = a.pool_rows;
            spec.cols = a.pool_cols;
            spec.count = a.pool_count;
            spec.sigma_k = a.sigma_k;
            spec.sigma_n = a.sigma_n;
            spec.smoothness = a.smoothness;
            spec.seed = prnu::derive_seed(a.seed, 0x9001);
            spec.denoiser = a.denoiser.spec();
            pool = prnu::build_pool(spec);
            cfg_echo["pool"] = {{"count", spec.count}, {"rows", spec.rows}, {"cols", spec.cols},
                                {"sigma_k", spec.sigma_k}, {"sigma_n", spec.sigma_n},
                                {"smoothness", spec.smoothness}};
        }
        const std::vector<prnu::Detector> dets = detectors_from(a.detector, true);
        std::vector<int> ls = a.l_values.empty() ? std::vector<int>{50} : a.l_values;

        std::vector<prnu::AucRow> auc_rows;
        for (const int l : ls) {
            prnu::TrialConfig tc;
            tc.l = l;
            tc.n_trials = a.trials;
            tc.detectors = dets;
            tc.queries = {a.members, a.non_members};
            tc.seed = prnu::derive_seed(a.seed, static_cast<std::uint64_t>(l));
            tc.post.whiten = a.whiten;
            tc.window = a.window;
            const std::vector<prnu::MembershipScore> batch = prnu::run_trials(pool, tc);
            scores.insert(scores.end(), batch.begin(), batch.end());

            prnu::LeakageConfig lc;
            lc.l = l;
            lc.seed = tc.seed;
            lc.post.whiten = a.whiten;
            const double ilb_bpp = prnu::leakage_report(pool.set, lc).ilb_bpp;
            for (const prnu::Detector det : dets) {
                std::vector<prnu::MembershipScore> slice;
                for (const prnu::MembershipScore& s : batch)
                    if (s.detector == det) slice.push_back(s);
                prnu::AucRow row;
                row.detector = det;
                row.l = l;
                row.auc = prnu::roc_points(slice).auc;
                row.se = prnu::bootstrap_auc_se(slice, 200, tc.seed);
                row.n_trials = a.trials;
                row.ilb_bpp = ilb_bpp;
                auc_rows.push_back(row);
            }
        }
        write_text(fs::path(a.out) / "auc.csv", prnu::auc_table_csv(auc_rows));
        cfg_echo["trials"] = a.trials;
        cfg_echo["L"] = ls;
        cfg_echo["members"] = a.members;
        cfg_echo["non_members"] = a.non_members;
        cfg_echo["whiten"] = a.whiten;
        cfg_echo["denoiser"] = a.denoiser.to_json();
    } else {
        // Score every manifest entry against one extracted fingerprint.
        if (a.manifest.empty() || a.bundle.empty())
            throw prnu::DataError("membership: need --manifest and --bundle (or --trials)");
        const fs::path mpath(a.manifest);
        const prnu::DatasetManifest manifest = prnu::load_manifest(mpath);
        const prnu::FingerprintBundle bundle = prnu::load_bundle(a.bundle);
        const std::vector<prnu::Detector> dets =
            detectors_from(a.detector, bundle.r.has_value());

        std::set<std::string> used;
        bool have_used = false;
        if (!a.extract_config.empty()) {
            std::ifstream in(a.extract_config);
            if (!in) throw prnu::DataError("cannot open " + a.extract_config);
            json j;
            in >> j;
            for (const auto& p : j.value("used_paths", json::array()))
                used.insert(p.get<std::string>());
            have_used = true;
            cfg_echo["extract_config"] = a.extract_config;
        }
        const std::size_t n_est = manifest.entries_with_role(prnu::Role::Estimation).size();
        const bool all_estimation_used = bundle.l == n_est;

        const fs::path base = mpath.parent_path();
        const prnu::DenoiserSpec dspec = a.denoiser.spec();
        for (const prnu::ManifestEntry& e : manifest.entries) {
            const prnu::Image y = prnu::load_image(base / e.path);
            prnu::require_same_shape(y, bundle.k_hat, "membership query");
            const prnu::Image xhat = prnu::denoise(y, dspec);
            const prnu::Image w = prnu::residual(y, xhat);
            for (const prnu::Detector det : dets) {
                prnu::MembershipScore s;
                s.detector = det;
                s.image_id = e.path;
                s.l = static_cast<int>(bundle.l);
                s.statistic = det == prnu::Detector::NCC
                                  ? prnu::ncc_statistic(bundle.k_hat, w)
                                  : prnu::np_statistic(bundle.k_hat, w, xhat, *bundle.r, a.window);
                if (have_used) {
                    s.is_member_truth = used.count(e.path) > 0;
                } else if (e.role != prnu::Role::Estimation) {
                    s.is_member_truth = false;
                } else if (all_estimation_used) {
                    s.is_member_truth = true;
                } // else unknown: leave empty
                scores.push_back(std::move(s));
            }
        }
        cfg_echo["manifest"] = a.manifest;
        cfg_echo["bundle"] = a.bundle;
        cfg_echo["denoiser"] = a.denoiser.to_json();
    }

    write_text(fs::path(a.out) / "scores.csv", prnu::scores_csv(scores));
    write_run_config(a.out, cfg_echo);
    std::cout << "wrote " << scores.size() << " scores to " << a.out << "/scores.csv\n";
    return 0;
}

// ---- roc ---------------------------------------------------------------------

struct RocArgs {
    std::string scores;
    std::string out;
    int bootstrap = 200;
    std::uint64_t seed = 0;
    int threads = 0;
};

int cmd_roc(const RocArgs& a) {
    std::ifstream in(a.scores, std::ios::binary);
    if (!in) throw prnu::DataError("cannot open scores file " + a.scores);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::vector<prnu::MembershipScore> all = prnu::parse_scores_csv(text);
    if (all.empty()) throw prnu::DataError("roc: no scores in " + a.scores);
    ensure_out_dir(a.out);

    std::vector<std::pair<prnu::Detector, int>> groups;
    for (const prnu::MembershipScore& s : all) {
        const std::pair<prnu::Detector, int> key{s.detector, s.l};
        if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
    }

    std::vector<prnu::RocCurve> curves;
    std::vector<prnu::AucRow> rows;
    for (const auto& [det, l] : groups) {
        std::vector<prnu::MembershipScore> slice;
        for (const prnu::MembershipScore& s : all)
            if (s.detector == det && s.l == l && s.is_member_truth) slice.push_back(s);
        if (slice.empty()) continue;
        prnu::RocCurve curve = prnu::roc_points(slice);
        char name[48];
        std::snprintf(name, sizeof(name), "roc_%s_L%d.csv", prnu::detector_name(det).c_str(), l);
        write_text(fs::path(a.out) / name, prnu::roc_csv(curve));

        prnu::AucRow row;
        row.detector = det;
        row.l = l;
        row.auc = curve.auc;
        row.se = prnu::bootstrap_auc_se(slice, a.bootstrap, a.seed);
        std::set<int> trials;
        for (const prnu::MembershipScore& s : slice) trials.insert(s.trial);
        row.n_trials = static_cast<int>(trials.size());
        rows.push_back(row);
        curves.push_back(std::move(curve));
    }
    if (curves.empty()) throw prnu::DataError("roc: no labeled scores to sweep");

    write_text(fs::path(a.out) / "auc.csv", prnu::auc_table_csv(rows));
    write_text(fs::path(a.out) / "roc.svg", prnu::render_roc_svg(curves));

    // Fig.2-style statistic trace from the first trial present.
    const int first_trial = all.front().trial;
    std::vector<prnu::MembershipScore> trace;
    for (const prnu::MembershipScore& s : all)
        if (s.trial == first_trial) trace.push_back(s);
    write_text(fs::path(a.out) / "trace.svg", prnu::render_trace_svg(trace));

    write_run_config(a.out, json{{"command", "roc"},
                                 {"scores", a.scores},
                                 {"bootstrap", a.bootstrap},
                                 {"seed", a.seed}});
    for (const prnu::AucRow& r : rows)
        std::cout << prnu::detector_name(r.detector) << " L=" << r.l << " AUC=" << r.auc
                  << " (se " << r.se << ")\n";
    return 0;
}

// ---- mitigate -------------------------------------------------------------

struct MitigateArgs {
    std::string bundle;
    std::string out;
    int window = 5;
    int threads = 0;
};

int cmd_mitigate(const MitigateArgs& a) {
    prnu::FingerprintBundle b = prnu::load_bundle(a.bundle);
    b.k_hat = prnu::whiten(b.k_hat, a.window);
    b.whitened = true;
    ensure_out_dir(a.out);
    prnu::save_bundle(b, fs::path(a.out) / "whitened.bundle");
    write_run_config(a.out, json{{"command", "mitigate"},
                                 {"bundle", a.bundle},
                                 {"window", a.window}});
    std::cout << "whitened bundle -> " << (fs::path(a.out) / "whitened.bundle").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PRNU fingerprint extraction, leakage bounds and membership inference"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "Generate a synthetic capture set");
    c_sim->add_option("--out", sim.out, "Output directory")->required();
    c_sim->add_option("--preset", sim.preset, "brt50|drk50|brt49+tex|drk49+tex");
    c_sim->add_option("--count", sim.count, "Number of images")->capture_default_str();
    c_sim->add_option("--content", sim.content, "flat|textured")
        ->check(CLI::IsMember({"flat", "textured"}))
        ->capture_default_str();
    c_sim->add_option("--level", sim.level, "Flat-field luminance level")->capture_default_str();
    c_sim->add_option("--m", sim.rows, "Image rows")->capture_default_str();
    c_sim->add_option("--n", sim.cols, "Image cols")->capture_default_str();
    c_sim->add_option("--sigma-k", sim.sigma_k, "PRNU std")->capture_default_str();
    c_sim->add_option("--sigma-n", sim.sigma_n, "Additive noise std")->capture_default_str();
    c_sim->add_option("--smoothness", sim.smoothness, "Texture blur std")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "Seed")->capture_default_str();
    c_sim->add_flag("--clip", sim.clip, "Clip captures to [0,255] before writing");
    c_sim->add_option("--threads", sim.threads, "Worker threads (outputs are identical)");

    ExtractArgs ext;
    CLI::App* c_ext = app.add_subcommand("extract", "Estimate a fingerprint from a manifest");
    c_ext->add_option("--manifest", ext.manifest, "Dataset manifest")->required();
    c_ext->add_option("--out", ext.out, "Output directory")->required();
    c_ext->add_option("--L", ext.l, "Use a random subset of this size (default: all)");
    c_ext->add_option("--seed", ext.seed, "Subset sampling seed")->capture_default_str();
    ext.denoiser.attach(c_ext);
    c_ext->add_flag("--keep-R", ext.keep_r, "Store the normalizer R (needed by the NP detector)");
    c_ext->add_flag("--no-zero-mean", ext.no_zero_mean, "Skip zero-meaning");
    c_ext->add_flag("--no-dft-wiener", ext.no_dft_wiener, "Skip DFT-domain Wiener filtering");
    c_ext->add_flag("--whiten", ext.whiten, "Apply local-std whitening (mitigation)");
    c_ext->add_option("--eps-r", ext.eps_r, "Normalizer guard")->capture_default_str();
    c_ext->add_option("--threads", ext.threads, "Worker threads (outputs are identical)");

    LeakageArgs lk;
    CLI::App* c_lk = app.add_subcommand("leakage", "Information-leakage bound of an image set");
    c_lk->add_option("--manifest", lk.manifest, "Dataset manifest")->required();
    c_lk->add_option("--out", lk.out, "Output directory")->required();
    c_lk->add_option("--L", lk.l_values, "Estimation-set size (repeatable)")->required();
    c_lk->add_option("--reps", lk.reps, "Repetitions per L")->capture_default_str();
    c_lk->add_option("--S", lk.splits, "Random splits for the P estimate")->capture_default_str();
    c_lk->add_option("--seed", lk.seed, "Seed")->capture_default_str();
    c_lk->add_option("--window", lk.window, "Gamma local-variance window")->capture_default_str();
    c_lk->add_option("--gamma-src", lk.gamma_src, "post|raw fingerprint for gamma")
        ->check(CLI::IsMember({"post", "raw"}))
        ->capture_default_str();
    c_lk->add_option("--gamma-est", lk.gamma_est, "local|contrib gamma estimator")
        ->check(CLI::IsMember({"local", "contrib"}))
        ->capture_default_str();
    c_lk->add_flag("--whiten", lk.whiten, "Whiten before computing gamma");
    lk.denoiser.attach(c_lk);
    c_lk->add_option("--threads", lk.threads, "Worker threads (outputs are identical)");

    MembershipArgs mem;
    CLI::App* c_mem = app.add_subcommand("membership", "Membership-inference scores");
    c_mem->add_option("--manifest", mem.manifest, "Manifest of query images");
    c_mem->add_option("--bundle", mem.bundle, "Fingerprint bundle to test against");
    c_mem->add_option("--out", mem.out, "Output directory")->required();
    c_mem->add_option("--extract-config", mem.extract_config,
                      "run_config.json of the extract run (membership ground truth)");
    c_mem->add_option("--detector", mem.detector, "np|ncc|both")
        ->check(CLI::IsMember({"np", "ncc", "both"}))
        ->capture_default_str();
    c_mem->add_option("--window", mem.window, "NP local-variance window")->capture_default_str();
    c_mem->add_option("--trials", mem.trials, "Run the repeated-trial protocol");
    c_mem->add_option("--L", mem.l_values, "Estimation-set size per trial (repeatable)");
    c_mem->add_option("--pool-manifest", mem.pool_manifest, "Pool from a manifest");
    c_mem->add_option("--pool-count", mem.pool_count, "Synthetic pool size")->capture_default_str();
    c_mem->add_option("--pool-m", mem.pool_rows, "Synthetic pool rows")->capture_default_str();
    c_mem->add_option("--pool-n", mem.pool_cols, "Synthetic pool cols")->capture_default_str();
    c_mem->add_option("--sigma-k", mem.sigma_k, "Synthetic PRNU std")->capture_default_str();
    c_mem->add_option("--sigma-n", mem.sigma_n, "Synthetic noise std")->capture_default_str();
    c_mem->add_option("--smoothness", mem.smoothness, "Synthetic texture blur std")
        ->capture_default_str();
    c_mem->add_option("--members", mem.members, "Member queries per trial")->capture_default_str();
    c_mem->add_option("--non-members", mem.non_members, "Non-member queries per trial")
        ->capture_default_str();
    c_mem->add_flag("--whiten", mem.whiten, "Whiten per-trial fingerprints (mitigation)");
    mem.denoiser.attach(c_mem);
    c_mem->add_option("--seed", mem.seed, "Seed")->capture_default_str();
    c_mem->add_option("--threads", mem.threads, "Worker threads (outputs are identical)");

    RocArgs roc;
    CLI::App* c_roc = app.add_subcommand("roc", "Threshold sweep, AUC and plots from scores");
    c_roc->add_option("--scores", roc.scores, "scores.csv from membership")->required();
    c_roc->add_option("--out", roc.out, "Output directory")->required();
    c_roc->add_option("--bootstrap", roc.bootstrap, "Bootstrap resamples")->capture_default_str();
    c_roc->add_option("--seed", roc.seed, "Bootstrap seed")->capture_default_str();
    c_roc->add_option("--threads", roc.threads, "Worker threads (outputs are identical)");

    MitigateArgs mit;
    CLI::App* c_mit = app.add_subcommand("mitigate", "Whiten a fingerprint bundle");
    c_mit->add_option("--bundle", mit.bundle, "Input bundle")->required();
    c_mit->add_option("--out", mit.out, "Output directory")->required();
    c_mit->add_option("--window", mit.window, "Local-std window")->capture_default_str();
    c_mit->add_option("--threads", mit.threads, "Worker threads (outputs are identical)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*c_sim) {
            prnu::set_thread_count(thread_arg_or_env(sim.threads));
            return cmd_simulate(sim);
        }
        if (*c_ext) {
            prnu::set_thread_count(thread_arg_or_env(ext.threads));
            return cmd_extract(ext);
        }
        if (*c_lk) {
            prnu::set_thread_count(thread_arg_or_env(lk.threads));
            return cmd_leakage(lk);
        }
        if (*c_mem) {
            prnu::set_thread_count(thread_arg_or_env(mem.threads));
            return cmd_membership(mem);
        }
        if (*c_roc) {
            prnu::set_thread_count(thread_arg_or_env(roc.threads));
            return cmd_roc(roc);
        }
        if (*c_mit) {
            prnu::set_thread_count(thread_arg_or_env(mit.threads));
            return cmd_mitigate(mit);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const prnu::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const prnu::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
