#include "prnu/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "prnu/leakage.hpp"
#include "prnu/rng.hpp"

namespace prnu {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

} // namespace

PoolCache build_pool(const SyntheticPoolSpec& spec) {
    if (spec.count < 1) throw DataError("build_pool: count must be positive");
    PoolCache pool;
    pool.set.w.resize(static_cast<std::size_t>(spec.count));
    pool.set.xhat.resize(static_cast<std::size_t>(spec.count));
    const SensorGroundTruth sensor = gen_prnu(spec.rows, spec.cols, spec.sigma_k, spec.seed);
    pool.truth_k = sensor.k;
    for (int i = 0; i < spec.count; ++i) {
        const Image x = textured_field(spec.rows, spec.cols,
                                       derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(i)),
                                       spec.smoothness);
        CaptureConfig cc;
        cc.sigma_n = spec.sigma_n;
        cc.seed = derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(i) + 1);
        const Image y = capture(x, sensor, cc);
        const std::size_t idx = static_cast<std::size_t>(i);
        pool.set.xhat[idx] = denoise(y, spec.denoiser, &x);
        pool.set.w[idx] = residual(y, pool.set.xhat[idx]);
    }
    return pool;
}

PoolCache build_pool(const DatasetManifest& manifest, const std::filesystem::path& base_dir,
                     const DenoiserSpec& denoiser) {
    const std::vector<std::size_t> est = manifest.entries_with_role(Role::Estimation);
    if (est.empty()) throw DataError("build_pool: manifest has no estimation images");
    PoolCache pool;
    pool.set.w.resize(est.size());
    pool.set.xhat.resize(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) {
        const Image y = load_image(base_dir / manifest.entries[est[i]].path);
        if (i > 0) require_same_shape(y, pool.set.xhat[0], "build_pool");
        pool.set.xhat[i] = denoise(y, denoiser);
        pool.set.w[i] = residual(y, pool.set.xhat[i]);
    }
    return pool;
}

std::vector<MembershipScore> run_trials(const PoolCache& pool, const TrialConfig& cfg) {
    if (cfg.n_trials < 0) throw DataError("run_trials: negative trial count");
    if (cfg.n_trials == 0) return {};
    if (cfg.l < 2) throw DataError("run_trials: L must be >= 2");
    if (cfg.queries.members < 0 || cfg.queries.non_members < 0)
        throw DataError("run_trials: negative query count");
    if (cfg.queries.members > cfg.l) throw DataError("run_trials: more member queries than L");
    if (pool.count() < static_cast<std::size_t>(cfg.l) + static_cast<std::size_t>(cfg.queries.non_members))
        throw DataError("run_trials: pool too small for L + non-member queries");
    if (cfg.detectors.empty()) throw DataError("run_trials: no detectors requested");

    std::vector<MembershipScore> scores;
    scores.reserve(static_cast<std::size_t>(cfg.n_trials) * cfg.detectors.size() *
                   static_cast<std::size_t>(cfg.queries.members + cfg.queries.non_members));

    for (int t = 0; t < cfg.n_trials; ++t) {
        SequentialRng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)), kStreamTrial);
        const std::vector<std::size_t> est =
            sample_indices(pool.count(), static_cast<std::size_t>(cfg.l), rng);

        std::vector<char> in_est(pool.count(), 0);
        for (const std::size_t i : est) in_est[i] = 1;
        std::vector<std::size_t> held;
        held.reserve(pool.count() - est.size());
        for (std::size_t i = 0; i < pool.count(); ++i)
            if (!in_est[i]) held.push_back(i);

        std::vector<std::size_t> member_q, nonmember_q;
        for (const std::size_t p :
             sample_indices(est.size(), static_cast<std::size_t>(cfg.queries.members), rng))
            member_q.push_back(est[p]);
        for (const std::size_t p :
             sample_indices(held.size(), static_cast<std::size_t>(cfg.queries.non_members), rng))
            nonmember_q.push_back(held[p]);

        FingerprintBundle bundle = estimate_fingerprint(pool.set, est, cfg.eps_r);
        postprocess(bundle, cfg.post);

        for (const Detector det : cfg.detectors) {
            auto score_one = [&](std::size_t q, bool member) {
                MembershipScore s;
                s.detector = det;
                s.image_id = "t" + std::to_string(t) + "_i" + std::to_string(q);
                s.is_member_truth = member;
                s.trial = t;
                s.l = cfg.l;
                s.statistic =
                    det == Detector::NCC
                        ? ncc_statistic(bundle.k_hat, pool.set.w[q])
                        : np_statistic(bundle.k_hat, pool.set.w[q], pool.set.xhat[q], *bundle.r,
                                       cfg.window, cfg.eps_r);
                scores.push_back(std::move(s));
            };
            for (const std::size_t q : member_q) score_one(q, true);
            for (const std::size_t q : nonmember_q) score_one(q, false);
        }
    }
    return scores;
}

RocCurve roc_points(const std::vector<MembershipScore>& scores) {
    if (scores.empty()) throw DataError("roc_points: no scores");
    RocCurve curve;
    curve.detector = scores.front().detector;
    curve.l = scores.front().l;

    std::vector<std::pair<double, bool>> labeled;
    labeled.reserve(scores.size());
    std::size_t members = 0;
    for (const MembershipScore& s : scores) {
        if (s.detector != curve.detector) throw DataError("roc_points: mixed detectors");
        if (!s.is_member_truth) throw DataError("roc_points: score without ground-truth label");
        if (!std::isfinite(s.statistic)) throw DataError("roc_points: non-finite statistic");
        labeled.emplace_back(s.statistic, *s.is_member_truth);
        if (*s.is_member_truth) ++members;
    }
    const std::size_t non_members = labeled.size() - members;
    if (members == 0 || non_members == 0) throw DataError("roc_points: single-class input");

    std::sort(labeled.begin(), labeled.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    // Threshold at each distinct value v classifies s > v as member, so the
    // point preceding each value group belongs to that threshold.
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < labeled.size();) {
        const double v = labeled[i].first;
        curve.points.push_back({v, static_cast<double>(fp) / static_cast<double>(non_members),
                                static_cast<double>(tp) / static_cast<double>(members)});
        while (i < labeled.size() && labeled[i].first == v) {
            if (labeled[i].second)
                ++tp;
            else
                ++fp;
            ++i;
        }
    }
    curve.points.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});

    double auc = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        auc += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
    }
    curve.auc = auc;
    return curve;
}

double bootstrap_auc_se(const std::vector<MembershipScore>& scores, int resamples,
                        std::uint64_t seed) {
    if (resamples < 2) throw DataError("bootstrap_auc_se: need at least 2 resamples");
    // Group rows by trial; single runs (trial < 0) fall back to per-class
    // groups of one row so every resample still holds both labels.
    std::map<int, std::vector<std::size_t>> by_trial;
    bool trialed = true;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].trial < 0) trialed = false;
        by_trial[scores[i].trial].push_back(i);
    }
    std::vector<double> aucs;
    aucs.reserve(static_cast<std::size_t>(resamples));
    SequentialRng rng(derive_seed(seed, 0xb007), kStreamTrial);

    if (trialed && by_trial.size() >= 2) {
        std::vector<const std::vector<std::size_t>*> groups;
        for (const auto& kv : by_trial) groups.push_back(&kv.second);
        for (int rs = 0; rs < resamples; ++rs) {
            std::vector<MembershipScore> synth;
            for (std::size_t g = 0; g < groups.size(); ++g) {
                const auto& grp = *groups[rng.below(groups.size())];
                for (const std::size_t i : grp) synth.push_back(scores[i]);
            }
            aucs.push_back(roc_points(synth).auc);
        }
    } else {
        std::vector<std::size_t> mem, non;
        for (std::size_t i = 0; i < scores.size(); ++i)
            (scores[i].is_member_truth.value_or(false) ? mem : non).push_back(i);
        if (mem.empty() || non.empty()) throw DataError("bootstrap_auc_se: single-class input");
        for (int rs = 0; rs < resamples; ++rs) {
            std::vector<MembershipScore> synth;
            for (std::size_t i = 0; i < mem.size(); ++i)
                synth.push_back(scores[mem[rng.below(mem.size())]]);
            for (std::size_t i = 0; i < non.size(); ++i)
                synth.push_back(scores[non[rng.below(non.size())]]);
            aucs.push_back(roc_points(synth).auc);
        }
    }
    double m = 0.0;
    for (const double a : aucs) m += a;
    m /= static_cast<double>(aucs.size());
    double ss = 0.0;
    for (const double a : aucs) ss += (a - m) * (a - m);
    return std::sqrt(ss / static_cast<double>(aucs.size() - 1));
}

std::vector<AucRow> auc_compare(const PoolCache& pool, const std::vector<int>& l_values,
                                const std::vector<Detector>& detectors, const TrialConfig& base) {
    if (!std::is_sorted(l_values.begin(), l_values.end()))
        throw DataError("auc_compare: L values must be ascending");
    if (base.n_trials < 30) throw DataError("auc_compare: need at least 30 trials per cell");

    std::vector<AucRow> rows;
    for (const int l : l_values) {
        TrialConfig cfg = base;
        cfg.l = l;
        cfg.detectors = detectors;
        cfg.seed = derive_seed(base.seed, static_cast<std::uint64_t>(l));
        const std::vector<MembershipScore> scores = run_trials(pool, cfg);

        // Same-pool leakage for side-by-side reading with the AUCs.
        LeakageConfig lc;
        lc.l = l;
        lc.seed = cfg.seed;
        lc.post = base.post;
        const double ilb_bpp = leakage_report(pool.set, lc).ilb_bpp;

        for (const Detector det : detectors) {
            std::vector<MembershipScore> slice;
            for (const MembershipScore& s : scores)
                if (s.detector == det) slice.push_back(s);
            AucRow row;
            row.detector = det;
            row.l = l;
            row.auc = roc_points(slice).auc;
            row.se = bootstrap_auc_se(slice, 200, cfg.seed);
            row.n_trials = cfg.n_trials;
            row.ilb_bpp = ilb_bpp;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string roc_csv(const RocCurve& curve) {
    std::string out = "threshold,fpr,tpr\n";
    for (const RocPoint& p : curve.points) {
        out += fmt("%.17g", p.threshold);
        out += ",";
        out += fmt("%.17g", p.fpr);
        out += ",";
        out += fmt("%.17g", p.tpr);
        out += "\n";
    }
    return out;
}

std::string auc_table_csv(const std::vector<AucRow>& rows) {
    std::string out = "detector,L,auc,se,n_trials,ilb_bpp\n";
    for (const AucRow& r : rows) {
        out += detector_name(r.detector) + "," + std::to_string(r.l) + "," +
               fmt("%.17g", r.auc) + "," + fmt("%.17g", r.se) + "," + std::to_string(r.n_trials) +
               ",";
        if (r.ilb_bpp) out += fmt("%.17g", *r.ilb_bpp);
        out += "\n";
    }
    return out;
}

std::string scores_csv(const std::vector<MembershipScore>& scores) {
    std::string out = "image_id,detector,L,trial,statistic,is_member\n";
    for (const MembershipScore& s : scores) {
        if (s.image_id.find(',') != std::string::npos ||
            s.image_id.find('\n') != std::string::npos)
            throw DataError("scores_csv: image id contains a delimiter: " + s.image_id);
        out += s.image_id + "," + detector_name(s.detector) + "," + std::to_string(s.l) + "," +
               std::to_string(s.trial) + "," + fmt("%.17g", s.statistic) + ",";
        if (s.is_member_truth) out += *s.is_member_truth ? "1" : "0";
        out += "\n";
    }
    return out;
}

std::vector<MembershipScore> parse_scores_csv(const std::string& text) {
    std::vector<MembershipScore> scores;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("image_id,", 0) != 0)
        throw DataError("scores csv: missing header");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 6)
            throw DataError("scores csv: bad field count at line " + std::to_string(lineno));
        MembershipScore s;
        s.image_id = f[0];
        s.detector = parse_detector(f[1]);
        try {
            s.l = std::stoi(f[2]);
            s.trial = std::stoi(f[3]);
            s.statistic = std::stod(f[4]);
        } catch (const std::exception&) {
            throw DataError("scores csv: bad numeric field at line " + std::to_string(lineno));
        }
        if (f[5] == "1")
            s.is_member_truth = true;
        else if (f[5] == "0")
            s.is_member_truth = false;
        else if (!f[5].empty())
            throw DataError("scores csv: bad is_member at line " + std::to_string(lineno));
        scores.push_back(std::move(s));
    }
    return scores;
}

namespace {

const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string svg_num(double v) { return fmt("%.2f", v); }

} // namespace

std::string render_roc_svg(const std::vector<RocCurve>& curves) {
    const double w = 560, h = 560, m = 60;
    const double pw = w - 2 * m, ph = h - 2 * m;
    auto sx = [&](double fpr) { return m + fpr * pw; };
    auto sy = [&](double tpr) { return h - m - tpr * ph; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(w) + "\" height=\"" +
         svg_num(h) + "\" viewBox=\"0 0 " + svg_num(w) + " " + svg_num(h) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        s += "<line x1=\"" + svg_num(sx(f)) + "\" y1=\"" + svg_num(sy(0)) + "\" x2=\"" +
             svg_num(sx(f)) + "\" y2=\"" + svg_num(sy(1)) + "\" stroke=\"#dddddd\"/>\n";
        s += "<line x1=\"" + svg_num(sx(0)) + "\" y1=\"" + svg_num(sy(f)) + "\" x2=\"" +
             svg_num(sx(1)) + "\" y2=\"" + svg_num(sy(f)) + "\" stroke=\"#dddddd\"/>\n";
        s += "<text x=\"" + svg_num(sx(f) - 10) + "\" y=\"" + svg_num(sy(0) + 20) +
             "\" font-size=\"12\">" + fmt("%.2f", f) + "</text>\n";
        s += "<text x=\"" + svg_num(sx(0) - 38) + "\" y=\"" + svg_num(sy(f) + 4) +
             "\" font-size=\"12\">" + fmt("%.2f", f) + "</text>\n";
    }
    s += "<line x1=\"" + svg_num(sx(0)) + "\" y1=\"" + svg_num(sy(0)) + "\" x2=\"" +
         svg_num(sx(1)) + "\" y2=\"" + svg_num(sy(1)) +
         "\" stroke=\"#999999\" stroke-dasharray=\"5,5\"/>\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        std::string pts;
        for (const RocPoint& p : curves[c].points)
            pts += svg_num(sx(p.fpr)) + "," + svg_num(sy(p.tpr)) + " ";
        const char* color = kPalette[c % 6];
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.7\" points=\"" + pts + "\"/>\n";
        s += "<text x=\"" + svg_num(sx(0.55)) + "\" y=\"" +
             svg_num(sy(0.05) - 18.0 * static_cast<double>(c)) + "\" font-size=\"13\" fill=\"" +
             color + "\">" + detector_name(curves[c].detector) +
             " L=" + std::to_string(curves[c].l) + " AUC=" + fmt("%.3f", curves[c].auc) +
             "</text>\n";
    }
    s += "<text x=\"" + svg_num(w / 2 - 60) + "\" y=\"" + svg_num(h - 14) +
         "\" font-size=\"13\">false positive rate</text>\n";
    s += "<text x=\"16\" y=\"" + svg_num(h / 2) +
         "\" font-size=\"13\" transform=\"rotate(-90 16 " + svg_num(h / 2) +
         ")\">true positive rate</text>\n";
    s += "</svg>\n";
    return s;
}

std::string render_trace_svg(const std::vector<MembershipScore>& scores) {
    if (scores.empty()) throw DataError("render_trace_svg: no scores");
    std::vector<Detector> dets;
    for (const MembershipScore& s : scores)
        if (std::find(dets.begin(), dets.end(), s.detector) == dets.end())
            dets.push_back(s.detector);

    const double w = 640, panel_h = 240, m = 50;
    const double h = m + dets.size() * panel_h;
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(w) + "\" height=\"" +
         svg_num(h) + "\" viewBox=\"0 0 " + svg_num(w) + " " + svg_num(h) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t d = 0; d < dets.size(); ++d) {
        std::vector<const MembershipScore*> rows;
        for (const MembershipScore& sc : scores)
            if (sc.detector == dets[d]) rows.push_back(&sc);
        std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
            return a->is_member_truth.value_or(false) > b->is_member_truth.value_or(false);
        });
        std::size_t members = 0;
        double lo = rows.front()->statistic, hi = lo;
        for (const auto* r : rows) {
            lo = std::min(lo, r->statistic);
            hi = std::max(hi, r->statistic);
            if (r->is_member_truth.value_or(false)) ++members;
        }
        if (hi == lo) hi = lo + 1.0;

        const double top = m / 2.0 + d * panel_h, bot = top + panel_h - m;
        const double pw = w - 2 * m;
        auto px = [&](std::size_t i) {
            return m + pw * static_cast<double>(i) /
                           static_cast<double>(rows.size() > 1 ? rows.size() - 1 : 1);
        };
        auto py = [&](double v) { return bot - (v - lo) / (hi - lo) * (bot - top); };

        s += "<rect x=\"" + svg_num(m) + "\" y=\"" + svg_num(top) + "\" width=\"" + svg_num(pw) +
             "\" height=\"" + svg_num(bot - top) + "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
        std::string pts;
        for (std::size_t i = 0; i < rows.size(); ++i)
            pts += svg_num(px(i)) + "," + svg_num(py(rows[i]->statistic)) + " ";
        s += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[d % 6]) +
             "\" stroke-width=\"1.2\" points=\"" + pts + "\"/>\n";
        if (members > 0 && members < rows.size()) {
            const double xb = 0.5 * (px(members - 1) + px(members));
            s += "<line x1=\"" + svg_num(xb) + "\" y1=\"" + svg_num(top) + "\" x2=\"" +
                 svg_num(xb) + "\" y2=\"" + svg_num(bot) +
                 "\" stroke=\"#999999\" stroke-dasharray=\"4,4\"/>\n";
        }
        s += "<text x=\"" + svg_num(m) + "\" y=\"" + svg_num(top - 6) + "\" font-size=\"13\">" +
             detector_name(dets[d]) + " statistic (members first)</text>\n";
    }
    s += "</svg>\n";
    return s;
}

} // namespace prnu
