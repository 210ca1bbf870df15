// Acceptance suite: runs the project's eleven acceptance criteria at their
// stated tolerances and prints one PASS/FAIL line per criterion.
//
//   qfan_acceptance                 run everything
//   qfan_acceptance --criterion K   run a single criterion
//
// Exit code is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qfan/qfan.hpp"
#include "../test_util.hpp"

using namespace qfan;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::string label;
    bool ok = false;
    std::string detail;
};

struct CriterionResult {
    bool ok = true;
    std::vector<Check> checks;

    void add(const std::string& label, bool check_ok, const std::string& detail = "") {
        checks.push_back({label, check_ok, detail});
        ok = ok && check_ok;
    }
};

constexpr std::uint64_t kDatasetSeed = 42;

// Shared d=12 protocol dataset: N = 6000 train / 1000 test.
struct Protocol {
    Dataset train_set;
    Dataset test_set;
    double iqr_scale = 0.0;
};

Protocol make_protocol(int d) {
    const Dataset all = synth_showers(ShowerRecipe{}, d, 7000, kDatasetSeed);
    auto [tr, te] = split(all, 6000, 1000, kDatasetSeed);
    Protocol p;
    p.train_set = std::move(tr);
    p.test_set = std::move(te);
    double iqr = 0.0;
    for (int j = 0; j < d; ++j) iqr += interquartile_range(column_of(p.test_set.Y, j));
    p.iqr_scale = iqr / d;
    return p;
}

double median_vec(std::vector<double> v) { return median_of(std::move(v)); }

// ---- criterion 1: per-step circuit count is exactly 2*G*n_b, independent of d ----

CriterionResult criterion_1() {
    CriterionResult res;
    for (const int n_b : {24, 128}) {
        std::vector<std::uint64_t> counts;
        for (const int d : {12, 25, 48}) {
            for (const int B : {1, 2, 5}) {
                RunConfig cfg;
                cfg.d = d;
                cfg.b = (d + B - 1) / B;
                cfg.n_b = n_b;
                cfg.N_s = 8;
                cfg.T = 1;
                cfg.seed = 5;
                cfg.threads = 2;
                const Dataset ds = synth_showers(ShowerRecipe{}, d, n_b + 8, 5);
                const CircuitSpec spec = make_circuit_spec(cfg.n_q, cfg.L);
                const BlockPartition part = make_partition(cfg.d, cfg.b);
                const SketchComponents comps =
                    make_sketch_components(cfg.d, cfg.m, spec.angle_count(), cfg.seed);
                const SketchCache cache = build_cache(ds.Y, comps.plan, comps.mixer, part);
                const SpsaStepResult step = spsa_step(Vec::Zero(spec.param_count()), 0, cfg, cache,
                                                      ds.Y, part, spec, comps.proj, RffParams{});
                counts.push_back(step.record.circuits);
            }
        }
        const std::uint64_t expected = step_circuit_count(n_b, 2);
        bool all_equal = true;
        for (const auto c : counts) all_equal = all_equal && (c == expected);
        std::ostringstream os;
        os << "measured " << counts.front() << ", expected " << expected << " across "
           << counts.size() << " (d, B) settings";
        res.add("n_b=" + std::to_string(n_b) + " circuits/step == 2*G*n_b, invariant in d and B",
                all_equal, os.str());
    }
    return res;
}

// ---- criterion 2: sketch-noise accumulation bound never violated ----

CriterionResult criterion_2() {
    CriterionResult res;
    const Protocol proto = make_protocol(12);
    RunConfig cfg;
    cfg.threads = 2;
    cfg.seed = 1;
    const TrainResult trained = train(cfg, proto.train_set.Y);
    const auto rows = noise_accumulation_check(trained.bundle, {64, 256, 1024}, 200, 2026);
    for (const auto& row : rows) {
        std::ostringstream os;
        os << "empirical " << fmt_double(row.empirical) << " vs bound " << fmt_double(row.bound)
           << " (ratio " << fmt_double(row.ratio()) << ", w_bar " << fmt_double(row.w_bar) << ")";
        res.add("N_s=" + std::to_string(row.n_shots) + ": E|ds_j| <= d*w*sqrt(p_f/N_s)",
                row.empirical <= row.bound, os.str());
    }
    return res;
}

// ---- criterion 3: count-sketch estimator statistics over 1e4 plans ----

CriterionResult criterion_3() {
    CriterionResult res;
    const int d = 12;
    Rng rng = Rng(2027).derived(0xace);
    Vec y(d), yp(d);
    for (int i = 0; i < d; ++i) {
        y[i] = rng.normal();
        yp[i] = rng.normal();
    }
    const double truth = y.dot(yp);
    for (const int m : {8, 32}) {
        std::vector<double> est(10000);
        for (int p = 0; p < 10000; ++p)
            est[static_cast<std::size_t>(p)] =
                inner_product_estimate(new_sketch_plan(d, m, 90000 + p), y, yp);
        const double mean = oracle::mean_of(est);
        const double var = oracle::variance_of(est);
        const double sigma_mean = std::sqrt(var / 10000.0);
        const double bound = 4.0 * y.squaredNorm() * yp.squaredNorm() / m;
        std::ostringstream os;
        os << "mean " << fmt_double(mean) << " vs true " << fmt_double(truth) << " (3sigma "
           << fmt_double(3 * sigma_mean) << "); var " << fmt_double(var) << " <= " << fmt_double(bound)
           << "; fitted C = " << fmt_double(var * m / (y.squaredNorm() * yp.squaredNorm()));
        res.add("m=" + std::to_string(m) + ": unbiased within 3 sigma and variance <= 4|y|^2|y'|^2/m",
                std::abs(mean - truth) <= 3.0 * sigma_mean && var <= bound, os.str());
    }
    return res;
}

// ---- criterion 4: feature counts and measurement groups ----

CriterionResult criterion_4() {
    CriterionResult res;
    const int nq[5] = {3, 5, 6, 8, 10};
    const int pf[5] = {12, 30, 42, 72, 110};
    bool counts_ok = true;
    for (int i = 0; i < 5; ++i) counts_ok = counts_ok && (feature_count(nq[i]) == pf[i]);
    res.add("p_f = n_q^2 + n_q for n_q in {3,5,6,8,10}", counts_ok,
            "expected {12,30,42,72,110}");
    bool groups_ok = true;
    for (int i = 0; i < 5; ++i)
        groups_ok = groups_ok && (measurement_groups(make_circuit_spec(nq[i], 1)) == 2);
    res.add("measurement groups == 2 for every n_q", groups_ok);
    return res;
}

// ---- criterion 5: capacity heuristic tables ----

CriterionResult criterion_5() {
    CriterionResult res;
    const int nq[5] = {3, 5, 6, 8, 10};
    const int bmax[5] = {8, 20, 28, 48, 73};
    const int b6480[5] = {810, 324, 232, 135, 89};
    const int b40500[5] = {5063, 2025, 1447, 844, 553};
    bool ok = true;
    for (int i = 0; i < 5; ++i) {
        ok = ok && (b_max(nq[i], 1.5) == bmax[i]);
        ok = ok && (B_min(6480, nq[i], 1.5) == b6480[i]);
        ok = ok && (B_min(40500, nq[i], 1.5) == b40500[i]);
    }
    res.add("b_max rows for n_q in {3,5,6,8,10}", ok, "{8,20,28,48,73}");
    bool rows_ok = B_min(12, 3, 1.5) == 2 && B_min(368, 5, 1.5) == 19 && B_min(533, 6, 1.5) == 20 &&
                   B_min(6480, 8, 1.5) == 135 && B_min(40500, 10, 1.5) == 553;
    res.add("B_min design points (12,3)=2 (368,5)=19 (533,6)=20 (6480,8)=135 (40500,10)=553", rows_ok);
    return res;
}

// ---- criterion 6: device-fidelity estimates to two decimals ----

CriterionResult criterion_6() {
    CriterionResult res;
    const int nq[4] = {3, 5, 8, 10};
    const double expected[4] = {0.94, 0.90, 0.85, 0.82};
    for (int i = 0; i < 4; ++i) {
        const double f = fidelity_estimate(nq[i], 5e-3, 1e-2);
        const double rounded = std::round(f * 100.0) / 100.0;
        std::ostringstream os;
        os << "F = " << fmt_double(f) << " -> " << rounded;
        res.add("n_q=" + std::to_string(nq[i]) + " fidelity rounds to " + fmt_double(expected[i]),
                std::abs(rounded - expected[i]) < 1e-9, os.str());
    }
    return res;
}

// ---- criterion 7: statevector oracle equivalence and shot convergence ----

CriterionResult criterion_7() {
    CriterionResult res;
    Rng rng(2028);
    double worst = 0.0;
    for (const int n_q : {1, 2, 3, 4}) {
        const CircuitSpec spec = make_circuit_spec(n_q, 2);
        for (int rep = 0; rep < 100; ++rep) {
            Vec a(spec.angle_count()), theta(spec.param_count());
            for (int i = 0; i < a.size(); ++i) a[i] = rng.uniform();
            for (int i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-M_PI, M_PI);
            const CVec got = build_state(spec, a, theta);
            const CVec want = oracle::circuit_state(n_q, 2, a, theta);
            worst = std::max(worst, (got - want).lpNorm<Eigen::Infinity>());
        }
    }
    res.add("build_state matches the dense unitary-product oracle (100 draws, n_q 1..4)",
            worst < 1e-10, "worst amplitude deviation " + fmt_double(worst));

    const CircuitSpec spec = make_circuit_spec(3, 2);
    Vec a(spec.angle_count()), theta(spec.param_count());
    for (int i = 0; i < a.size(); ++i) a[i] = rng.uniform();
    for (int i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-M_PI, M_PI);
    const CVec psi = build_state(spec, a, theta);
    const Vec exact = exact_features(spec, psi);
    std::vector<double> log_ns, log_rms;
    for (int p = 6; p <= 14; ++p) {
        const int n_shots = 1 << p;
        double acc = 0.0;
        const int reps = 32;
        for (int r = 0; r < reps; ++r) {
            Rng srng = rng.derived(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(r));
            acc += (sampled_features(spec, psi, n_shots, srng) - exact).squaredNorm();
        }
        log_ns.push_back(std::log2(static_cast<double>(n_shots)));
        log_rms.push_back(std::log2(std::sqrt(acc / (reps * 12.0))));
    }
    const double slope = oracle::slope_of(log_ns, log_rms);
    res.add("sampled-feature RMS error slope is -0.5 +- 0.1 on log N_s",
            std::abs(slope + 0.5) <= 0.1, "fitted slope " + fmt_double(slope));
    return res;
}

// ---- criterion 8: end-to-end training quality, seed-median of five ----

CriterionResult criterion_8() {
    CriterionResult res;
    const Protocol proto = make_protocol(12);
    std::vector<double> ratios, w1s, dcs, ew1s;
    std::vector<int> sign_mismatches;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RunConfig cfg; // Table-2 simulator budget: T=120, n_b=128, N_s=512
        cfg.seed = seed;
        cfg.threads = 2;
        const TrainResult trained = train(cfg, proto.train_set.Y);
        ratios.push_back(trained.initial_mmd2 / trained.final_mmd2);
        const Mat gen = generate_batch(trained.bundle, 16000, cfg.N_s, seed * 7919, true, false, 2);
        const MetricsReport rep = evaluate_samples(proto.test_set.Y, gen, trained.bundle.part);
        w1s.push_back(rep.w1_mean);
        dcs.push_back(rep.corr_error_fro_over_d);
        ew1s.push_back(rep.energy.w1);
        int mism = 0;
        for (int i = 0; i < 12; ++i)
            for (int j = i + 1; j < 12; ++j)
                if (std::abs(rep.corr_truth(i, j)) > 0.3 &&
                    rep.corr_truth(i, j) * rep.corr_gen(i, j) <= 0.0)
                    ++mism;
        sign_mismatches.push_back(mism);
    }
    const double med_ratio = median_vec(ratios);
    const double med_w1 = median_vec(w1s);
    const double med_dc = median_vec(dcs);
    const double med_ew1 = median_vec(ew1s);
    std::vector<double> mism_d(sign_mismatches.begin(), sign_mismatches.end());
    const double med_mism = median_vec(mism_d);

    res.add("(a) training MMD^2 reduced by >= 5x (seed median)", med_ratio >= 5.0,
            "median reduction " + fmt_double(med_ratio) + "x");
    res.add("(b) mean per-pixel W1 <= 3% of per-pixel IQR scale", med_w1 <= 0.03 * proto.iqr_scale,
            "median " + fmt_double(med_w1) + " vs threshold " + fmt_double(0.03 * proto.iqr_scale));
    res.add("(c) |dC|_F/d <= 0.08", med_dc <= 0.08, "median " + fmt_double(med_dc));
    res.add("(d) sign pattern reproduced on all |r| > 0.3 entries", med_mism == 0.0,
            "median mismatches " + fmt_double(med_mism));
    res.add("(e) total-energy W1 <= 2 * mean-pixel-W1 * d", med_ew1 <= 2.0 * med_w1 * 12.0,
            "median " + fmt_double(med_ew1) + " vs cap " + fmt_double(2.0 * med_w1 * 12.0));
    return res;
}

// ---- criterion 9: ablation orderings, seed-median of five ----

CriterionResult criterion_9() {
    CriterionResult res;
    const Protocol proto = make_protocol(12);
    RunConfig base;
    base.threads = 2;
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    const int n_gen = 4000;

    const auto median_for = [](const std::vector<AblationSummary>& summary, const std::string& cell) {
        for (const auto& s : summary)
            if (s.cell == cell) return std::pair<double, double>{s.w1_median, s.corr_median};
        throw internal_error("ablation cell missing: " + cell);
    };

    {
        const auto summary = summarize_ablation(
            run_ablation_suite("weight2", base, proto.train_set.Y, proto.test_set.Y, seeds, n_gen, 2));
        const auto [w1_w1only, dc_w1only] = median_for(summary, "weight1_only");
        const auto [w1_full, dc_full] = median_for(summary, "weight1+2");
        std::ostringstream os;
        os << "weight1+2 W1 " << fmt_double(w1_full) << " vs weight1 " << fmt_double(w1_w1only)
           << "; dC " << fmt_double(dc_full) << " vs " << fmt_double(dc_w1only);
        res.add("weight-1+2 strictly better than weight-1-only on both metrics",
                w1_full < w1_w1only && dc_full < dc_w1only, os.str());
    }
    {
        const auto summary = summarize_ablation(
            run_ablation_suite("blocksize", base, proto.train_set.Y, proto.test_set.Y, seeds, n_gen, 2));
        const auto [w1_3, dc_3] = median_for(summary, "b3");
        const auto [w1_4, dc_4] = median_for(summary, "b4");
        const auto [w1_6, dc_6] = median_for(summary, "b6");
        const auto [w1_12, dc_12] = median_for(summary, "b12");
        std::ostringstream os;
        os << "W1 medians b3/b4/b6/b12 = " << fmt_double(w1_3) << "/" << fmt_double(w1_4) << "/"
           << fmt_double(w1_6) << "/" << fmt_double(w1_12) << "; dC = " << fmt_double(dc_3) << "/"
           << fmt_double(dc_4) << "/" << fmt_double(dc_6) << "/" << fmt_double(dc_12);
        const bool worst = w1_12 > w1_3 && w1_12 > w1_4 && w1_12 > w1_6 && dc_12 > dc_3 &&
                           dc_12 > dc_4 && dc_12 > dc_6;
        res.add("b=12 (rho=1.0) strictly worst in the block-size sweep", worst, os.str());
    }
    {
        const auto summary = summarize_ablation(
            run_ablation_suite("rff", base, proto.train_set.Y, proto.test_set.Y, seeds, n_gen, 2));
        const auto [w1_q, dc_q] = median_for(summary, "quantum_p12");
        const auto [w1_r12, dc_r12] = median_for(summary, "rff_p12");
        const auto [w1_r72, dc_r72] = median_for(summary, "rff_p72");
        {
            std::ostringstream os;
            os << "quantum W1 " << fmt_double(w1_q) << " vs rff12 W1 " << fmt_double(w1_r12)
               << " (dC " << fmt_double(dc_q) << " vs " << fmt_double(dc_r12) << ")";
            res.add("quantum p_f=12 strictly better than RFF p_f=12 on mean W1", w1_q < w1_r12,
                    os.str());
        }
        {
            std::ostringstream os;
            os << "rff72 W1 " << fmt_double(w1_r72) << " vs 1.5 * quantum W1 "
               << fmt_double(1.5 * w1_q) << " (dC " << fmt_double(dc_r72) << ")";
            res.add("RFF p_f=72 within 1.5x of quantum-12 on mean W1", w1_r72 <= 1.5 * w1_q, os.str());
        }
    }
    return res;
}

// ---- criterion 10: d=25 appendix replication ----

CriterionResult criterion_10() {
    CriterionResult res;
    const Dataset all = synth_showers(ShowerRecipe{}, 25, 7000, kDatasetSeed);
    auto [train_set, test_set] = split(all, 6000, 1000, kDatasetSeed);
    std::vector<double> spearmans;
    bool completed = true;
    bool params_ok = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RunConfig cfg = default_config_d25();
        cfg.seed = seed;
        cfg.threads = 2;
        const TrainResult trained = train(cfg, train_set.Y);
        params_ok = params_ok && trained.bundle.theta.size() == 18 && trained.bundle.part.B == 5;
        const Mat gen = generate_batch(trained.bundle, 8000, cfg.N_s, seed * 104729, true, false, 2);
        const MetricsReport rep = evaluate_samples(test_set.Y, gen, trained.bundle.part);
        if (rep.boundary_profile.size() != 4) {
            completed = false;
            break;
        }
        std::vector<double> idx{1, 2, 3, 4};
        spearmans.push_back(spearman_rank_corr(rep.boundary_profile, idx));
    }
    res.add("d=25, B=5, L=3 (18 shared parameters) runs complete", completed && params_ok);
    if (completed && !spearmans.empty()) {
        const double med = median_vec(spearmans);
        std::ostringstream os;
        os << "per-seed Spearman:";
        for (double s : spearmans) os << " " << fmt_double(s);
        os << "; median " << fmt_double(med);
        res.add("boundary error shows no monotone growth (median Spearman <= 0.5)", med <= 0.5,
                os.str());
    }
    return res;
}

// ---- criterion 11: byte-identical reruns of every command ----

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("missing artifact: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

// history.jsonl carries wall times; strip them before comparing.
std::string strip_wall(const std::string& text) {
    std::istringstream is(text);
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line)) {
        const auto pos = line.find(",\"wall_ms\":");
        if (pos != std::string::npos) {
            const auto end = line.find_first_of(",}", pos + 11);
            line = line.substr(0, pos) + line.substr(end);
        }
        os << line << '\n';
    }
    return os.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QFAN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

CriterionResult criterion_11() {
    CriterionResult res;
    const fs::path root = fs::temp_directory_path() / "qfan_acceptance_det";
    fs::remove_all(root);
    fs::create_directories(root);
    const auto p = [&root](const std::string& name) { return (root / name).string(); };

    RunConfig tiny;
    tiny.T = 3;
    tiny.n_b = 8;
    tiny.N_s = 8;
    tiny.threads = 2;
    {
        std::ofstream f(p("run.cfg"));
        f << serialize_config(tiny);
    }

    const auto compare_twice = [&](const std::string& label, const std::string& args,
                                   const std::vector<std::string>& artifacts, bool strip_wall_times) {
        std::vector<std::string> first;
        if (run_cli(args) != 0) {
            res.add(label, false, "command failed on first run");
            return;
        }
        for (const auto& a : artifacts) first.push_back(read_file(p(a)));
        if (run_cli(args) != 0) {
            res.add(label, false, "command failed on second run");
            return;
        }
        bool same = true;
        for (std::size_t i = 0; i < artifacts.size(); ++i) {
            std::string again = read_file(p(artifacts[i]));
            std::string before = first[i];
            if (strip_wall_times && artifacts[i].find("history") != std::string::npos) {
                again = strip_wall(again);
                before = strip_wall(before);
            }
            same = same && (again == before);
        }
        res.add(label, same, same ? "" : "artifact bytes differ between reruns");
    };

    compare_twice("gen-data rerun is byte identical",
                  "gen-data --d 12 --n 80 --seed 3 --out " + p("data.qfds") + " --csv " + p("data.csv"),
                  {"data.qfds", "data.csv", "data.qfds.meta.json"}, false);
    compare_twice("train rerun is byte identical (wall times excluded)",
                  "train --data " + p("data.qfds") + " --config " + p("run.cfg") + " --out " + p("bundle"),
                  {"bundle/theta.txt", "bundle/decoder_000.txt", "bundle/decoder_001.txt",
                   "bundle/bank_000.txt", "bundle/gate_000.txt", "bundle/config.txt",
                   "bundle/history.jsonl", "bundle/train_summary.json"},
                  true);
    compare_twice("generate rerun is byte identical",
                  "generate --bundle " + p("bundle") + " --n 20 --seed 4 --out " + p("gen.qfds"),
                  {"gen.qfds", "gen.qfds.meta.json"}, false);
    compare_twice("evaluate rerun is byte identical",
                  "evaluate --truth " + p("data.qfds") + " --gen " + p("gen.qfds") +
                      " --blocks 2 --out " + p("report.json") + " --csv-dir " + p("csv"),
                  {"report.json", "csv/marginals.csv", "csv/corr_diff.csv", "csv/energy_sum.csv"}, false);
    compare_twice("scale-table rerun is byte identical", "scale-table --out " + p("scale.csv"),
                  {"scale.csv"}, false);
    compare_twice("theory-check rerun is byte identical",
                  "theory-check --suite ridge --seed 9 --out " + p("ridge.json"), {"ridge.json"}, false);
    fs::remove_all(root);
    return res;
}

using CriterionFn = std::function<CriterionResult()>;

struct Criterion {
    int id;
    const char* title;
    CriterionFn fn;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    }

    const std::vector<Criterion> criteria{
        {1, "per-step circuit count (Theorem-1 accounting)", criterion_1},
        {2, "sketch-noise accumulation bound", criterion_2},
        {3, "count-sketch estimator statistics", criterion_3},
        {4, "feature counts and measurement groups", criterion_4},
        {5, "decoder-capacity heuristic tables", criterion_5},
        {6, "device-fidelity estimates", criterion_6},
        {7, "statevector oracle equivalence and shot convergence", criterion_7},
        {8, "end-to-end training quality (d=12)", criterion_8},
        {9, "ablation orderings", criterion_9},
        {10, "d=25 five-block replication", criterion_10},
        {11, "byte-identical command reruns", criterion_11},
    };

    int failures = 0;
    for (const auto& crit : criteria) {
        if (only != 0 && crit.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult result;
        try {
            result = crit.fn();
        } catch (const std::exception& e) {
            result.ok = false;
            result.add("exception", false, e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s (%.1fs)\n", result.ok ? "PASS" : "FAIL", crit.id,
                    crit.title, secs);
        for (const auto& check : result.checks) {
            std::printf("        %s %s%s%s\n", check.ok ? "+" : "-", check.label.c_str(),
                        check.detail.empty() ? "" : " :: ", check.detail.c_str());
        }
        if (!result.ok) ++failures;
    }
    return failures;
}
