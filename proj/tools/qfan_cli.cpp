// qfan: batch command-line surface for the QFAN pipeline.
//
// Subcommands: gen-data, train, generate, evaluate, ablate, theory-check,
// scale-table. Every command is deterministic given its flags; all
// randomness sits behind --seed. Exit codes: 0 success, 1 usage error,
// 2 validation failure, 3 internal invariant violation.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfan/qfan.hpp"

namespace {

using namespace qfan;

std::string resolve_out(const std::string& flag, const std::string& fallback_name) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("QFAN_OUT"))
        return std::string(env) + "/" + fallback_name;
    return fallback_name;
}

ShowerRecipe load_recipe(const std::string& path) {
    if (path.empty()) return ShowerRecipe{};
    std::ifstream is(path);
    if (!is) throw data_error("cannot open recipe: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    ShowerRecipe r;
    std::map<std::string, std::string> kv;
    std::istringstream text(buf.str());
    std::string line;
    while (std::getline(text, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw data_error("recipe: expected 'key = value' lines");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto take = [&kv](const char* key, double& dst) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        dst = std::stod(it->second);
        kv.erase(it);
    };
    auto schema = kv.find("schema");
    if (schema == kv.end() || schema->second != "qfan-recipe-v1")
        throw data_error("recipe: missing or unsupported schema (want qfan-recipe-v1)");
    kv.erase(schema);
    take("energy_mean", r.energy_mean);
    take("energy_spread", r.energy_spread);
    take("energy_skew", r.energy_skew);
    take("profile_shape", r.profile_shape);
    take("pixel_fluct", r.pixel_fluct);
    take("half_coupling", r.half_coupling);
    if (!kv.empty()) throw data_error("recipe: unknown key '" + kv.begin()->first + "'");
    validate_recipe(r);
    return r;
}

json recipe_to_json(const ShowerRecipe& r) {
    json j;
    j["energy_mean"] = r.energy_mean;
    j["energy_spread"] = r.energy_spread;
    j["energy_skew"] = r.energy_skew;
    j["profile_shape"] = r.profile_shape;
    j["pixel_fluct"] = r.pixel_fluct;
    j["half_coupling"] = r.half_coupling;
    return j;
}

int cmd_gen_data(int d, int n, std::uint64_t seed, const std::string& recipe_path,
                 const std::string& out_flag, const std::string& csv_out) {
    const ShowerRecipe recipe = load_recipe(recipe_path);
    const std::string out = resolve_out(out_flag, "dataset.qfds");
    const Dataset ds = synth_showers(recipe, d, n, seed);
    save_dataset(ds, out);
    if (!csv_out.empty()) save_dataset_csv(ds, csv_out);
    json meta;
    meta["schema"] = "qfan-dataset-meta-v1";
    meta["d"] = d;
    meta["n"] = n;
    meta["seed"] = seed;
    meta["recipe"] = recipe_to_json(recipe);
    meta["file"] = out;
    write_json_file(meta, out + ".meta.json");
    std::cout << "wrote " << out << " (" << n << " x " << d << ")\n";
    return 0;
}

Dataset load_any_dataset(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") return load_dataset_csv(path);
    return load_dataset(path);
}

int cmd_train(const std::string& data_path, const std::string& config_path,
              const std::string& out_flag, bool exact, int threads, std::int64_t seed_override) {
    RunConfig cfg = config_path.empty() ? default_config_d12() : load_config(config_path);
    if (exact) cfg.exact = true;
    if (threads > 0) cfg.threads = threads;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    const Dataset data = load_any_dataset(data_path);
    if (data.d() != cfg.d)
        throw value_error("train: dataset width " + std::to_string(data.d()) +
                          " does not match config d " + std::to_string(cfg.d));
    const std::string out = resolve_out(out_flag, "bundle");
    const TrainResult res = train(cfg, data.Y);
    save_bundle(res.bundle, out);
    write_history_jsonl(res.history, out + "/history.jsonl");

    // Converged blockwise MMD^2 with a bootstrap CI on the teacher-forced
    // predictions, reported per the evaluation protocol.
    double mmd_value = 0.0, mmd_ci = 0.0;
    for (int beta = 0; beta < res.bundle.part.B; ++beta) {
        const Mat Yb = data.Y.middleCols(res.bundle.part.start(beta), res.bundle.part.width(beta));
        const Mat Pb = res.final_train_predictions.middleCols(res.bundle.part.start(beta),
                                                              res.bundle.part.width(beta));
        const Mmd2WithCI ci = mmd2_bootstrap_ci(Yb, Pb, median_bandwidth(Yb.topRows(std::min<int>(500, Yb.rows()))),
                                                1000, cfg.seed + static_cast<std::uint64_t>(beta));
        mmd_value += ci.value / res.bundle.part.B;
        mmd_ci += ci.ci_halfwidth / res.bundle.part.B;
    }

    json summary;
    summary["schema"] = "qfan-train-summary-v1";
    summary["initial_mmd2"] = res.initial_mmd2;
    summary["final_mmd2"] = res.final_mmd2;
    summary["mmd2_blockwise"] = mmd_value;
    summary["mmd2_bootstrap_ci_halfwidth"] = mmd_ci;
    summary["n_boot"] = 1000;
    summary["step_circuits_total"] = res.step_circuits_total;
    summary["step_shots_total"] = res.step_shots_total;
    summary["expected_step_circuits_total"] =
        total_circuit_count(cfg.T, cfg.n_b, measurement_groups(res.bundle.spec));
    summary["refit_circuits"] = res.refit_circuits;
    summary["theta_hash"] = theta_hash(res.bundle.theta);
    summary["bundle_hash"] = bundle_hash(res.bundle);
    summary["decoder_gain_max"] = res.bundle.max_decoder_gain();
    write_json_file(summary, out + "/train_summary.json");

    std::cout << "final MMD^2 (blockwise, teacher-forced) = " << fmt_double(mmd_value)
              << " +- " << fmt_double(mmd_ci) << " (95% bootstrap CI, n_boot=1000)\n";
    std::cout << "training objective snapshot: initial " << fmt_double(res.initial_mmd2)
              << " -> final " << fmt_double(res.final_mmd2) << "\n";
    std::cout << "ledger: " << res.step_circuits_total << " step circuits (expected "
              << total_circuit_count(cfg.T, cfg.n_b, measurement_groups(res.bundle.spec)) << ")\n";
    std::cout << "bundle written to " << out << "\n";
    return 0;
}

int cmd_generate(const std::string& bundle_dir, int n, std::uint64_t seed,
                 const std::string& out_flag, bool no_residuals, bool exact, int shots,
                 int threads) {
    const ModelBundle bundle = load_bundle(bundle_dir);
    const int n_shots = shots > 0 ? shots : bundle.config.N_s;
    const std::string out = resolve_out(out_flag, "generated.qfds");
    const Mat gen = generate_batch(bundle, n, n_shots, seed, !no_residuals, exact,
                                   threads > 0 ? threads : bundle.config.threads);
    Dataset ds;
    ds.Y = gen;
    ds.seed = seed;
    save_dataset(ds, out);
    json prov;
    prov["schema"] = "qfan-generate-provenance-v1";
    prov["bundle_hash"] = bundle_hash(bundle);
    prov["seed"] = seed;
    prov["n"] = n;
    prov["N_s"] = n_shots;
    prov["residuals"] = !no_residuals;
    prov["exact"] = exact;
    write_json_file(prov, out + ".meta.json");
    std::cout << "wrote " << out << " (" << n << " x " << bundle.part.d << ")\n";
    return 0;
}

int cmd_evaluate(const std::string& truth_path, const std::string& gen_path, int blocks,
                 const std::string& out_flag, const std::string& csv_dir) {
    const Dataset truth = load_any_dataset(truth_path);
    const Dataset gen = load_any_dataset(gen_path);
    if (truth.d() != gen.d()) throw value_error("evaluate: width mismatch between truth and gen");
    if (blocks < 1 || blocks > truth.d()) throw value_error("evaluate: invalid block count");
    const int b = (truth.d() + blocks - 1) / blocks;
    const BlockPartition part = make_partition(truth.d(), b);
    const MetricsReport rep = evaluate_samples(truth.Y, gen.Y, part);
    const std::string out = resolve_out(out_flag, "report.json");
    json j = report_to_json(rep);
    j["blocks"] = {{"B", part.B}, {"b", part.b}};
    write_json_file(j, out);
    if (!csv_dir.empty()) {
        std::filesystem::create_directories(csv_dir);
        write_marginals_csv(truth.Y, gen.Y, csv_dir + "/marginals.csv");
        write_matrix_csv(rep.corr_truth, csv_dir + "/corr_truth.csv");
        write_matrix_csv(rep.corr_gen, csv_dir + "/corr_gen.csv");
        write_matrix_csv(rep.corr_truth - rep.corr_gen, csv_dir + "/corr_diff.csv");
        write_energy_csv(truth.Y, gen.Y, csv_dir + "/energy_sum.csv");
    }
    std::cout << "w1 mean/median/max = " << fmt_double(rep.w1_mean) << " / "
              << fmt_double(rep.w1_median) << " / " << fmt_double(rep.w1_max) << "\n";
    std::cout << "corr error |dC|_F/d = " << fmt_double(rep.corr_error_fro_over_d) << "\n";
    std::cout << "energy W1 = " << fmt_double(rep.energy.w1) << "\n";
    if (!rep.boundary_profile.empty()) {
        std::cout << "boundary profile:";
        for (double v : rep.boundary_profile) std::cout << " " << fmt_double(v);
        std::cout << "\n";
    }
    std::cout << "report written to " << out << "\n";
    return 0;
}

int cmd_ablate(const std::string& suite, const std::string& data_path,
               const std::string& config_path, int n_seeds, int n_gen, int n_test,
               const std::string& out_flag, int threads) {
    RunConfig base = config_path.empty() ? default_config_d12() : load_config(config_path);
    if (threads > 0) base.threads = threads;
    const Dataset data = load_any_dataset(data_path);
    const int n_train = data.n() - n_test;
    if (n_train < base.n_b) throw value_error("ablate: dataset too small for the configured split");
    auto [train_ds, test_ds] = split(data, n_train, n_test, base.seed);

    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < n_seeds; ++s) seeds.push_back(base.seed + static_cast<std::uint64_t>(s));
    const std::vector<AblationResult> results =
        run_ablation_suite(suite, base, train_ds.Y, test_ds.Y, seeds, n_gen, base.threads);
    const std::vector<AblationSummary> summary = summarize_ablation(results);

    const std::string out = resolve_out(out_flag, "ablation_" + suite);
    std::filesystem::create_directories(out);
    {
        std::ofstream os(out + "/results.csv", std::ios::trunc);
        os << "cell,p_f,b,seed,w1_mean,corr_err\n";
        for (const auto& r : results)
            os << r.cell << ',' << r.p_f << ',' << r.b << ',' << r.seed << ','
               << fmt_double(r.w1_mean) << ',' << fmt_double(r.corr_err) << '\n';
    }
    {
        std::ofstream os(out + "/summary.csv", std::ios::trunc);
        os << "cell,p_f,b,w1_median,corr_err_median\n";
        for (const auto& s : summary)
            os << s.cell << ',' << s.p_f << ',' << s.b << ',' << fmt_double(s.w1_median) << ','
               << fmt_double(s.corr_median) << '\n';
    }
    json j;
    j["schema"] = "qfan-ablation-v1";
    j["suite"] = suite;
    j["seeds"] = seeds;
    for (const auto& s : summary) {
        json row;
        row["cell"] = s.cell;
        row["p_f"] = s.p_f;
        row["b"] = s.b;
        row["w1_median"] = s.w1_median;
        row["corr_err_median"] = s.corr_median;
        j["cells"].push_back(row);
    }
    write_json_file(j, out + "/summary.json");
    std::cout << "cell                p_f   b   W1(med)     |dC|F/d(med)\n";
    for (const auto& s : summary) {
        std::printf("%-18s %4d %3d   %-11.5g %-11.5g\n", s.cell.c_str(), s.p_f, s.b, s.w1_median,
                    s.corr_median);
    }
    std::cout << "ablation artifacts in " << out << "\n";
    return 0;
}

int theory_sketch(std::uint64_t seed, json& out) {
    const int d = 12;
    const int n_plans = 10000;
    Rng rng = Rng(seed).derived(0x7411ULL);
    Vec y(d), yp(d);
    for (int i = 0; i < d; ++i) {
        y[i] = rng.normal();
        yp[i] = rng.normal();
    }
    const double truth = y.dot(yp);
    bool all_ok = true;
    for (const int m : {8, 32}) {
        double mean = 0.0, m2 = 0.0;
        for (int p = 0; p < n_plans; ++p) {
            const SketchPlan plan = new_sketch_plan(d, m, seed * 131071ULL + static_cast<std::uint64_t>(p));
            const double est = inner_product_estimate(plan, y, yp);
            const double delta = est - mean;
            mean += delta / (p + 1);
            m2 += delta * (est - mean);
        }
        const double var = m2 / (n_plans - 1);
        const double sigma_mean = std::sqrt(var / n_plans);
        const double var_bound = 4.0 * y.squaredNorm() * yp.squaredNorm() / m;
        const double fitted_c = var * m / (y.squaredNorm() * yp.squaredNorm());
        const bool mean_ok = std::abs(mean - truth) <= 3.0 * sigma_mean;
        const bool var_ok = var <= var_bound;
        all_ok = all_ok && mean_ok && var_ok;
        json row;
        row["m"] = m;
        row["true_inner_product"] = truth;
        row["mean_estimate"] = mean;
        row["mean_within_3sigma"] = mean_ok;
        row["empirical_variance"] = var;
        row["variance_bound_C4"] = var_bound;
        row["fitted_C"] = fitted_c;
        row["variance_ok"] = var_ok;
        out["rows"].push_back(row);
        std::printf("m=%2d  mean %.5f (true %.5f, 3sigma %.5f)  var %.5f <= %.5f  C=%.3f  %s\n", m,
                    mean, truth, 3.0 * sigma_mean, var, var_bound, fitted_c,
                    mean_ok && var_ok ? "ok" : "VIOLATION");
    }
    return all_ok ? 0 : 2;
}

int theory_noise(const std::string& bundle_dir, std::uint64_t seed, json& out) {
    if (bundle_dir.empty()) throw value_error("theory-check noise: --bundle is required");
    const ModelBundle bundle = load_bundle(bundle_dir);
    const auto rows = noise_accumulation_check(bundle, {64, 256, 1024}, 200, seed);
    bool all_ok = true;
    std::printf("%8s %14s %14s %8s\n", "N_s", "empirical", "bound", "ratio");
    for (const auto& r : rows) {
        const bool ok = r.empirical <= r.bound;
        all_ok = all_ok && ok;
        std::printf("%8d %14.6g %14.6g %8.4f %s\n", r.n_shots, r.empirical, r.bound, r.ratio(),
                    ok ? "" : "VIOLATION");
        json row;
        row["N_s"] = r.n_shots;
        row["empirical_max_mean_abs_ds"] = r.empirical;
        row["bound"] = r.bound;
        row["w_bar"] = r.w_bar;
        row["ok"] = ok;
        out["rows"].push_back(row);
    }
    return all_ok ? 0 : 2;
}

int theory_counts(std::uint64_t seed, json& out) {
    bool all_ok = true;
    for (const int d : {12, 25, 48}) {
        for (const int B : {1, 2, 5}) {
            for (const int n_b : {24, 128}) {
                RunConfig cfg;
                cfg.d = d;
                cfg.b = (d + B - 1) / B;
                cfg.n_b = n_b;
                cfg.N_s = 8;
                cfg.T = 1;
                cfg.seed = seed;
                const Dataset ds = synth_showers(ShowerRecipe{}, d, n_b + 8, seed);
                const CircuitSpec spec = make_circuit_spec(cfg.n_q, cfg.L);
                const BlockPartition part = make_partition(cfg.d, cfg.b);
                const SketchComponents comps =
                    make_sketch_components(cfg.d, cfg.m, spec.angle_count(), cfg.seed);
                const SketchCache cache = build_cache(ds.Y, comps.plan, comps.mixer, part);
                Vec theta = Vec::Zero(spec.param_count());
                const SpsaStepResult step =
                    spsa_step(theta, 0, cfg, cache, ds.Y, part, spec, comps.proj, RffParams{});
                const std::uint64_t expected = step_circuit_count(n_b, measurement_groups(spec));
                const bool ok = step.record.circuits == expected;
                all_ok = all_ok && ok;
                json row;
                row["d"] = d;
                row["B_requested"] = B;
                row["B_actual"] = part.B;
                row["n_b"] = n_b;
                row["circuits_per_step"] = step.record.circuits;
                row["expected"] = expected;
                row["ok"] = ok;
                out["rows"].push_back(row);
                std::printf("d=%2d B=%d n_b=%3d  circuits/step=%llu expected=%llu %s\n", d, part.B,
                            n_b, static_cast<unsigned long long>(step.record.circuits),
                            static_cast<unsigned long long>(expected), ok ? "" : "VIOLATION");
            }
        }
    }
    return all_ok ? 0 : 2;
}

int theory_ridge(std::uint64_t seed, json& out) {
    Rng rng = Rng(seed).derived(0x41d6eULL);
    bool all_ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 4 + static_cast<int>(rng.below(60));
        const int p = 2 + static_cast<int>(rng.below(16));
        const int b = 1 + static_cast<int>(rng.below(8));
        Mat F(n, p), Y(n, b);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) F(i, j) = rng.normal();
            for (int j = 0; j < b; ++j) Y(i, j) = rng.normal();
        }
        const double alpha = std::pow(10.0, rng.uniform(-6.0, 1.0));
        const WeightNormBound chk = weight_norm_bound_check(F, Y, alpha);
        all_ok = all_ok && chk.holds;
        if (chk.rhs > 0.0) worst = std::max(worst, chk.lhs / chk.rhs);
    }
    out["trials"] = 1000;
    out["bound_held_always"] = all_ok;
    out["worst_lhs_over_rhs"] = worst;
    std::printf("decoder-gain bound |W|_F <= |Y|_F/(2 sqrt(alpha)): %s (worst ratio %.4f)\n",
                all_ok ? "held on 1000/1000 random instances" : "VIOLATED", worst);
    return all_ok ? 0 : 2;
}

int cmd_theory(const std::string& suite, const std::string& bundle_dir, std::uint64_t seed,
               const std::string& out_flag) {
    json out;
    out["schema"] = "qfan-theory-check-v1";
    out["suite"] = suite;
    out["seed"] = seed;
    int rc = 0;
    if (suite == "sketch") rc = theory_sketch(seed, out);
    else if (suite == "noise") rc = theory_noise(bundle_dir, seed, out);
    else if (suite == "counts") rc = theory_counts(seed, out);
    else if (suite == "ridge") rc = theory_ridge(seed, out);
    else throw value_error("theory-check: unknown suite '" + suite + "'");
    out["passed"] = (rc == 0);
    const std::string out_path = resolve_out(out_flag, "theory_" + suite + ".json");
    write_json_file(out, out_path);
    std::cout << (rc == 0 ? "PASS" : "FAIL") << " (details in " << out_path << ")\n";
    return rc;
}

int cmd_scale_table(std::vector<int> d_list, std::vector<int> nq_list, double rho_min,
                    const std::string& out_flag) {
    if (d_list.empty()) {
        // Published design points.
        d_list = {12, 368, 533, 6480, 40500};
        nq_list = {3, 5, 6, 8, 10};
    }
    if (nq_list.size() != d_list.size())
        throw value_error("scale-table: --d and --nq need the same number of entries");
    const auto rows = scaling_table(d_list, nq_list, rho_min);
    const std::string out = resolve_out(out_flag, "scale_table.csv");
    std::ofstream os(out, std::ios::trunc);
    if (!os) throw data_error("cannot open for write: " + out);
    os << "d,n_q,p_f,b_max,B_min,m,sketch_cache_bytes\n";
    std::printf("%8s %4s %5s %6s %6s %5s %16s\n", "d", "n_q", "p_f", "b_max", "B_min", "m",
                "cache_bytes");
    for (const auto& r : rows) {
        os << r.d << ',' << r.n_q << ',' << r.p_f << ',' << r.b_max << ',' << r.B_min << ',' << r.m
           << ',' << r.cache_bytes << '\n';
        std::printf("%8d %4d %5d %6d %6d %5d %16llu\n", r.d, r.n_q, r.p_f, r.b_max, r.B_min, r.m,
                    static_cast<unsigned long long>(r.cache_bytes));
    }
    std::cout << "table written to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"QFAN: block-autoregressive quantum generative model (simulated)"};
    app.require_subcommand(1);

    // gen-data
    auto* gen_data = app.add_subcommand("gen-data", "synthesize a shower dataset");
    int gd_d = 12, gd_n = 7000;
    std::uint64_t gd_seed = 1;
    std::string gd_recipe, gd_out, gd_csv;
    gen_data->add_option("--d", gd_d, "pixel count");
    gen_data->add_option("--n", gd_n, "sample count");
    gen_data->add_option("--seed", gd_seed, "generator seed");
    gen_data->add_option("--recipe", gd_recipe, "recipe file (qfan-recipe-v1)");
    gen_data->add_option("--out", gd_out, "output dataset path");
    gen_data->add_option("--csv", gd_csv, "also export CSV to this path");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model bundle");
    std::string tr_data, tr_config, tr_out;
    bool tr_exact = false;
    int tr_threads = 0;
    std::int64_t tr_seed = -1;
    train_cmd->add_option("--data", tr_data, "training dataset")->required();
    train_cmd->add_option("--config", tr_config, "run config file (defaults to the d=12 setup)");
    train_cmd->add_option("--out", tr_out, "bundle output directory");
    train_cmd->add_flag("--exact", tr_exact, "use exact expectations instead of shots");
    train_cmd->add_option("--threads", tr_threads, "worker cap");
    train_cmd->add_option("--seed", tr_seed, "override the config seed");

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "free-running rollout from a bundle");
    std::string g_bundle, g_out;
    int g_n = 1000, g_shots = 0, g_threads = 0;
    std::uint64_t g_seed = 1;
    bool g_nores = false, g_exact = false;
    gen_cmd->add_option("--bundle", g_bundle, "bundle directory")->required();
    gen_cmd->add_option("--n", g_n, "number of images");
    gen_cmd->add_option("--seed", g_seed, "generation seed");
    gen_cmd->add_option("--out", g_out, "output dataset path");
    gen_cmd->add_option("--shots", g_shots, "shots per setting (default: config N_s)");
    gen_cmd->add_option("--threads", g_threads, "worker cap");
    gen_cmd->add_flag("--no-residuals", g_nores, "disable the residual sampler");
    gen_cmd->add_flag("--exact", g_exact, "exact expectations instead of shots");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "metrics report for truth vs generated");
    std::string e_truth, e_gen, e_out, e_csv;
    int e_blocks = 2;
    eval_cmd->add_option("--truth", e_truth, "truth dataset")->required();
    eval_cmd->add_option("--gen", e_gen, "generated dataset")->required();
    eval_cmd->add_option("--blocks", e_blocks, "autoregressive block count B");
    eval_cmd->add_option("--out", e_out, "report JSON path");
    eval_cmd->add_option("--csv-dir", e_csv, "emit plot-ready CSVs into this directory");

    // ablate
    auto* abl_cmd = app.add_subcommand("ablate", "run an ablation suite");
    std::string a_suite, a_data, a_config, a_out;
    int a_seeds = 5, a_ngen = 1000, a_ntest = 1000, a_threads = 0;
    abl_cmd->add_option("--suite", a_suite, "weight2 | blocksize | rff")->required();
    abl_cmd->add_option("--data", a_data, "dataset (train+test pooled)")->required();
    abl_cmd->add_option("--config", a_config, "base run config");
    abl_cmd->add_option("--seeds", a_seeds, "seeds per cell");
    abl_cmd->add_option("--n-gen", a_ngen, "generated images per cell");
    abl_cmd->add_option("--n-test", a_ntest, "held-out rows");
    abl_cmd->add_option("--out", a_out, "output directory");
    abl_cmd->add_option("--threads", a_threads, "worker cap");

    // theory-check
    auto* th_cmd = app.add_subcommand("theory-check", "numerical checks of the analytic claims");
    std::string t_suite, t_bundle, t_out;
    std::uint64_t t_seed = 1;
    th_cmd->add_option("--suite", t_suite, "sketch | noise | counts | ridge")->required();
    th_cmd->add_option("--bundle", t_bundle, "bundle directory (noise suite)");
    th_cmd->add_option("--seed", t_seed, "seed");
    th_cmd->add_option("--out", t_out, "JSON output path");

    // scale-table
    auto* sc_cmd = app.add_subcommand("scale-table", "capacity-heuristic calculator table");
    std::vector<int> s_d, s_nq;
    double s_rho = 1.5;
    std::string s_out;
    sc_cmd->add_option("--d", s_d, "pixel counts");
    sc_cmd->add_option("--nq", s_nq, "qubit counts (paired with --d)");
    sc_cmd->add_option("--rho", s_rho, "capacity threshold rho_min");
    sc_cmd->add_option("--out", s_out, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage errors collapse to exit code 1
    }

    try {
        if (gen_data->parsed()) return cmd_gen_data(gd_d, gd_n, gd_seed, gd_recipe, gd_out, gd_csv);
        if (train_cmd->parsed())
            return cmd_train(tr_data, tr_config, tr_out, tr_exact, tr_threads, tr_seed);
        if (gen_cmd->parsed())
            return cmd_generate(g_bundle, g_n, g_seed, g_out, g_nores, g_exact, g_shots, g_threads);
        if (eval_cmd->parsed()) return cmd_evaluate(e_truth, e_gen, e_blocks, e_out, e_csv);
        if (abl_cmd->parsed())
            return cmd_ablate(a_suite, a_data, a_config, a_seeds, a_ngen, a_ntest, a_out, a_threads);
        if (th_cmd->parsed()) return cmd_theory(t_suite, t_bundle, t_seed, t_out);
        if (sc_cmd->parsed()) return cmd_scale_table(s_d, s_nq, s_rho, s_out);
    } catch (const qfan::internal_error& e) {
        std::cerr << "internal invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qfan::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
