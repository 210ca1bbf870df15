#pragma once

#include <string>
#include <vector>

#include "qfan/common.hpp"
#include "qfan/config.hpp"
#include "qfan/generation.hpp"
#include "qfan/metrics.hpp"
#include "qfan/training.hpp"

namespace qfan {

// One (cell, seed) outcome of an ablation sweep.
struct AblationResult {
    std::string cell;
    int p_f = 0;
    int b = 0;
    std::uint64_t seed = 0;
    double w1_mean = 0.0;
    double corr_err = 0.0;
};

struct AblationSummary {
    std::string cell;
    int p_f = 0;
    int b = 0;
    double w1_median = 0.0;
    double corr_median = 0.0;
};

struct AblationCell {
    std::string name;
    RunConfig config;
};

// Cells of the three published sweeps. Every cell inherits the base budget
// (T, n_b, N_s, alpha, data split); only the probed factor changes.
inline std::vector<AblationCell> ablation_cells(const std::string& suite, const RunConfig& base) {
    std::vector<AblationCell> cells;
    const auto push = [&cells](std::string name, RunConfig cfg) {
        cells.push_back({std::move(name), std::move(cfg)});
    };
    if (suite == "weight2") {
        RunConfig w1 = base;
        w1.features = "weight1";
        push("weight1_only", w1);
        RunConfig w12 = base;
        w12.features = "quantum";
        push("weight1+2", w12);
    } else if (suite == "blocksize") {
        for (const int b : {3, 4, 6, 12}) {
            RunConfig cfg = base;
            cfg.b = b;
            push("b" + std::to_string(b), cfg);
        }
    } else if (suite == "rff") {
        RunConfig q = base;
        q.features = "quantum";
        push("quantum_p12", q);
        RunConfig r12 = base;
        r12.features = "rff";
        r12.rff_features = feature_count(base.n_q);
        push("rff_p12", r12);
        RunConfig r72 = base;
        r72.features = "rff";
        r72.rff_features = 72;
        push("rff_p72", r72);
    } else {
        throw value_error("ablation_cells: unknown suite '" + suite + "'");
    }
    return cells;
}

inline AblationResult run_ablation_cell(const AblationCell& cell, std::uint64_t seed,
                                        const Mat& Ytrain, const Mat& Ytest, int n_gen,
                                        int threads) {
    RunConfig cfg = cell.config;
    cfg.seed = seed;
    cfg.threads = threads;
    const TrainResult trained = train(cfg, Ytrain);
    const Mat gen = generate_batch(trained.bundle, n_gen, cfg.N_s,
                                   detail::mix_seed(seed, 0x9e4ULL), true, cfg.exact, threads);
    const MetricsReport rep = evaluate_samples(Ytest, gen, trained.bundle.part);
    AblationResult res;
    res.cell = cell.name;
    res.p_f = effective_feature_count(cfg);
    res.b = cfg.b;
    res.seed = seed;
    res.w1_mean = rep.w1_mean;
    res.corr_err = rep.corr_error_fro_over_d;
    return res;
}

// Full sweep over cells x seeds with matched budgets and seeds; the same
// seed list (and therefore the same generation streams) serves every cell.
inline std::vector<AblationResult> run_ablation_suite(const std::string& suite, const RunConfig& base,
                                                      const Mat& Ytrain, const Mat& Ytest,
                                                      const std::vector<std::uint64_t>& seeds,
                                                      int n_gen, int threads) {
    std::vector<AblationResult> results;
    for (const AblationCell& cell : ablation_cells(suite, base))
        for (const std::uint64_t seed : seeds)
            results.push_back(run_ablation_cell(cell, seed, Ytrain, Ytest, n_gen, threads));
    return results;
}

inline std::vector<AblationSummary> summarize_ablation(const std::vector<AblationResult>& results) {
    std::vector<AblationSummary> out;
    for (const auto& r : results) {
        bool seen = false;
        for (const auto& s : out) seen = seen || s.cell == r.cell;
        if (seen) continue;
        std::vector<double> w1s, corrs;
        AblationSummary s;
        s.cell = r.cell;
        s.p_f = r.p_f;
        s.b = r.b;
        for (const auto& q : results) {
            if (q.cell != r.cell) continue;
            w1s.push_back(q.w1_mean);
            corrs.push_back(q.corr_err);
        }
        s.w1_median = median_of(w1s);
        s.corr_median = median_of(corrs);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace qfan
