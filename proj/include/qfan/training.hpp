#pragma once

#include <chrono>
#include <cmath>
#include <utility>
#include <vector>

#include "qfan/common.hpp"
#include "qfan/config.hpp"
#include "qfan/mmd.hpp"
#include "qfan/model.hpp"

namespace qfan {

// ---- Theorem-1 style accounting ----

inline std::uint64_t step_circuit_count(int n_b, int groups) {
    return 2ULL * static_cast<std::uint64_t>(groups) * static_cast<std::uint64_t>(n_b);
}

inline std::uint64_t total_circuit_count(int T, int n_b, int groups) {
    return static_cast<std::uint64_t>(T) * step_circuit_count(n_b, groups);
}

inline std::uint64_t step_shot_count(int n_b, int groups, int n_shots) {
    return step_circuit_count(n_b, groups) * static_cast<std::uint64_t>(n_shots);
}

// Teacher-forced mixed sketches, one N x m matrix per block. Entry
// (beta, i) is mix(sketch of the ground-truth prefix of sample i); block 0
// holds the zero-prefix sketch for every sample.
struct SketchCache {
    std::vector<Mat> tilde;

    [[nodiscard]] int blocks() const { return static_cast<int>(tilde.size()); }
};

inline SketchCache build_cache(const Mat& Y, const SketchPlan& plan, const MixingLayer& mixer,
                               const BlockPartition& part) {
    if (static_cast<int>(Y.cols()) != part.d) throw dimension_error("build_cache: data width != partition d");
    if (part.d != plan.d) throw dimension_error("build_cache: partition d != plan d");
    const int n = static_cast<int>(Y.rows());
    SketchCache cache;
    cache.tilde.assign(static_cast<std::size_t>(part.B), Mat(n, plan.m));
    std::vector<std::pair<int, double>> block;
    for (int i = 0; i < n; ++i) {
        SketchState state = make_sketch_state(plan.m);
        for (int beta = 0; beta < part.B; ++beta) {
            cache.tilde[static_cast<std::size_t>(beta)].row(i) = mix(mixer, state.s).transpose();
            block.clear();
            for (int j = 0; j < part.width(beta); ++j) {
                const int px = part.start(beta) + j;
                block.emplace_back(px, Y(i, px));
            }
            sketch_update(state, plan, block);
        }
    }
    return cache;
}

struct StepRecord {
    int t = 0;
    double loss_plus = 0.0;
    double loss_minus = 0.0;
    std::uint64_t circuits = 0;
    std::uint64_t shots = 0;
    std::string theta_hash;
    double wall_ms = 0.0;
};

namespace detail {

// Blockwise training loss: fit the ridge decoder on the minibatch features
// and score MMD^2 between the true block pixels and the predictions.
inline double minibatch_loss(const RunConfig& cfg, const CircuitSpec& spec,
                             const AngleProjector& proj, const RffParams& rff, const Vec& theta,
                             const Mat& cache_block, const Mat& Y_block,
                             const std::vector<int>& batch, double bandwidth,
                             const Rng& shot_base, ShotLedger& ledger, int threads) {
    const int n = static_cast<int>(batch.size());
    const int p_eff = effective_feature_count(cfg);
    Mat F(n, p_eff);
    Mat Yb(n, Y_block.cols());
    std::vector<ShotLedger> locals(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int i) {
        const int row = batch[static_cast<std::size_t>(i)];
        const Vec s_tilde = cache_block.row(row).transpose();
        F.row(i) = extract_features(cfg, spec, proj, rff, theta, s_tilde,
                                    shot_base.derived(static_cast<std::uint64_t>(row)),
                                    &locals[static_cast<std::size_t>(i)])
                       .transpose();
        Yb.row(i) = Y_block.row(row);
    });
    for (const auto& l : locals) {
        ledger.circuits += l.circuits;
        ledger.shots += l.shots;
    }
    const RidgeWeights w = fit_ridge(F, Yb, cfg.alpha);
    return mmd2(Yb, predict(F, w), bandwidth);
}

inline double block_bandwidth(const RunConfig& cfg, const Mat& Yb, const std::vector<int>& batch) {
    if (!cfg.bandwidth_is_median()) return cfg.fixed_bandwidth_or(1.0);
    Mat rows(static_cast<int>(batch.size()), Yb.cols());
    for (std::size_t i = 0; i < batch.size(); ++i)
        rows.row(static_cast<int>(i)) = Yb.row(batch[i]);
    return median_bandwidth(rows);
}

} // namespace detail

struct SpsaStepResult {
    Vec theta;
    StepRecord record;
};

// One SPSA step. Block, minibatch, perturbation, kernel bandwidth and shot
// streams are all derived from (seed, t) and shared by the +/- evaluations
// (common random numbers). Near-zero c_t is treated as a degenerate probe:
// both losses are evaluated at theta and no update is made.
inline SpsaStepResult spsa_step(const Vec& theta, int t, const RunConfig& cfg,
                                const SketchCache& cache, const Mat& Y,
                                const BlockPartition& part, const CircuitSpec& spec,
                                const AngleProjector& proj, const RffParams& rff) {
    if (t < 0 || t >= cfg.T) throw value_error("spsa_step: t out of range");
    const auto t0 = std::chrono::steady_clock::now();
    const Rng run(cfg.seed);
    const int n_rows = static_cast<int>(Y.rows());

    Rng block_rng = run.derived(rng_tag::spsa_block, static_cast<std::uint64_t>(t));
    const int beta = static_cast<int>(block_rng.below(static_cast<std::uint64_t>(part.B)));
    Rng batch_rng = run.derived(rng_tag::spsa_batch, static_cast<std::uint64_t>(t));
    const std::vector<int> batch = batch_rng.sample_without_replacement(n_rows, cfg.n_b);
    Rng delta_rng = run.derived(rng_tag::spsa_delta, static_cast<std::uint64_t>(t));
    Vec delta(theta.size());
    for (int i = 0; i < delta.size(); ++i) delta[i] = delta_rng.rademacher();

    const double c_t = cfg.spsa_c0 / std::pow(t + 1.0, 0.101);
    const double a_t = cfg.spsa_a0 / std::pow(t + 1.0 + cfg.spsa_stability(), 0.602);

    const Mat Y_block = Y.middleCols(part.start(beta), part.width(beta));
    const double bandwidth = detail::block_bandwidth(cfg, Y_block, batch);
    const Rng shot_base = run.derived(rng_tag::shots, static_cast<std::uint64_t>(t));

    ShotLedger ledger;
    const Mat& cache_block = cache.tilde[static_cast<std::size_t>(beta)];
    const auto eval = [&](const Vec& th) {
        return detail::minibatch_loss(cfg, spec, proj, rff, th, cache_block, Y_block, batch,
                                      bandwidth, shot_base, ledger, cfg.threads);
    };

    SpsaStepResult out;
    if (c_t < 1e-10) {
        out.record.loss_plus = eval(theta);
        out.record.loss_minus = eval(theta);
        out.theta = theta;
    } else {
        out.record.loss_plus = eval(theta + c_t * delta);
        out.record.loss_minus = eval(theta - c_t * delta);
        const double scale = (out.record.loss_plus - out.record.loss_minus) / (2.0 * c_t);
        out.theta = theta - (a_t * scale) * delta;
    }

    if (cfg.feature_kind() != FeatureKind::rff &&
        ledger.circuits != step_circuit_count(cfg.n_b, measurement_groups(spec)))
        throw internal_error("spsa_step: circuit count deviates from 2*G*n_b");

    out.record.t = t;
    out.record.circuits = ledger.circuits;
    out.record.shots = ledger.shots;
    out.record.theta_hash = theta_hash(out.theta);
    out.record.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// Deterministic training-objective snapshot: the minibatch loss protocol on
// a fixed seeded subset, averaged over all blocks, with shot streams that do
// not depend on theta. Comparable across thetas of the same run.
inline double training_mmd2_snapshot(const RunConfig& cfg, const SketchCache& cache, const Mat& Y,
                                     const BlockPartition& part, const CircuitSpec& spec,
                                     const AngleProjector& proj, const RffParams& rff,
                                     const Vec& theta, int subset = 512) {
    const Rng run(cfg.seed);
    Rng pick = run.derived(rng_tag::snapshot);
    const int n = std::min<int>(subset, static_cast<int>(Y.rows()));
    const std::vector<int> batch = pick.sample_without_replacement(static_cast<int>(Y.rows()), n);
    double total = 0.0;
    ShotLedger ledger;
    for (int beta = 0; beta < part.B; ++beta) {
        const Mat Y_block = Y.middleCols(part.start(beta), part.width(beta));
        const double bandwidth = detail::block_bandwidth(cfg, Y_block, batch);
        const Rng shot_base = run.derived(rng_tag::snapshot, 0x100 + static_cast<std::uint64_t>(beta));
        total += detail::minibatch_loss(cfg, spec, proj, rff, theta,
                                        cache.tilde[static_cast<std::size_t>(beta)], Y_block, batch,
                                        bandwidth, shot_base, ledger, cfg.threads);
    }
    return total / part.B;
}

struct TrainResult {
    ModelBundle bundle;
    std::vector<StepRecord> history;
    double initial_mmd2 = 0.0;
    double final_mmd2 = 0.0;
    std::uint64_t step_circuits_total = 0;
    std::uint64_t step_shots_total = 0;
    std::uint64_t refit_circuits = 0;
    Mat final_train_predictions; // N x d teacher-forced ridge predictions
};

// Full training pass: SPSA over the shared parameters on the teacher-forced
// cache, then a full-training-set ridge refit per block and the post-hoc
// residual bank and gate fits with frozen theta.
inline TrainResult train(const RunConfig& cfg, const Mat& Ytrain) {
    validate_config(cfg);
    if (static_cast<int>(Ytrain.cols()) != cfg.d) throw dimension_error("train: data width != config d");
    if (static_cast<int>(Ytrain.rows()) < cfg.n_b) throw value_error("train: fewer samples than minibatch size");
    if (static_cast<int>(Ytrain.rows()) < cfg.clusters)
        throw value_error("train: fewer samples than residual clusters");

    TrainResult res;
    ModelBundle& bundle = res.bundle;
    bundle.config = cfg;
    bundle.spec = make_circuit_spec(cfg.n_q, cfg.L);
    bundle.part = make_partition(cfg.d, cfg.b);
    bundle.sketch_seed = cfg.seed;
    bundle.sketch = make_sketch_components(cfg.d, cfg.m, bundle.spec.angle_count(), cfg.seed);
    if (cfg.feature_kind() == FeatureKind::rff)
        bundle.rff = make_rff(cfg.rff_features, cfg.m, cfg.seed);

    const Rng run(cfg.seed);
    Rng init_rng = run.derived(rng_tag::theta_init);
    bundle.theta = Vec(bundle.spec.param_count());
    for (int i = 0; i < bundle.theta.size(); ++i) bundle.theta[i] = init_rng.uniform(-0.1, 0.1);

    const SketchCache cache = build_cache(Ytrain, bundle.sketch.plan, bundle.sketch.mixer, bundle.part);
    res.initial_mmd2 = training_mmd2_snapshot(cfg, cache, Ytrain, bundle.part, bundle.spec,
                                              bundle.sketch.proj, bundle.rff, bundle.theta);

    res.history.reserve(static_cast<std::size_t>(cfg.T));
    for (int t = 0; t < cfg.T; ++t) {
        SpsaStepResult step = spsa_step(bundle.theta, t, cfg, cache, Ytrain, bundle.part,
                                        bundle.spec, bundle.sketch.proj, bundle.rff);
        bundle.theta = std::move(step.theta);
        res.step_circuits_total += step.record.circuits;
        res.step_shots_total += step.record.shots;
        res.history.push_back(std::move(step.record));
    }

    res.final_mmd2 = training_mmd2_snapshot(cfg, cache, Ytrain, bundle.part, bundle.spec,
                                            bundle.sketch.proj, bundle.rff, bundle.theta);

    // Deployment decoders: refit per block on the full training set with the
    // converged theta. The fit and the residual reference both use
    // shot-noise-averaged features (several independent draws per sample):
    // averaging undoes errors-in-variables attenuation in W, and residuals
    // against the averaged predictions keep the bank spread free of the
    // feature noise a rollout adds on its own.
    const int n = static_cast<int>(Ytrain.rows());
    const int p_eff = effective_feature_count(cfg);
    const bool stochastic = !cfg.exact && cfg.feature_kind() != FeatureKind::rff;
    const int fit_draws = stochastic ? 8 : 1;
    res.final_train_predictions = Mat(n, cfg.d);
    for (int beta = 0; beta < bundle.part.B; ++beta) {
        const Mat& tilde = cache.tilde[static_cast<std::size_t>(beta)];
        const Mat Y_block = Ytrain.middleCols(bundle.part.start(beta), bundle.part.width(beta));
        Mat F_fit = Mat::Zero(n, p_eff);
        std::vector<ShotLedger> locals(static_cast<std::size_t>(n));
        const Rng shot_base = run.derived(rng_tag::refit, static_cast<std::uint64_t>(beta));
        parallel_for(n, cfg.threads, [&](int i) {
            const Vec s_tilde = tilde.row(i).transpose();
            const Rng row_rng = shot_base.derived(static_cast<std::uint64_t>(i));
            for (int k = 0; k < fit_draws; ++k)
                F_fit.row(i) += extract_features(cfg, bundle.spec, bundle.sketch.proj, bundle.rff,
                                                 bundle.theta, s_tilde,
                                                 row_rng.derived(static_cast<std::uint64_t>(k)),
                                                 &locals[static_cast<std::size_t>(i)])
                                    .transpose();
            F_fit.row(i) /= static_cast<double>(fit_draws);
        });
        for (const auto& l : locals) res.refit_circuits += l.circuits;
        // Deployment-noise-aware shrinkage: a multiple of the per-feature
        // shot variance joins the ridge penalty, trading a little
        // conditional-mean fidelity for less shot-noise amplification in
        // rollouts (which widens generated marginals).
        const double noise_fraction = 4.0;
        if (stochastic && noise_fraction > 0.0) {
            Vec shot_var = Vec::Zero(p_eff);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < p_eff; ++j)
                    shot_var[j] += (1.0 - F_fit(i, j) * F_fit(i, j)) / cfg.N_s;
            shot_var /= static_cast<double>(n);
            const Mat gram = F_fit.transpose() * F_fit +
                             (noise_fraction * n) * Mat(shot_var.cwiseMax(0.0).asDiagonal()) +
                             cfg.alpha * Mat::Identity(p_eff, p_eff);
            RidgeWeights w;
            w.W = gram.llt().solve(F_fit.transpose() * Y_block);
            w.alpha = cfg.alpha;
            w.block_index = beta;
            bundle.decoders.push_back(std::move(w));
        } else {
            bundle.decoders.push_back(fit_ridge(F_fit, Y_block, cfg.alpha, beta));
        }
        const Mat pred = predict(F_fit, bundle.decoders.back());
        res.final_train_predictions.middleCols(bundle.part.start(beta), bundle.part.width(beta)) = pred;
        const Mat residuals = Y_block - pred;
        const std::uint64_t bank_seed = detail::mix_seed(cfg.seed, 0xba5e0000ULL + static_cast<std::uint64_t>(beta));
        bundle.banks.push_back(fit_residual_bank(residuals, cfg.clusters, bank_seed,
                                                 cfg.kmeans_iters, cfg.kmeans_restarts));
        bundle.gates.push_back(fit_gate(tilde, bundle.banks.back().labels, cfg.clusters,
                                        cfg.gate_epochs, cfg.gate_step));
    }
    return res;
}

} // namespace qfan
