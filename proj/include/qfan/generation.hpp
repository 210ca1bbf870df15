#pragma once

#include <utility>
#include <vector>

#include "qfan/common.hpp"
#include "qfan/model.hpp"
#include "qfan/training.hpp"

namespace qfan {

// Residual decisions of one rollout, per block: (cluster, member index) or
// (cluster, -1) for a centroid fallback. Recording and replaying these keeps
// a pair of rollouts coupled on everything except measurement noise.
struct ResidualTrace {
    std::vector<std::pair<int, int>> picks;
};

namespace detail {

inline Vec replay_residual(const ResidualBank& bank, const std::pair<int, int>& pick) {
    const auto& [cluster, member] = pick;
    if (member < 0) return bank.centroids.row(cluster).transpose();
    return bank.members[static_cast<std::size_t>(cluster)].row(member).transpose();
}

inline std::pair<int, int> draw_residual_pick(const ResidualBank& bank, const GateModel& gate,
                                              const Vec& s_tilde, Rng& rng) {
    const Vec p = gate_probs(gate, s_tilde);
    std::vector<double> weights(static_cast<std::size_t>(bank.M));
    for (int k = 0; k < bank.M; ++k) weights[static_cast<std::size_t>(k)] = p[k];
    const int k = rng.categorical(weights);
    const Mat& members = bank.members[static_cast<std::size_t>(k)];
    if (members.rows() == 0) {
        std::fprintf(stderr, "qfan: warning: empty residual cluster %d, emitting centroid\n", k);
        return {k, -1};
    }
    return {k, static_cast<int>(rng.below(static_cast<std::uint64_t>(members.rows())))};
}

struct RolloutOptions {
    bool residuals_enabled = true;
    bool exact = false;
    int n_shots = 512;
    const ResidualTrace* replay = nullptr; // forces recorded residual picks
    ResidualTrace* record = nullptr;       // captures picks for later replay
    std::vector<Vec>* sketch_trace = nullptr; // raw sketch state after each block
};

// The Fig. 2 cycle: mix -> project -> circuit -> decode (+ residual) ->
// clamp -> sketch update, repeated over the B blocks.
inline Vec rollout(const ModelBundle& bundle, const Rng& sample_rng, const RolloutOptions& opt) {
    const BlockPartition& part = bundle.part;
    Vec out(part.d);
    SketchState state = make_sketch_state(bundle.config.m);
    std::vector<std::pair<int, double>> block;
    RunConfig cfg = bundle.config;
    cfg.exact = opt.exact;
    cfg.N_s = opt.n_shots;
    for (int beta = 0; beta < part.B; ++beta) {
        const Vec s_tilde = mix(bundle.sketch.mixer, state.s);
        Rng shot_rng = sample_rng.derived(rng_tag::shots, static_cast<std::uint64_t>(beta));
        const Vec f = extract_features(cfg, bundle.spec, bundle.sketch.proj, bundle.rff,
                                       bundle.theta, s_tilde, shot_rng, nullptr);
        const int width = part.width(beta);
        Vec block_out =
            (f.transpose() * bundle.decoders[static_cast<std::size_t>(beta)].W).transpose();
        if (opt.residuals_enabled) {
            std::pair<int, int> pick;
            if (opt.replay) {
                pick = opt.replay->picks[static_cast<std::size_t>(beta)];
            } else {
                Rng resid_rng = sample_rng.derived(rng_tag::residual_draw, static_cast<std::uint64_t>(beta));
                pick = draw_residual_pick(bundle.banks[static_cast<std::size_t>(beta)],
                                          bundle.gates[static_cast<std::size_t>(beta)], s_tilde, resid_rng);
            }
            if (opt.record) opt.record->picks.push_back(pick);
            block_out += replay_residual(bundle.banks[static_cast<std::size_t>(beta)], pick);
        }
        for (int j = 0; j < width; ++j) block_out[j] = std::max(0.0, block_out[j]);
        block.clear();
        for (int j = 0; j < width; ++j) {
            out[part.start(beta) + j] = block_out[j];
            block.emplace_back(part.start(beta) + j, block_out[j]);
        }
        sketch_update(state, bundle.sketch.plan, block);
        if (opt.sketch_trace) opt.sketch_trace->push_back(state.s);
    }
    return out;
}

} // namespace detail

// One free-running rollout producing a d-pixel image. Emitted pixels are
// clamped at zero before being fed back into the sketch.
inline Vec generate_one(const ModelBundle& bundle, int n_shots, const Rng& sample_rng,
                        bool residuals_enabled, bool exact = false) {
    if (bundle.decoders.size() != static_cast<std::size_t>(bundle.part.B))
        throw dimension_error("generate_one: decoder count != block count");
    if (n_shots < 1 && !exact) throw value_error("generate_one: shot count must be positive");
    detail::RolloutOptions opt;
    opt.residuals_enabled = residuals_enabled;
    opt.exact = exact;
    opt.n_shots = exact ? 1 : n_shots;
    return detail::rollout(bundle, sample_rng, opt);
}

// N independent rollouts with per-sample derived rng streams; row order is
// deterministic for a fixed seed and independent of the worker count.
inline Mat generate_batch(const ModelBundle& bundle, int n_gen, int n_shots, std::uint64_t seed,
                          bool residuals_enabled, bool exact = false, int threads = 1) {
    if (n_gen < 0) throw value_error("generate_batch: n_gen must be nonnegative");
    Mat out(n_gen, bundle.part.d);
    const Rng base = Rng(seed).derived(rng_tag::generate);
    parallel_for(n_gen, threads, [&](int i) {
        out.row(i) = generate_one(bundle, n_shots, base.derived(static_cast<std::uint64_t>(i)),
                                  residuals_enabled, exact)
                         .transpose();
    });
    return out;
}

} // namespace qfan
