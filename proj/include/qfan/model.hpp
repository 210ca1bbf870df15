#pragma once

#include <vector>

#include "qfan/baselines.hpp"
#include "qfan/circuit.hpp"
#include "qfan/common.hpp"
#include "qfan/config.hpp"
#include "qfan/residual.hpp"
#include "qfan/ridge.hpp"
#include "qfan/sketch.hpp"

namespace qfan {

// Width of the feature vector handed to the ridge decoder.
inline int effective_feature_count(const RunConfig& cfg) {
    switch (cfg.feature_kind()) {
        case FeatureKind::quantum: return feature_count(cfg.n_q);
        case FeatureKind::quantum_weight1: return 2 * cfg.n_q;
        case FeatureKind::rff: return cfg.rff_features;
    }
    return feature_count(cfg.n_q);
}

// Everything a free-running rollout needs. The sketch maps are regenerated
// from sketch_seed; one shared theta serves all blocks.
struct ModelBundle {
    RunConfig config;
    CircuitSpec spec;
    BlockPartition part;
    std::uint64_t sketch_seed = 0;
    SketchComponents sketch;
    Vec theta;
    RffParams rff;                      // used only when features = rff
    std::vector<RidgeWeights> decoders; // per block
    std::vector<ResidualBank> banks;    // per block
    std::vector<GateModel> gates;       // per block

    [[nodiscard]] double max_decoder_gain() const {
        double g = 0.0;
        for (const auto& w : decoders) g = std::max(g, decoder_gain(w));
        return g;
    }
};

// One feature evaluation for a mixed sketch row. Shot randomness comes from
// the caller-supplied stream; the ledger counts measurement settings as
// circuit executions.
inline Vec extract_features(const RunConfig& cfg, const CircuitSpec& spec,
                            const AngleProjector& proj, const RffParams& rff,
                            const Vec& theta, const Vec& s_tilde, Rng shot_rng,
                            ShotLedger* ledger = nullptr) {
    const FeatureKind kind = cfg.feature_kind();
    if (kind == FeatureKind::rff) return rff_features(s_tilde, rff);
    const Vec a = project_angles(proj, s_tilde);
    const CVec psi = build_state(spec, a, theta);
    Vec f = cfg.exact ? exact_features(spec, psi, ledger)
                      : sampled_features(spec, psi, cfg.N_s, shot_rng, ledger);
    if (kind == FeatureKind::quantum_weight1) return weight1_feature_mask(f, spec.n_q);
    return f;
}

inline Vec extract_features(const ModelBundle& bundle, const Vec& s_tilde, Rng shot_rng,
                            ShotLedger* ledger = nullptr) {
    return extract_features(bundle.config, bundle.spec, bundle.sketch.proj, bundle.rff,
                            bundle.theta, s_tilde, shot_rng, ledger);
}

inline std::string theta_hash(const Vec& theta) {
    return hex64(fnv1a64(theta.data(), sizeof(double) * static_cast<std::size_t>(theta.size())));
}

} // namespace qfan
