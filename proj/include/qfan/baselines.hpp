#pragma once

#include <numbers>

#include "qfan/circuit.hpp"
#include "qfan/common.hpp"
#include "qfan/rng.hpp"

namespace qfan {

// Frozen random-Fourier-feature stage: f = cos(W s~ + b), a drop-in
// classical replacement for the quantum feature extractor.
struct RffParams {
    Mat W;  // p_f x m
    Vec b;  // p_f
};

inline RffParams make_rff(int p_f, int m, std::uint64_t seed) {
    if (p_f < 1 || m < 1) throw value_error("make_rff: dimensions must be positive");
    Rng rng = Rng(seed).derived(rng_tag::rff);
    RffParams rff;
    rff.W = Mat(p_f, m);
    for (int i = 0; i < p_f; ++i)
        for (int j = 0; j < m; ++j) rff.W(i, j) = rng.normal();
    rff.b = Vec(p_f);
    for (int i = 0; i < p_f; ++i) rff.b[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return rff;
}

inline Vec rff_features(const Vec& s_tilde, const RffParams& rff) {
    if (s_tilde.size() != rff.W.cols()) throw dimension_error("rff_features: input width mismatch");
    Vec f = rff.W * s_tilde + rff.b;
    for (int i = 0; i < f.size(); ++i) f[i] = std::cos(f[i]);
    return f;
}

// Keeps only the single-qubit Z and X expectations (2 n_q of the n_q^2+n_q),
// preserving the feature-vector ordering.
inline Vec weight1_feature_mask(const Vec& f, int n_q) {
    if (f.size() != feature_count(n_q)) throw dimension_error("weight1_feature_mask: feature size mismatch");
    const int pairs = n_q * (n_q - 1) / 2;
    Vec out(2 * n_q);
    out.head(n_q) = f.head(n_q);
    out.tail(n_q) = f.segment(n_q + pairs, n_q);
    return out;
}

} // namespace qfan
