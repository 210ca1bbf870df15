#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qfan/common.hpp"
#include "qfan/rng.hpp"

namespace qfan {

// Fixed random hash and sign maps over pixel indices. The induced projection
// matrix S (m x d) has exactly one nonzero per column: S(h[k], k) = sgn[k].
// Fully determined by {d, m, seed}; the maps are regenerated from the seed
// and never stored on disk.
struct SketchPlan {
    int d = 0;
    int m = 0;
    std::uint64_t seed = 0;
    std::vector<int> bucket;  // h : [d] -> [m]
    std::vector<double> sign; // sgn : [d] -> {+1, -1}
};

inline SketchPlan new_sketch_plan(int d, int m, std::uint64_t seed) {
    if (d < 1 || m < 1) throw value_error("new_sketch_plan: d and m must be positive");
    SketchPlan plan;
    plan.d = d;
    plan.m = m;
    plan.seed = seed;
    plan.bucket.resize(static_cast<std::size_t>(d));
    plan.sign.resize(static_cast<std::size_t>(d));
    const Rng base(seed);
    for (int k = 0; k < d; ++k) {
        // One independent substream per pixel index (counter-based), so the
        // maps do not depend on traversal order.
        Rng h = base.derived(rng_tag::sketch_hash, static_cast<std::uint64_t>(k));
        Rng s = base.derived(rng_tag::sketch_sign, static_cast<std::uint64_t>(k));
        plan.bucket[static_cast<std::size_t>(k)] = static_cast<int>(h.below(static_cast<std::uint64_t>(m)));
        plan.sign[static_cast<std::size_t>(k)] = s.rademacher() > 0 ? 1.0 : -1.0;
    }
    return plan;
}

// Running sketch vector s, updated additively block by block (the raw,
// unmixed accumulator; tanh mixing happens at read time).
struct SketchState {
    Vec s;
    int blocks_absorbed = 0;
};

inline SketchState make_sketch_state(int m) {
    if (m < 1) throw value_error("make_sketch_state: m must be positive");
    SketchState st;
    st.s = Vec::Zero(m);
    return st;
}

// Absorbs one block of (pixel index, intensity) pairs:
//   s[h(k)] += sgn(k) * y_k
// Touches at most |block| buckets. Returns the number of bucket writes so
// callers can assert the O(b) locality claim.
inline std::size_t sketch_update(SketchState& state, const SketchPlan& plan,
                                 std::span<const std::pair<int, double>> block_pixels) {
    if (state.s.size() != plan.m) throw dimension_error("sketch_update: state width != plan.m");
    for (std::size_t i = 0; i < block_pixels.size(); ++i) {
        const int k = block_pixels[i].first;
        if (k < 0 || k >= plan.d) throw value_error("sketch_update: pixel index out of range");
        for (std::size_t j = i + 1; j < block_pixels.size(); ++j)
            if (block_pixels[j].first == k)
                throw value_error("sketch_update: duplicate pixel index in block");
    }
    std::size_t writes = 0;
    for (const auto& [k, v] : block_pixels) {
        state.s[plan.bucket[static_cast<std::size_t>(k)]] += plan.sign[static_cast<std::size_t>(k)] * v;
        ++writes;
    }
    state.blocks_absorbed += 1;
    return writes;
}

// S * y for a full-length pixel vector; equals absorbing all pixels into a
// zero state in one block.
inline Vec sketch_apply(const SketchPlan& plan, const Vec& y) {
    if (y.size() != plan.d) throw dimension_error("sketch_apply: y length != plan.d");
    Vec out = Vec::Zero(plan.m);
    for (int k = 0; k < plan.d; ++k)
        out[plan.bucket[static_cast<std::size_t>(k)]] += plan.sign[static_cast<std::size_t>(k)] * y[k];
    return out;
}

// <Sy, Sy'>, the count-sketch inner-product estimator (theory-check harness).
inline double inner_product_estimate(const SketchPlan& plan, const Vec& y, const Vec& yp) {
    if (y.size() != plan.d || yp.size() != plan.d)
        throw dimension_error("inner_product_estimate: input length != plan.d");
    return sketch_apply(plan, y).dot(sketch_apply(plan, yp));
}

// Near-identity mixing layer M; s~ = tanh(M s) decorrelates hash collisions
// before the sketch enters the circuit. Frozen after construction.
struct MixingLayer {
    Mat M;
};

inline MixingLayer make_mixing_layer(int m, std::uint64_t seed, double eps = 0.01) {
    if (m < 1) throw value_error("make_mixing_layer: m must be positive");
    Rng rng = Rng(seed).derived(rng_tag::mixing);
    MixingLayer layer;
    layer.M = Mat::Identity(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) layer.M(i, j) += eps * rng.normal();
    return layer;
}

inline Vec mix(const MixingLayer& layer, const Vec& s) {
    if (s.size() != layer.M.cols()) throw dimension_error("mix: input width != layer width");
    Vec out = layer.M * s;
    for (int j = 0; j < out.size(); ++j) out[j] = std::tanh(out[j]);
    return out;
}

// Affine projection of the mixed sketch into circuit angles,
// a = logistic(A s~ + b), componentwise strictly inside (0, 1).
struct AngleProjector {
    Mat A;    // L_a x m
    Vec b;    // L_a
    int L_a = 0;
};

// Projection rows are scaled so pre-sigmoid activations stay O(1) for the
// mixed-sketch magnitudes seen in practice; with the bare 1/sqrt(m) scale
// the activations were two orders of magnitude smaller and the encoder saw
// almost no conditioning signal.
inline constexpr double angle_projector_gain = 5.0;

inline AngleProjector make_angle_projector(int L_a, int m, std::uint64_t seed) {
    if (L_a < 1 || m < 1) throw value_error("make_angle_projector: dimensions must be positive");
    Rng rng = Rng(seed).derived(rng_tag::projector);
    AngleProjector proj;
    proj.L_a = L_a;
    proj.A = Mat(L_a, m);
    const double scale = angle_projector_gain / std::sqrt(static_cast<double>(m));
    for (int i = 0; i < L_a; ++i)
        for (int j = 0; j < m; ++j) proj.A(i, j) = scale * rng.normal();
    proj.b = Vec::Zero(L_a);
    return proj;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec project_angles(const AngleProjector& proj, const Vec& s_tilde) {
    if (s_tilde.size() != proj.A.cols()) throw dimension_error("project_angles: input width != projector width");
    Vec z = proj.A * s_tilde + proj.b;
    for (int i = 0; i < z.size(); ++i) z[i] = logistic(z[i]);
    return z;
}

// All frozen conditioning components, regenerated from one seed.
struct SketchComponents {
    SketchPlan plan;
    MixingLayer mixer;
    AngleProjector proj;
};

inline SketchComponents make_sketch_components(int d, int m, int L_a, std::uint64_t seed) {
    SketchComponents c;
    c.plan = new_sketch_plan(d, m, seed);
    c.mixer = make_mixing_layer(m, seed);
    c.proj = make_angle_projector(L_a, m, seed);
    return c;
}

} // namespace qfan
