#pragma once

#include <cstdio>
#include <limits>
#include <vector>

#include "qfan/common.hpp"
#include "qfan/rng.hpp"

namespace qfan {

// Per-block library of ridge residuals: M = 2^r clusters, each holding its
// centroid and the member residual vectors assigned to it. The power-of-two
// constraint keeps the cluster sampler exchangeable with a Born sampler on
// r qubits.
struct ResidualBank {
    int M = 0;
    Mat centroids;                // M x b
    std::vector<Mat> members;     // per cluster: n_k x b
    std::vector<int> labels;      // training assignment, length N
    double objective = 0.0;       // within-cluster sum of squares
};

namespace detail {

inline bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

struct LloydResult {
    Mat centroids;
    std::vector<int> labels;
    double objective = std::numeric_limits<double>::infinity();
};

inline LloydResult lloyd_once(const Mat& pts, int M, Rng rng, int max_iters) {
    const int n = static_cast<int>(pts.rows());
    LloydResult res;
    // Seeded init from M distinct training points.
    const std::vector<int> pick = rng.sample_without_replacement(n, M);
    res.centroids = Mat(M, pts.cols());
    for (int k = 0; k < M; ++k) res.centroids.row(k) = pts.row(pick[static_cast<std::size_t>(k)]);
    res.labels.assign(static_cast<std::size_t>(n), 0);

    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        double obj = 0.0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int k = 0; k < M; ++k) {
                const double dist = (pts.row(i) - res.centroids.row(k)).squaredNorm();
                if (dist < best_d) {
                    best_d = dist;
                    best = k;
                }
            }
            obj += best_d;
            if (res.labels[static_cast<std::size_t>(i)] != best) {
                res.labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        res.objective = obj;
        if (!changed && iter > 0) break;
        // Update step; an emptied cluster keeps its previous centroid.
        Mat sums = Mat::Zero(M, pts.cols());
        std::vector<int> counts(static_cast<std::size_t>(M), 0);
        for (int i = 0; i < n; ++i) {
            sums.row(res.labels[static_cast<std::size_t>(i)]) += pts.row(i);
            counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])] += 1;
        }
        for (int k = 0; k < M; ++k)
            if (counts[static_cast<std::size_t>(k)] > 0)
                res.centroids.row(k) = sums.row(k) / counts[static_cast<std::size_t>(k)];
    }
    return res;
}

} // namespace detail

// Lloyd's K-means over residual rows, seeded init from distinct points,
// best of `restarts` runs by objective.
inline ResidualBank fit_residual_bank(const Mat& residuals, int M, std::uint64_t seed,
                                      int max_iters = 100, int restarts = 5) {
    const int n = static_cast<int>(residuals.rows());
    if (!detail::is_power_of_two(M)) throw value_error("fit_residual_bank: M must be a power of two");
    if (n < M) throw value_error("fit_residual_bank: fewer residuals than clusters");
    if (max_iters < 1 || restarts < 1) throw value_error("fit_residual_bank: iteration counts must be positive");

    detail::LloydResult best;
    const Rng base = Rng(seed).derived(rng_tag::kmeans);
    for (int r = 0; r < restarts; ++r) {
        detail::LloydResult cur =
            detail::lloyd_once(residuals, M, base.derived(static_cast<std::uint64_t>(r)), max_iters);
        if (cur.objective < best.objective) best = std::move(cur);
    }

    ResidualBank bank;
    bank.M = M;
    bank.centroids = best.centroids;
    bank.labels = best.labels;
    bank.objective = best.objective;
    bank.members.resize(static_cast<std::size_t>(M));
    std::vector<int> counts(static_cast<std::size_t>(M), 0);
    for (int lbl : best.labels) counts[static_cast<std::size_t>(lbl)] += 1;
    for (int k = 0; k < M; ++k)
        bank.members[static_cast<std::size_t>(k)] = Mat(counts[static_cast<std::size_t>(k)], residuals.cols());
    std::vector<int> fill(static_cast<std::size_t>(M), 0);
    for (int i = 0; i < n; ++i) {
        const int k = best.labels[static_cast<std::size_t>(i)];
        bank.members[static_cast<std::size_t>(k)].row(fill[static_cast<std::size_t>(k)]++) = residuals.row(i);
    }
    return bank;
}

// Logistic gate g : R^m -> probability simplex over the M clusters.
struct GateModel {
    Mat W;  // M x m
    Vec c;  // M
};

inline Vec gate_probs(const GateModel& gate, const Vec& s_tilde) {
    if (s_tilde.size() != gate.W.cols()) throw dimension_error("gate_probs: input width mismatch");
    Vec logits = gate.W * s_tilde + gate.c;
    const double zmax = logits.maxCoeff();
    double total = 0.0;
    for (int k = 0; k < logits.size(); ++k) {
        logits[k] = std::exp(logits[k] - zmax);
        total += logits[k];
    }
    return logits / total;
}

// Full-batch gradient descent on the multinomial cross-entropy with a fixed
// step size. Returns the fitted gate; per-epoch losses are written to
// `loss_trace` when provided (used by the monotonicity checks).
inline GateModel fit_gate(const Mat& X, const std::vector<int>& labels, int M,
                          int epochs = 500, double step = 0.1,
                          std::vector<double>* loss_trace = nullptr) {
    const int n = static_cast<int>(X.rows());
    const int m = static_cast<int>(X.cols());
    if (n < 1) throw dimension_error("fit_gate: empty training set");
    if (static_cast<int>(labels.size()) != n) throw dimension_error("fit_gate: label count mismatch");
    for (int lbl : labels)
        if (lbl < 0 || lbl >= M) throw value_error("fit_gate: label out of range");
    if (M < 1 || epochs < 1 || step <= 0.0) throw value_error("fit_gate: invalid hyperparameters");

    GateModel gate;
    gate.W = Mat::Zero(M, m);
    gate.c = Vec::Zero(M);

    Mat probs(n, M);
    const auto forward = [&]() {
        double loss = 0.0;
        for (int i = 0; i < n; ++i) {
            Vec logits = gate.W * X.row(i).transpose() + gate.c;
            const double zmax = logits.maxCoeff();
            double total = 0.0;
            for (int k = 0; k < M; ++k) {
                logits[k] = std::exp(logits[k] - zmax);
                total += logits[k];
            }
            probs.row(i) = logits.transpose() / total;
            loss -= std::log(std::max(probs(i, labels[static_cast<std::size_t>(i)]), 1e-300));
        }
        return loss / n;
    };

    for (int epoch = 0; epoch < epochs; ++epoch) {
        const double loss = forward();
        if (loss_trace) loss_trace->push_back(loss);
        Mat grad_w = Mat::Zero(M, m);
        Vec grad_c = Vec::Zero(M);
        for (int i = 0; i < n; ++i) {
            Vec err = probs.row(i).transpose();
            err[labels[static_cast<std::size_t>(i)]] -= 1.0;
            grad_w += err * X.row(i);
            grad_c += err;
        }
        gate.W -= (step / n) * grad_w;
        gate.c -= (step / n) * grad_c;
    }
    if (loss_trace) loss_trace->push_back(forward());
    return gate;
}

// Draws a residual: cluster index ~ gate(s~), then a uniformly chosen member
// of that cluster. An empty cluster falls back to its centroid.
inline Vec sample_residual(const ResidualBank& bank, const GateModel& gate, const Vec& s_tilde, Rng& rng) {
    const Vec p = gate_probs(gate, s_tilde);
    if (p.size() != bank.M) throw dimension_error("sample_residual: gate width != cluster count");
    std::vector<double> weights(static_cast<std::size_t>(bank.M));
    for (int k = 0; k < bank.M; ++k) weights[static_cast<std::size_t>(k)] = p[k];
    const int k = rng.categorical(weights);
    const Mat& members = bank.members[static_cast<std::size_t>(k)];
    if (members.rows() == 0) {
        std::fprintf(stderr, "qfan: warning: empty residual cluster %d, emitting centroid\n", k);
        return bank.centroids.row(k).transpose();
    }
    const int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(members.rows())));
    return members.row(pick).transpose();
}

} // namespace qfan
