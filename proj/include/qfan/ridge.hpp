#pragma once

#include <cmath>

#include "qfan/common.hpp"

namespace qfan {

// Closed-form ridge decoder for one block: W = (F^T F + alpha I)^-1 F^T Y.
struct RidgeWeights {
    Mat W;            // p_f x b
    double alpha = 0.0;
    int block_index = 0;
};

inline RidgeWeights fit_ridge(const Mat& F, const Mat& Y, double alpha, int block_index = 0) {
    if (alpha <= 0.0) throw value_error("fit_ridge: alpha must be positive");
    if (F.rows() != Y.rows()) throw dimension_error("fit_ridge: row count mismatch");
    if (F.rows() < 1) throw dimension_error("fit_ridge: empty design matrix");
    const Mat gram = F.transpose() * F + alpha * Mat::Identity(F.cols(), F.cols());
    const Mat rhs = F.transpose() * Y;
    RidgeWeights w;
    w.W = gram.llt().solve(rhs);
    w.alpha = alpha;
    w.block_index = block_index;
    // alpha > 0 makes the system SPD; a large relative residual means the
    // solve went numerically wrong, not that the input was bad.
    const double denom = rhs.norm();
    const double resid = (gram * w.W - rhs).norm();
    if (denom > 0.0 && resid > 1e-8 * denom)
        throw internal_error("fit_ridge: normal-equation residual exceeds tolerance");
    return w;
}

inline Mat predict(const Mat& F, const RidgeWeights& w) {
    if (F.cols() != w.W.rows()) throw dimension_error("predict: feature width != decoder rows");
    return F * w.W;
}

// Conservative decoder gain: max over output pixels of the absolute column
// sum of W. Controls shot-noise amplification through the decoder.
inline double decoder_gain(const Mat& W) {
    double gain = 0.0;
    for (int j = 0; j < W.cols(); ++j) gain = std::max(gain, W.col(j).cwiseAbs().sum());
    return gain;
}

inline double decoder_gain(const RidgeWeights& w) { return decoder_gain(w.W); }

// ||W||_F <= ||Y||_F / (2 sqrt(alpha)); holds for every valid input.
struct WeightNormBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

inline WeightNormBound weight_norm_bound_check(const Mat& F, const Mat& Y, double alpha) {
    const RidgeWeights w = fit_ridge(F, Y, alpha);
    WeightNormBound out;
    out.lhs = w.W.norm();
    out.rhs = Y.norm() / (2.0 * std::sqrt(alpha));
    out.holds = out.lhs <= out.rhs * (1.0 + 1e-12) + 1e-15;
    return out;
}

// ---- decoder-capacity heuristic ----

inline double feature_target_ratio(int n_q, int b) {
    if (n_q < 1 || b < 1) throw value_error("feature_target_ratio: inputs must be positive");
    return static_cast<double>(n_q * n_q + n_q) / static_cast<double>(b);
}

inline int b_max(int n_q, double rho_min) {
    if (n_q < 1) throw value_error("b_max: n_q must be positive");
    if (rho_min <= 0.0) throw value_error("b_max: rho_min must be positive");
    return static_cast<int>(std::floor(static_cast<double>(n_q * n_q + n_q) / rho_min));
}

inline int B_min(int d, int n_q, double rho_min) {
    if (d < 1 || n_q < 1) throw value_error("B_min: d and n_q must be positive");
    if (rho_min <= 0.0) throw value_error("B_min: rho_min must be positive");
    return static_cast<int>(std::ceil(static_cast<double>(d) * rho_min /
                                      static_cast<double>(n_q * n_q + n_q)));
}

} // namespace qfan
