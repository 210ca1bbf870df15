#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qfan/common.hpp"
#include "qfan/generation.hpp"
#include "qfan/model.hpp"
#include "qfan/ridge.hpp"

namespace qfan {

// Device-fidelity back-of-the-envelope for the ring circuit:
// F = (1 - eps_cz)^(2 n_q) * (1 - eps_ro)^n_q.
inline double fidelity_estimate(int n_q, double eps_cz, double eps_ro) {
    if (n_q < 1) throw value_error("fidelity_estimate: n_q must be positive");
    if (eps_cz < 0.0 || eps_cz > 1.0 || eps_ro < 0.0 || eps_ro > 1.0)
        throw value_error("fidelity_estimate: error rates must lie in [0, 1]");
    return std::pow(1.0 - eps_cz, 2.0 * n_q) * std::pow(1.0 - eps_ro, static_cast<double>(n_q));
}

// Worst-case sufficient shot count for end-to-end sketch SNR,
// N_s >= d^2 w^2 p_f / (tau^2 |s|_inf^2), rounded up.
inline std::uint64_t shot_requirement(int d, double w_bar, int p_f, double tau_min, double s_inf) {
    if (d < 1 || p_f < 1) throw value_error("shot_requirement: d and p_f must be positive");
    if (w_bar < 0.0) throw value_error("shot_requirement: decoder gain must be nonnegative");
    if (tau_min <= 0.0 || s_inf <= 0.0)
        throw value_error("shot_requirement: tau_min and s_inf must be positive");
    const double value = static_cast<double>(d) * d * w_bar * w_bar * p_f / (tau_min * tau_min * s_inf * s_inf);
    return static_cast<std::uint64_t>(std::ceil(value));
}

// One row of the analytic scaling table.
struct ScalingRow {
    int d = 0;
    int n_q = 0;
    int p_f = 0;
    int b_max = 0;
    int B_min = 0;
    int m = 0;
    std::uint64_t cache_bytes = 0;
};

namespace detail {
// Sketch widths of the published design points; other dimensions fall back
// to a power-of-two multiple of sqrt(d) with a floor of 32.
inline int design_sketch_width(int d) {
    switch (d) {
        case 12: return 32;
        case 368: return 64;
        case 533: return 80;
        case 6480: return 256;
        case 40500: return 512;
        default: break;
    }
    int m = 32;
    const double target = 3.0 * std::sqrt(static_cast<double>(d));
    while (m < target) m *= 2;
    return m;
}
} // namespace detail

// Capacity-heuristic calculators per (d, n_q) pair; cache bytes assume
// doubles and `cache_samples` training rows.
inline std::vector<ScalingRow> scaling_table(const std::vector<int>& d_list,
                                             const std::vector<int>& nq_list, double rho_min,
                                             int cache_samples = 6000) {
    if (d_list.size() != nq_list.size()) throw dimension_error("scaling_table: list size mismatch");
    std::vector<ScalingRow> rows;
    for (std::size_t i = 0; i < d_list.size(); ++i) {
        ScalingRow row;
        row.d = d_list[i];
        row.n_q = nq_list[i];
        row.p_f = feature_count(row.n_q);
        row.b_max = b_max(row.n_q, rho_min);
        row.B_min = B_min(row.d, row.n_q, rho_min);
        row.m = detail::design_sketch_width(row.d);
        row.cache_bytes = static_cast<std::uint64_t>(row.B_min) * static_cast<std::uint64_t>(cache_samples) *
                          static_cast<std::uint64_t>(row.m) * sizeof(double);
        rows.push_back(row);
    }
    return rows;
}

// One grid point of the shot-noise accumulation check.
struct NoiseCheckRow {
    int n_shots = 0;
    double empirical = 0.0; // max_j mean_reps |delta s_j|
    double bound = 0.0;     // d * w_bar * sqrt(p_f / N_s)
    double w_bar = 0.0;

    [[nodiscard]] double ratio() const { return bound > 0.0 ? empirical / bound : 0.0; }
};

// Couples rollout pairs (exact expectations vs N_s shots) on every random
// decision except measurement noise — identical residual picks are recorded
// on the exact pass and replayed on the noisy pass — and compares the final
// raw sketch states against the worst-case accumulation bound.
inline std::vector<NoiseCheckRow> noise_accumulation_check(const ModelBundle& bundle,
                                                           const std::vector<int>& n_shots_list,
                                                           int repetitions, std::uint64_t seed,
                                                           bool residuals_enabled = true) {
    if (repetitions < 1) throw value_error("noise_accumulation_check: repetitions must be positive");
    const double w_bar = bundle.max_decoder_gain();
    const int p_f = effective_feature_count(bundle.config);
    const Rng base = Rng(seed).derived(rng_tag::generate);

    std::vector<NoiseCheckRow> rows;
    for (const int n_shots : n_shots_list) {
        if (n_shots < 1) throw value_error("noise_accumulation_check: shot counts must be positive");
        Vec acc = Vec::Zero(bundle.config.m);
        for (int rep = 0; rep < repetitions; ++rep) {
            const Rng sample_rng = base.derived(static_cast<std::uint64_t>(rep));
            ResidualTrace trace;
            std::vector<Vec> sketch_exact, sketch_noisy;

            detail::RolloutOptions exact_opt;
            exact_opt.residuals_enabled = residuals_enabled;
            exact_opt.exact = true;
            exact_opt.record = residuals_enabled ? &trace : nullptr;
            exact_opt.sketch_trace = &sketch_exact;
            detail::rollout(bundle, sample_rng, exact_opt);

            detail::RolloutOptions noisy_opt;
            noisy_opt.residuals_enabled = residuals_enabled;
            noisy_opt.exact = false;
            noisy_opt.n_shots = n_shots;
            noisy_opt.replay = residuals_enabled ? &trace : nullptr;
            noisy_opt.sketch_trace = &sketch_noisy;
            detail::rollout(bundle, sample_rng, noisy_opt);

            acc += (sketch_noisy.back() - sketch_exact.back()).cwiseAbs();
        }
        NoiseCheckRow row;
        row.n_shots = n_shots;
        row.w_bar = w_bar;
        row.empirical = (acc / repetitions).maxCoeff();
        row.bound = bundle.part.d * w_bar * std::sqrt(static_cast<double>(p_f) / n_shots);
        rows.push_back(row);
    }
    return rows;
}

} // namespace qfan
