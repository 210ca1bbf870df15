#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qfan/common.hpp"
#include "qfan/metrics.hpp"
#include "qfan/mmd.hpp"
#include "qfan/rng.hpp"
#include "qfan/training.hpp"

namespace qfan {

using json = nlohmann::json;

inline void write_json_file(const json& j, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw data_error("cannot open for write: " + path);
    os << j.dump(2) << "\n";
}

inline json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("cannot open: " + path);
    json j;
    is >> j;
    return j;
}

inline json report_to_json(const MetricsReport& rep) {
    json j;
    j["schema"] = "qfan-report-v1";
    j["d"] = rep.d;
    j["n_truth"] = rep.n_truth;
    j["n_gen"] = rep.n_gen;
    j["per_pixel_w1"] = rep.per_pixel_w1;
    j["w1_mean"] = rep.w1_mean;
    j["w1_median"] = rep.w1_median;
    j["w1_max"] = rep.w1_max;
    j["corr_error_fro_over_d"] = rep.corr_error_fro_over_d;
    j["energy_w1"] = rep.energy.w1;
    j["energy_peak_truth"] = rep.energy.peak_truth;
    j["energy_peak_gen"] = rep.energy.peak_gen;
    j["mmd2_full"] = rep.mmd2_full;
    j["boundary_profile"] = rep.boundary_profile;
    j["constant_columns_truth"] = rep.constant_columns_truth;
    j["constant_columns_gen"] = rep.constant_columns_gen;
    return j;
}

inline void write_matrix_csv(const Mat& M, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw data_error("cannot open for write: " + path);
    for (int i = 0; i < M.rows(); ++i) {
        for (int j = 0; j < M.cols(); ++j) {
            if (j) os << ',';
            os << fmt_double(M(i, j));
        }
        os << '\n';
    }
}

// Per-pixel marginal histograms over a shared binning (one CSV per figure:
// marginals, correlation matrices plus difference, energy sums).
inline void write_marginals_csv(const Mat& Y_truth, const Mat& Y_gen, const std::string& path,
                                int bins = 40) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw data_error("cannot open for write: " + path);
    os << "pixel,bin_lo,bin_hi,count_truth,count_gen\n";
    for (int j = 0; j < Y_truth.cols(); ++j) {
        double lo = Y_truth.col(j).minCoeff();
        double hi = Y_truth.col(j).maxCoeff();
        lo = std::min(lo, Y_gen.col(j).minCoeff());
        hi = std::max(hi, Y_gen.col(j).maxCoeff());
        if (!(hi > lo)) hi = lo + 1.0;
        std::vector<int> ct(static_cast<std::size_t>(bins), 0), cg(static_cast<std::size_t>(bins), 0);
        const auto bin_of = [&](double x) {
            int k = static_cast<int>((x - lo) / (hi - lo) * bins);
            return std::clamp(k, 0, bins - 1);
        };
        for (int i = 0; i < Y_truth.rows(); ++i) ct[static_cast<std::size_t>(bin_of(Y_truth(i, j)))] += 1;
        for (int i = 0; i < Y_gen.rows(); ++i) cg[static_cast<std::size_t>(bin_of(Y_gen(i, j)))] += 1;
        for (int k = 0; k < bins; ++k) {
            os << j << ',' << fmt_double(lo + k * (hi - lo) / bins) << ','
               << fmt_double(lo + (k + 1) * (hi - lo) / bins) << ',' << ct[static_cast<std::size_t>(k)]
               << ',' << cg[static_cast<std::size_t>(k)] << '\n';
        }
    }
}

inline void write_energy_csv(const Mat& Y_truth, const Mat& Y_gen, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw data_error("cannot open for write: " + path);
    os << "set,energy\n";
    for (int i = 0; i < Y_truth.rows(); ++i) os << "truth," << fmt_double(Y_truth.row(i).sum()) << '\n';
    for (int i = 0; i < Y_gen.rows(); ++i) os << "gen," << fmt_double(Y_gen.row(i).sum()) << '\n';
}

inline void write_history_jsonl(const std::vector<StepRecord>& history, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw data_error("cannot open for write: " + path);
    for (const auto& rec : history) {
        json j;
        j["t"] = rec.t;
        j["loss_plus"] = rec.loss_plus;
        j["loss_minus"] = rec.loss_minus;
        j["circuits"] = rec.circuits;
        j["shots"] = rec.shots;
        j["theta_hash"] = rec.theta_hash;
        j["wall_ms"] = rec.wall_ms;
        os << j.dump() << '\n';
    }
}

// Blockwise MMD^2 between truth and teacher-forced predictions with a 95%
// bootstrap confidence half-width (percentile-free normal approximation,
// n_boot resamples on precomputed Gram matrices).
struct Mmd2WithCI {
    double value = 0.0;
    double ci_halfwidth = 0.0;
};

inline Mmd2WithCI mmd2_bootstrap_ci(const Mat& X, const Mat& P, double bandwidth, int n_boot,
                                    std::uint64_t seed, int cap = 500) {
    const int n = std::min<int>({cap, static_cast<int>(X.rows()), static_cast<int>(P.rows())});
    const Mat Xs = X.topRows(n);
    const Mat Ps = P.topRows(n);
    const double two_h2 = 2.0 * bandwidth * bandwidth;
    const auto gram = [&](const Mat& A, const Mat& B) {
        Mat D = detail::sq_dist(A, B);
        for (int i = 0; i < D.rows(); ++i)
            for (int j = 0; j < D.cols(); ++j) D(i, j) = std::exp(-D(i, j) / two_h2);
        return D;
    };
    const Mat Kxx = gram(Xs, Xs);
    const Mat Kpp = gram(Ps, Ps);
    const Mat Kxp = gram(Xs, Ps);

    const auto stat = [&](const std::vector<int>& ix, const std::vector<int>& ip) {
        double sxx = 0.0, spp = 0.0, sxp = 0.0;
        for (int a : ix)
            for (int b : ix) sxx += Kxx(a, b);
        for (int a : ip)
            for (int b : ip) spp += Kpp(a, b);
        for (int a : ix)
            for (int b : ip) sxp += Kxp(a, b);
        const double n2 = static_cast<double>(n) * static_cast<double>(n);
        return std::max(0.0, (sxx + spp - 2.0 * sxp) / n2);
    };

    std::vector<int> ident(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ident[static_cast<std::size_t>(i)] = i;
    Mmd2WithCI out;
    out.value = stat(ident, ident);

    Rng rng = Rng(seed).derived(rng_tag::bootstrap);
    double mean = 0.0, m2 = 0.0;
    for (int rep = 0; rep < n_boot; ++rep) {
        std::vector<int> ix(static_cast<std::size_t>(n)), ip(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            ix[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            ip[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        }
        const double v = stat(ix, ip);
        const double delta = v - mean;
        mean += delta / (rep + 1);
        m2 += delta * (v - mean);
    }
    const double sd = n_boot > 1 ? std::sqrt(m2 / (n_boot - 1)) : 0.0;
    out.ci_halfwidth = 1.96 * sd;
    return out;
}

} // namespace qfan
