#pragma once

#include <algorithm>
#include <vector>

#include "qfan/common.hpp"
#include "qfan/mmd.hpp"

namespace qfan {

// Exact 1-D Wasserstein-1 distance between empirical samples via the
// piecewise CDF integral; reduces to mean |sorted difference| for equal
// sample counts.
inline double wasserstein1_1d(std::vector<double> u, std::vector<double> v) {
    if (u.empty() || v.empty()) throw value_error("wasserstein1_1d: empty sample set");
    std::sort(u.begin(), u.end());
    std::sort(v.begin(), v.end());
    if (u.size() == v.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) acc += std::abs(u[i] - v[i]);
        return acc / static_cast<double>(u.size());
    }
    // Integrate |F_u - F_v| across merged breakpoints.
    double acc = 0.0;
    std::size_t iu = 0, iv = 0;
    double prev = std::min(u.front(), v.front());
    const double nu = static_cast<double>(u.size());
    const double nv = static_cast<double>(v.size());
    while (iu < u.size() || iv < v.size()) {
        const double next = (iu < u.size() && (iv >= v.size() || u[iu] <= v[iv])) ? u[iu] : v[iv];
        acc += std::abs(static_cast<double>(iu) / nu - static_cast<double>(iv) / nv) * (next - prev);
        while (iu < u.size() && u[iu] == next) ++iu;
        while (iv < v.size() && v[iv] == next) ++iv;
        prev = next;
    }
    return acc;
}

inline std::vector<double> column_of(const Mat& Y, int j) {
    std::vector<double> col(static_cast<std::size_t>(Y.rows()));
    for (int i = 0; i < Y.rows(); ++i) col[static_cast<std::size_t>(i)] = Y(i, j);
    return col;
}

// Pearson correlation matrix with unit diagonal. Constant columns have no
// defined correlation; their off-diagonal entries are set to 0 and the
// column indices are reported in `constant_columns`.
struct CorrResult {
    Mat C;
    std::vector<int> constant_columns;
};

inline CorrResult pearson_corr_matrix(const Mat& Y) {
    const int n = static_cast<int>(Y.rows());
    const int d = static_cast<int>(Y.cols());
    if (n < 2) throw value_error("pearson_corr_matrix: need at least two rows");
    CorrResult res;
    const Vec mean = Y.colwise().mean();
    Mat centered = Y.rowwise() - mean.transpose();
    Vec sd(d);
    for (int j = 0; j < d; ++j) sd[j] = std::sqrt(centered.col(j).squaredNorm() / n);
    for (int j = 0; j < d; ++j)
        if (sd[j] == 0.0) res.constant_columns.push_back(j);
    res.C = Mat::Identity(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            double r = 0.0;
            if (sd[i] > 0.0 && sd[j] > 0.0) {
                r = centered.col(i).dot(centered.col(j)) / (n * sd[i] * sd[j]);
                r = std::clamp(r, -1.0, 1.0);
            }
            res.C(i, j) = r;
            res.C(j, i) = r;
        }
    }
    return res;
}

// ||C1 - C2||_F / d.
inline double corr_error(const Mat& C1, const Mat& C2) {
    if (C1.rows() != C2.rows() || C1.cols() != C2.cols())
        throw dimension_error("corr_error: shape mismatch");
    return (C1 - C2).norm() / static_cast<double>(C1.rows());
}

struct EnergyMetrics {
    double w1 = 0.0;
    double peak_truth = 0.0;
    double peak_gen = 0.0;
};

namespace detail {
// Histogram-mode estimate of the distribution peak (fixed 50 bins).
inline double peak_position(const std::vector<double>& v, double lo, double hi) {
    constexpr int bins = 50;
    if (!(hi > lo)) return lo;
    std::vector<int> counts(bins, 0);
    for (double x : v) {
        int k = static_cast<int>((x - lo) / (hi - lo) * bins);
        k = std::clamp(k, 0, bins - 1);
        counts[static_cast<std::size_t>(k)] += 1;
    }
    const int best = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    return lo + (best + 0.5) * (hi - lo) / bins;
}
} // namespace detail

// Total deposited energy E = sum_j y_j: W1 between the two energy samples
// plus histogram peak positions.
inline EnergyMetrics energy_metrics(const Mat& Y_truth, const Mat& Y_gen) {
    if (Y_truth.cols() != Y_gen.cols()) throw dimension_error("energy_metrics: width mismatch");
    std::vector<double> e_truth(static_cast<std::size_t>(Y_truth.rows()));
    std::vector<double> e_gen(static_cast<std::size_t>(Y_gen.rows()));
    for (int i = 0; i < Y_truth.rows(); ++i) e_truth[static_cast<std::size_t>(i)] = Y_truth.row(i).sum();
    for (int i = 0; i < Y_gen.rows(); ++i) e_gen[static_cast<std::size_t>(i)] = Y_gen.row(i).sum();
    EnergyMetrics em;
    em.w1 = wasserstein1_1d(e_truth, e_gen);
    const double lo = std::min(*std::min_element(e_truth.begin(), e_truth.end()),
                               *std::min_element(e_gen.begin(), e_gen.end()));
    const double hi = std::max(*std::max_element(e_truth.begin(), e_truth.end()),
                               *std::max_element(e_gen.begin(), e_gen.end()));
    em.peak_truth = detail::peak_position(e_truth, lo, hi);
    em.peak_gen = detail::peak_position(e_gen, lo, hi);
    return em;
}

// Max |Delta C| over the entries coupling the last `band` pixels of block
// beta to the first `band` pixels of block beta+1, one value per boundary.
inline std::vector<double> boundary_error_profile(const Mat& C_truth, const Mat& C_gen,
                                                  const BlockPartition& part, int band = 1) {
    if (C_truth.rows() != part.d || C_gen.rows() != part.d)
        throw dimension_error("boundary_error_profile: matrix size != partition d");
    if (band < 1) throw value_error("boundary_error_profile: band must be positive");
    std::vector<double> profile;
    for (int beta = 0; beta + 1 < part.B; ++beta) {
        const int last = part.start(beta) + part.width(beta) - 1;
        const int first = part.start(beta + 1);
        double worst = 0.0;
        for (int i = std::max(part.start(beta), last - band + 1); i <= last; ++i)
            for (int j = first; j <= std::min(part.d - 1, first + band - 1); ++j)
                worst = std::max(worst, std::abs(C_truth(i, j) - C_gen(i, j)));
        profile.push_back(worst);
    }
    return profile;
}

// Spearman rank correlation with average ranks for ties.
inline double spearman_rank_corr(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw value_error("spearman_rank_corr: bad input sizes");
    const auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x);
    const std::vector<double> ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

inline double interquartile_range(std::vector<double> v) {
    if (v.size() < 4) throw value_error("interquartile_range: too few samples");
    std::sort(v.begin(), v.end());
    const auto quantile = [&](double q) {
        const double pos = q * (static_cast<double>(v.size()) - 1.0);
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        return lo + 1 < v.size() ? v[lo] * (1.0 - frac) + v[lo + 1] * frac : v[lo];
    };
    return quantile(0.75) - quantile(0.25);
}

// Evaluation bundle over a truth/generated pair.
struct MetricsReport {
    std::vector<double> per_pixel_w1;
    double w1_mean = 0.0;
    double w1_median = 0.0;
    double w1_max = 0.0;
    Mat corr_truth;
    Mat corr_gen;
    std::vector<int> constant_columns_truth;
    std::vector<int> constant_columns_gen;
    double corr_error_fro_over_d = 0.0;
    EnergyMetrics energy;
    double mmd2_full = 0.0;
    std::vector<double> boundary_profile;
    int n_truth = 0;
    int n_gen = 0;
    int d = 0;
};

inline MetricsReport evaluate_samples(const Mat& Y_truth, const Mat& Y_gen, const BlockPartition& part,
                                      int mmd_cap = 2000) {
    if (Y_truth.cols() != Y_gen.cols()) throw dimension_error("evaluate_samples: width mismatch");
    if (Y_truth.cols() != part.d) throw dimension_error("evaluate_samples: partition mismatch");
    MetricsReport rep;
    rep.d = part.d;
    rep.n_truth = static_cast<int>(Y_truth.rows());
    rep.n_gen = static_cast<int>(Y_gen.rows());
    for (int j = 0; j < part.d; ++j)
        rep.per_pixel_w1.push_back(wasserstein1_1d(column_of(Y_truth, j), column_of(Y_gen, j)));
    rep.w1_mean = 0.0;
    for (double w : rep.per_pixel_w1) rep.w1_mean += w;
    rep.w1_mean /= static_cast<double>(part.d);
    rep.w1_median = median_of(rep.per_pixel_w1);
    rep.w1_max = *std::max_element(rep.per_pixel_w1.begin(), rep.per_pixel_w1.end());

    CorrResult ct = pearson_corr_matrix(Y_truth);
    CorrResult cg = pearson_corr_matrix(Y_gen);
    rep.corr_truth = std::move(ct.C);
    rep.corr_gen = std::move(cg.C);
    rep.constant_columns_truth = std::move(ct.constant_columns);
    rep.constant_columns_gen = std::move(cg.constant_columns);
    rep.corr_error_fro_over_d = corr_error(rep.corr_truth, rep.corr_gen);
    rep.energy = energy_metrics(Y_truth, Y_gen);
    if (part.B > 1) rep.boundary_profile = boundary_error_profile(rep.corr_truth, rep.corr_gen, part);

    const int nt = std::min<int>(mmd_cap, static_cast<int>(Y_truth.rows()));
    const int ng = std::min<int>(mmd_cap, static_cast<int>(Y_gen.rows()));
    const Mat Xt = Y_truth.topRows(nt);
    const Mat Xg = Y_gen.topRows(ng);
    rep.mmd2_full = mmd2(Xt, Xg, median_bandwidth(Xt));
    return rep;
}

} // namespace qfan
