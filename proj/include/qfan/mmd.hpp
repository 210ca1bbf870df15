#pragma once

#include <cmath>

#include "qfan/common.hpp"

namespace qfan {

namespace detail {

// Pairwise squared distances via the Gram expansion |x|^2 + |y|^2 - 2 x.y.
inline Mat sq_dist(const Mat& X, const Mat& Y) {
    const Vec xn = X.rowwise().squaredNorm();
    const Vec yn = Y.rowwise().squaredNorm();
    Mat D = -2.0 * (X * Y.transpose());
    D.colwise() += xn;
    D.rowwise() += yn.transpose();
    return D.cwiseMax(0.0);
}

inline double kernel_mean(const Mat& X, const Mat& Y, double two_h2) {
    const Mat D = sq_dist(X, Y);
    double acc = 0.0;
    for (int i = 0; i < D.rows(); ++i)
        for (int j = 0; j < D.cols(); ++j) acc += std::exp(-D(i, j) / two_h2);
    return acc / (static_cast<double>(D.rows()) * static_cast<double>(D.cols()));
}

} // namespace detail

// Biased V-statistic of the squared maximum mean discrepancy under the
// Gaussian kernel k(x,y) = exp(-|x-y|^2 / (2 h^2)). Symmetric, nonnegative,
// and exactly zero when X and Y hold the same rows.
inline double mmd2(const Mat& X, const Mat& Y, double bandwidth) {
    if (bandwidth <= 0.0) throw value_error("mmd2: bandwidth must be positive");
    if (X.cols() != Y.cols()) throw dimension_error("mmd2: column count mismatch");
    if (X.rows() < 1 || Y.rows() < 1) throw dimension_error("mmd2: empty sample set");
    const double two_h2 = 2.0 * bandwidth * bandwidth;
    const double kxx = detail::kernel_mean(X, X, two_h2);
    const double kyy = detail::kernel_mean(Y, Y, two_h2);
    const double kxy = detail::kernel_mean(X, Y, two_h2);
    return std::max(0.0, kxx + kyy - 2.0 * kxy);
}

// Median pairwise Euclidean distance over the rows of X. Falls back to 1.0
// when fewer than two rows exist or all rows coincide.
inline double median_bandwidth(const Mat& X) {
    const int n = static_cast<int>(X.rows());
    if (n < 2) return 1.0;
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) dists.push_back((X.row(i) - X.row(j)).norm());
    const double med = median_of(std::move(dists));
    return med > 0.0 ? med : 1.0;
}

} // namespace qfan
