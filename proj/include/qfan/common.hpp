#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "qfan/errors.hpp"

namespace qfan {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Contiguous block partition of a d-pixel image: B = ceil(d/b) blocks of
// width b, the last one possibly short.
struct BlockPartition {
    int d = 0;
    int b = 0;
    int B = 0;

    [[nodiscard]] int start(int beta) const { return beta * b; }
    [[nodiscard]] int width(int beta) const { return std::min(b, d - beta * b); }
};

inline BlockPartition make_partition(int d, int b) {
    if (d < 1 || b < 1) throw value_error("make_partition: d and b must be positive");
    if (b > d) throw value_error("make_partition: block size exceeds pixel count");
    BlockPartition p;
    p.d = d;
    p.b = b;
    p.B = (d + b - 1) / b;
    return p;
}

// Shortest decimal string that round-trips a double (17 significant digits).
inline std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

// FNV-1a over raw bytes; used for snapshot hashes and file checksums.
inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

// Runs fn(i) for i in [0, n) across up to `threads` workers. Work items must
// be independent; results may not depend on the worker count.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&fn, w, workers, n] {
            for (int i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw value_error("median_of: empty input");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace qfan
