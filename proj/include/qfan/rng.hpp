#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "qfan/errors.hpp"

namespace qfan {

namespace detail {

// One SplitMix64 output step (Steele et al.). Fixed-width arithmetic only,
// so streams are identical across platforms.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stateless mix of a seed and a tag, used to derive independent substreams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + tag);
    std::uint64_t a = splitmix64_next(s);
    std::uint64_t b = splitmix64_next(s);
    return a ^ (b * 0xbf58476d1ce4e5b9ULL);
}

} // namespace detail

// Counter-based seeded generator. Every random decision in the library is
// drawn from an Rng derived from a master seed and a chain of integer tags,
// so substreams are reproducible and independent of evaluation order or
// worker count.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(detail::mix_seed(seed, 0x51a7f00dULL)) {}

    // Independent substream addressed by a tag. Deriving with the same tag
    // twice yields the same stream; distinct tags decorrelate.
    [[nodiscard]] Rng derived(std::uint64_t tag) const {
        Rng r(0);
        r.state_ = detail::mix_seed(state_, tag);
        return r;
    }

    [[nodiscard]] Rng derived(std::uint64_t tag_a, std::uint64_t tag_b) const {
        return derived(tag_a).derived(tag_b);
    }

    std::uint64_t next_u64() { return detail::splitmix64_next(state_); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) via Lemire's multiply-shift.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw value_error("Rng::below: n must be positive");
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller. Two uniforms are consumed per call
    // (no caching), keeping the stream layout position-independent.
    double normal() {
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    int rademacher() { return (next_u64() >> 63) ? 1 : -1; }

    // k distinct indices from [0, n), order randomized (partial Fisher-Yates).
    std::vector<int> sample_without_replacement(int n, int k) {
        if (k > n || k < 0) throw value_error("sample_without_replacement: k out of range");
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        idx.resize(static_cast<std::size_t>(k));
        return idx;
    }

    // Index drawn from a (not necessarily normalized) weight vector.
    int categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw value_error("categorical: weights must have positive sum");
        double u = uniform() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

private:
    std::uint64_t state_;
};

// Well-known tags for top-level substreams. Local code may add offsets on
// top of these; the values only need to be distinct.
namespace rng_tag {
inline constexpr std::uint64_t sketch_hash = 0x01;
inline constexpr std::uint64_t sketch_sign = 0x02;
inline constexpr std::uint64_t mixing = 0x03;
inline constexpr std::uint64_t projector = 0x04;
inline constexpr std::uint64_t theta_init = 0x05;
inline constexpr std::uint64_t spsa_block = 0x06;
inline constexpr std::uint64_t spsa_batch = 0x07;
inline constexpr std::uint64_t spsa_delta = 0x08;
inline constexpr std::uint64_t shots = 0x09;
inline constexpr std::uint64_t refit = 0x0a;
inline constexpr std::uint64_t kmeans = 0x0b;
inline constexpr std::uint64_t generate = 0x0c;
inline constexpr std::uint64_t residual_draw = 0x0d;
inline constexpr std::uint64_t data_gen = 0x0e;
inline constexpr std::uint64_t split = 0x0f;
inline constexpr std::uint64_t snapshot = 0x10;
inline constexpr std::uint64_t rff = 0x11;
inline constexpr std::uint64_t bootstrap = 0x12;
} // namespace rng_tag

} // namespace qfan
