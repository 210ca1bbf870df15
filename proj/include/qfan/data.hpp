#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qfan/common.hpp"
#include "qfan/rng.hpp"

namespace qfan {

// Knobs of the synthetic shower generator. Stands in for the real
// electromagnetic-shower source: unimodal skewed per-cell marginals, strong
// positive correlations inside each half of the image, anti-correlation
// across halves from the shared energy budget.
struct ShowerRecipe {
    double energy_mean = 2.45;   // total deposited energy, normalized units
    double energy_spread = 0.09; // relative log-scale spread
    double energy_skew = 0.15;   // Cornish-Fisher style skew adjustment
    double profile_shape = 2.2;  // longitudinal bump exponent (peak mid-image)
    double pixel_fluct = 0.12;   // per-pixel multiplicative log-scale noise
    double half_coupling = 0.10; // energy-split noise between the two halves
};

inline void validate_recipe(const ShowerRecipe& r) {
    if (!(r.energy_mean > 0.0) || !(r.energy_spread > 0.0) || !(r.profile_shape > 0.0) ||
        !(r.pixel_fluct > 0.0) || !(r.half_coupling > 0.0))
        throw value_error("ShowerRecipe: all scale parameters must be positive");
    if (r.energy_skew < 0.0) throw value_error("ShowerRecipe: skew must be nonnegative");
}

struct Dataset {
    Mat Y;                 // N x d, nonnegative normalized intensities
    std::uint64_t seed = 0;

    [[nodiscard]] int n() const { return static_cast<int>(Y.rows()); }
    [[nodiscard]] int d() const { return static_cast<int>(Y.cols()); }
};

// Draws N showers of d pixels. Per sample: a skewed total energy is split
// between the two image halves with a noisy fraction, distributed along a
// smooth longitudinal bump, and dressed with spatially correlated
// multiplicative fluctuations; each half is renormalized to its energy
// budget. Deterministic per (recipe, d, N, seed).
inline Dataset synth_showers(const ShowerRecipe& recipe, int d, int N, std::uint64_t seed) {
    validate_recipe(recipe);
    if (d < 2) throw value_error("synth_showers: d must be at least 2");
    if (N < 0) throw value_error("synth_showers: N must be nonnegative");

    // Longitudinal bump over the whole image, normalized per half.
    Vec profile(d);
    for (int i = 0; i < d; ++i) {
        const double t = (i + 0.5) / d;
        profile[i] = std::pow(t, recipe.profile_shape) * std::pow(1.0 - t, recipe.profile_shape);
    }
    const int half = (d + 1) / 2;
    const double ar = 0.6; // within-half noise correlation

    Dataset ds;
    ds.seed = seed;
    ds.Y = Mat(N, d);
    const Rng base = Rng(seed).derived(rng_tag::data_gen);
    for (int i = 0; i < N; ++i) {
        Rng rng = base.derived(static_cast<std::uint64_t>(i));
        const double g = rng.normal();
        const double z = g + 0.5 * recipe.energy_skew * (g * g - 1.0);
        const double energy =
            recipe.energy_mean * std::exp(recipe.energy_spread * z - 0.5 * recipe.energy_spread * recipe.energy_spread);
        double frac = 0.5 + recipe.half_coupling * rng.normal();
        frac = std::min(0.95, std::max(0.05, frac));
        const double budget[2] = {frac * energy, (1.0 - frac) * energy};

        double noise = 0.0;
        int pos = 0;
        for (int h = 0; h < 2; ++h) {
            const int lo = (h == 0) ? 0 : half;
            const int hi = (h == 0) ? half : d;
            noise = 0.0; // noise chain restarts per half
            double total = 0.0;
            for (int j = lo; j < hi; ++j) {
                noise = ar * noise + std::sqrt(1.0 - ar * ar) * rng.normal();
                const double v = profile[j] * std::exp(recipe.pixel_fluct * noise -
                                                       0.5 * recipe.pixel_fluct * recipe.pixel_fluct);
                ds.Y(i, pos + (j - lo)) = v;
                total += v;
            }
            for (int j = lo; j < hi; ++j) ds.Y(i, j) = std::max(0.0, ds.Y(i, j) * budget[h] / total);
            pos = half;
        }
    }
    return ds;
}

// ---- binary dataset format ----
// Header: magic "QFDS", version u32, N u64, d u64, dtype u32 (0 = f64 LE),
// then row-major doubles, then an FNV-1a checksum of the payload.

namespace detail {
inline constexpr std::uint32_t dataset_magic = 0x53444651; // "QFDS" little-endian
inline constexpr std::uint32_t dataset_version = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw data_error("dataset file truncated");
    return v;
}
} // namespace detail

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw data_error("save_dataset: cannot open " + path);
    detail::write_pod(os, detail::dataset_magic);
    detail::write_pod(os, detail::dataset_version);
    detail::write_pod(os, static_cast<std::uint64_t>(ds.Y.rows()));
    detail::write_pod(os, static_cast<std::uint64_t>(ds.Y.cols()));
    detail::write_pod(os, static_cast<std::uint32_t>(0));
    std::uint64_t checksum = 0xcbf29ce484222325ULL;
    for (int i = 0; i < ds.Y.rows(); ++i) {
        for (int j = 0; j < ds.Y.cols(); ++j) {
            const double v = ds.Y(i, j);
            detail::write_pod(os, v);
            checksum = fnv1a64(&v, sizeof(v), checksum);
        }
    }
    detail::write_pod(os, checksum);
    if (!os) throw data_error("save_dataset: write failed for " + path);
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("load_dataset: cannot open " + path);
    if (detail::read_pod<std::uint32_t>(is) != detail::dataset_magic)
        throw data_error("load_dataset: bad magic in " + path);
    if (detail::read_pod<std::uint32_t>(is) != detail::dataset_version)
        throw data_error("load_dataset: unsupported version in " + path);
    const auto n = detail::read_pod<std::uint64_t>(is);
    const auto d = detail::read_pod<std::uint64_t>(is);
    if (detail::read_pod<std::uint32_t>(is) != 0)
        throw data_error("load_dataset: unsupported dtype in " + path);
    if (n > (1ULL << 32) || d > (1ULL << 20)) throw data_error("load_dataset: implausible shape");
    Dataset ds;
    ds.Y = Mat(static_cast<int>(n), static_cast<int>(d));
    std::uint64_t checksum = 0xcbf29ce484222325ULL;
    for (int i = 0; i < ds.Y.rows(); ++i) {
        for (int j = 0; j < ds.Y.cols(); ++j) {
            const double v = detail::read_pod<double>(is);
            ds.Y(i, j) = v;
            checksum = fnv1a64(&v, sizeof(v), checksum);
        }
    }
    if (detail::read_pod<std::uint64_t>(is) != checksum)
        throw data_error("load_dataset: checksum mismatch in " + path);
    return ds;
}

// CSV export with 17 significant digits (decimal form of the same data).
inline void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw data_error("save_dataset_csv: cannot open " + path);
    for (int i = 0; i < ds.Y.rows(); ++i) {
        for (int j = 0; j < ds.Y.cols(); ++j) {
            if (j) os << ',';
            os << fmt_double(ds.Y(i, j));
        }
        os << '\n';
    }
}

// Accepts plain N x d CSV (no header), so external data drops in unchanged.
inline Dataset load_dataset_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("load_dataset_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw data_error("load_dataset_csv: non-numeric cell in " + path);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw data_error("load_dataset_csv: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw data_error("load_dataset_csv: no rows in " + path);
    Dataset ds;
    ds.Y = Mat(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            ds.Y(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return ds;
}

// Disjoint seeded train/test split by shuffled row indices.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, int n_train, int n_test, std::uint64_t seed) {
    if (n_train < 0 || n_test < 0 || n_train + n_test > ds.n())
        throw value_error("split: requested sizes exceed dataset");
    Rng rng = Rng(seed).derived(rng_tag::split);
    const std::vector<int> order = rng.sample_without_replacement(ds.n(), n_train + n_test);
    Dataset train, test;
    train.seed = ds.seed;
    test.seed = ds.seed;
    train.Y = Mat(n_train, ds.d());
    test.Y = Mat(n_test, ds.d());
    for (int i = 0; i < n_train; ++i) train.Y.row(i) = ds.Y.row(order[static_cast<std::size_t>(i)]);
    for (int i = 0; i < n_test; ++i) test.Y.row(i) = ds.Y.row(order[static_cast<std::size_t>(n_train + i)]);
    return {std::move(train), std::move(test)};
}

} // namespace qfan
