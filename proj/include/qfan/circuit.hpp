#pragma once

#include <complex>
#include <cstdint>
#include <numbers>

#include "qfan/common.hpp"
#include "qfan/rng.hpp"

namespace qfan {

// Circuit shape. Each of the L layers carries, per qubit, two encoding
// rotations fed by sketch angles and two trainable rotations, followed by a
// CZ ring. Both the angle count and the trainable parameter count are
// therefore 2*L*n_q.
struct CircuitSpec {
    int n_q = 0;
    int L = 0;

    [[nodiscard]] int param_count() const { return 2 * L * n_q; }
    [[nodiscard]] int angle_count() const { return 2 * L * n_q; }
    [[nodiscard]] int dim() const { return 1 << n_q; }
};

inline CircuitSpec make_circuit_spec(int n_q, int L) {
    if (n_q < 1 || L < 1) throw value_error("make_circuit_spec: n_q and L must be positive");
    if (n_q > 12) throw value_error("make_circuit_spec: n_q > 12 unsupported");
    return CircuitSpec{n_q, L};
}

// Number of Pauli observables in the {Z_i, X_i, Z_iZ_j, X_iX_j} family.
inline int feature_count(int n_q) {
    if (n_q < 1) throw value_error("feature_count: n_q must be positive");
    return n_q * n_q + n_q;
}

// Tensor-product measurement settings needed for the family: the all-Z and
// all-X bases, independent of qubit count.
inline int measurement_groups(const CircuitSpec&) { return 2; }

// ---- gate primitives (qubit q <-> bit q of the basis index) ----

inline void apply_ry(CVec& psi, int q, double angle) {
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    const int bit = 1 << q;
    const int n = static_cast<int>(psi.size());
    for (int z = 0; z < n; ++z) {
        if (z & bit) continue;
        const std::complex<double> a0 = psi[z];
        const std::complex<double> a1 = psi[z | bit];
        psi[z] = c * a0 - s * a1;
        psi[z | bit] = s * a0 + c * a1;
    }
}

inline void apply_rz(CVec& psi, int q, double angle) {
    const std::complex<double> e0 = std::polar(1.0, -0.5 * angle);
    const std::complex<double> e1 = std::polar(1.0, 0.5 * angle);
    const int bit = 1 << q;
    const int n = static_cast<int>(psi.size());
    for (int z = 0; z < n; ++z) psi[z] *= (z & bit) ? e1 : e0;
}

inline void apply_h(CVec& psi, int q) {
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const int bit = 1 << q;
    const int n = static_cast<int>(psi.size());
    for (int z = 0; z < n; ++z) {
        if (z & bit) continue;
        const std::complex<double> a0 = psi[z];
        const std::complex<double> a1 = psi[z | bit];
        psi[z] = inv_sqrt2 * (a0 + a1);
        psi[z | bit] = inv_sqrt2 * (a0 - a1);
    }
}

inline void apply_cz(CVec& psi, int q1, int q2) {
    const int mask = (1 << q1) | (1 << q2);
    const int n = static_cast<int>(psi.size());
    for (int z = 0; z < n; ++z)
        if ((z & mask) == mask) psi[z] = -psi[z];
}

// Entangling ring with wrap-around: CZ(0,1), ..., CZ(n-1,0). Degenerates to
// a single CZ for two qubits and to nothing for one.
inline void apply_cz_ring(CVec& psi, int n_q) {
    if (n_q < 2) return;
    if (n_q == 2) {
        apply_cz(psi, 0, 1);
        return;
    }
    for (int q = 0; q < n_q; ++q) apply_cz(psi, q, (q + 1) % n_q);
}

// Builds |psi(a, theta)> from |0...0>. Per layer and qubit: encoding
// R_Y(pi*a), R_Z(pi*a) (data re-uploading, one angle slot each), trainable
// R_Z(theta), R_Y(theta), then the CZ ring. Slot layout is
// index = (layer*n_q + qubit)*2 + {0: first gate, 1: second gate}.
inline CVec build_state(const CircuitSpec& spec, const Vec& a, const Vec& theta) {
    if (a.size() != spec.angle_count()) throw dimension_error("build_state: angle vector size mismatch");
    if (theta.size() != spec.param_count()) throw dimension_error("build_state: theta size mismatch");
    CVec psi = CVec::Zero(spec.dim());
    psi[0] = 1.0;
    for (int layer = 0; layer < spec.L; ++layer) {
        for (int q = 0; q < spec.n_q; ++q) {
            const int slot = (layer * spec.n_q + q) * 2;
            apply_ry(psi, q, std::numbers::pi * a[slot]);
            apply_rz(psi, q, std::numbers::pi * a[slot + 1]);
        }
        for (int q = 0; q < spec.n_q; ++q) {
            const int slot = (layer * spec.n_q + q) * 2;
            apply_rz(psi, q, theta[slot]);
            apply_ry(psi, q, theta[slot + 1]);
        }
        apply_cz_ring(psi, spec.n_q);
    }
    return psi;
}

// Tracks quantum-resource consumption: one "circuit" per measurement
// setting executed, N_s shots each. Feeds the Theorem-1 style accounting.
struct ShotLedger {
    std::uint64_t circuits = 0;
    std::uint64_t shots = 0;

    void add_groups(int groups, std::uint64_t shots_per_group) {
        circuits += static_cast<std::uint64_t>(groups);
        shots += static_cast<std::uint64_t>(groups) * shots_per_group;
    }
};

namespace detail {

// Expectations of the Z family from a probability histogram over basis
// states: singles first, then pairs (i<j) in lexicographic order.
inline void z_family_from_probs(const Vec& probs, int n_q, double* out) {
    int idx = 0;
    for (int i = 0; i < n_q; ++i) {
        double e = 0.0;
        for (int z = 0; z < probs.size(); ++z) e += ((z >> i) & 1) ? -probs[z] : probs[z];
        out[idx++] = e;
    }
    for (int i = 0; i < n_q; ++i) {
        for (int j = i + 1; j < n_q; ++j) {
            double e = 0.0;
            for (int z = 0; z < probs.size(); ++z)
                e += (((z >> i) ^ (z >> j)) & 1) ? -probs[z] : probs[z];
            out[idx++] = e;
        }
    }
}

inline Vec probs_of(const CVec& psi) {
    Vec p(psi.size());
    for (int z = 0; z < psi.size(); ++z) p[z] = std::norm(psi[z]);
    return p;
}

inline void check_normalized(const CVec& psi) {
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-6)
        throw value_error("feature extraction: state is not normalized");
}

} // namespace detail

// Exact Pauli expectations, ordered
//   [Z_1..Z_nq, Z_iZ_j (i<j), X_1..X_nq, X_iX_j (i<j)].
// The X family is read off the state after a Hadamard on every qubit; both
// families count as one measurement setting each.
inline Vec exact_features(const CircuitSpec& spec, const CVec& psi, ShotLedger* ledger = nullptr) {
    if (psi.size() != spec.dim()) throw dimension_error("exact_features: state size mismatch");
    detail::check_normalized(psi);
    const int n_q = spec.n_q;
    const int half = feature_count(n_q) / 2;
    Vec f(feature_count(n_q));
    detail::z_family_from_probs(detail::probs_of(psi), n_q, f.data());
    CVec rotated = psi;
    for (int q = 0; q < n_q; ++q) apply_h(rotated, q);
    detail::z_family_from_probs(detail::probs_of(rotated), n_q, f.data() + half);
    if (ledger) ledger->add_groups(measurement_groups(spec), 0);
    return f;
}

// Shot-sampled Pauli expectations: N_s bitstrings in the Z basis and N_s in
// the X basis (two settings total, independent of n_q). Single-qubit
// estimates are means of (-1)^bit, pairwise ones means of (-1)^(bit_i ^ bit_j),
// all from the same draws.
inline Vec sampled_features(const CircuitSpec& spec, const CVec& psi, int n_shots, Rng& rng,
                            ShotLedger* ledger = nullptr) {
    if (psi.size() != spec.dim()) throw dimension_error("sampled_features: state size mismatch");
    if (n_shots < 1) throw value_error("sampled_features: shot count must be positive");
    detail::check_normalized(psi);
    const int n_q = spec.n_q;
    const int dim = spec.dim();
    const int half = feature_count(n_q) / 2;
    Vec f(feature_count(n_q));

    CVec rotated = psi;
    for (int q = 0; q < n_q; ++q) apply_h(rotated, q);

    const auto sample_family = [&](const CVec& state, double* out) {
        const Vec probs = detail::probs_of(state);
        Vec cdf(dim);
        double acc = 0.0;
        for (int z = 0; z < dim; ++z) {
            acc += probs[z];
            cdf[z] = acc;
        }
        Vec hist = Vec::Zero(dim);
        for (int shot = 0; shot < n_shots; ++shot) {
            const double u = rng.uniform() * acc;
            int lo = 0, hi = dim - 1;
            while (lo < hi) {
                const int mid = (lo + hi) / 2;
                if (cdf[mid] > u) hi = mid; else lo = mid + 1;
            }
            hist[lo] += 1.0;
        }
        hist /= static_cast<double>(n_shots);
        detail::z_family_from_probs(hist, n_q, out);
    };

    sample_family(psi, f.data());
    sample_family(rotated, f.data() + half);
    if (ledger) ledger->add_groups(measurement_groups(spec), static_cast<std::uint64_t>(n_shots));
    return f;
}

} // namespace qfan
