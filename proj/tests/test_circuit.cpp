#include <catch2/catch.hpp>

#include "qfan/circuit.hpp"
#include "test_util.hpp"

using namespace qfan;

namespace {

CVec plus_state(int n_q) {
    CVec psi = CVec::Zero(1 << n_q);
    psi[0] = 1.0;
    for (int q = 0; q < n_q; ++q) apply_h(psi, q);
    return psi;
}

} // namespace

TEST_CASE("feature and group counts", "[circuit]") {
    CHECK(feature_count(1) == 2);
    CHECK(feature_count(3) == 12);
    CHECK(feature_count(5) == 30);
    CHECK(feature_count(6) == 42);
    CHECK(feature_count(8) == 72);
    CHECK(feature_count(10) == 110);
    for (const int n_q : {1, 3, 10})
        CHECK(measurement_groups(make_circuit_spec(n_q, 1)) == 2);
}

TEST_CASE("build_state basics", "[circuit]") {
    SECTION("all-zero angles and parameters give the vacuum") {
        const CircuitSpec spec = make_circuit_spec(3, 2);
        const CVec psi = build_state(spec, Vec::Zero(spec.angle_count()), Vec::Zero(spec.param_count()));
        CHECK(std::abs(psi[0] - 1.0) < 1e-14);
        for (int z = 1; z < 8; ++z) CHECK(std::abs(psi[z]) < 1e-14);
    }
    SECTION("single qubit half rotation") {
        const CircuitSpec spec = make_circuit_spec(1, 1);
        Vec a(2);
        a << 0.5, 0.0; // R_Y(pi/2), R_Z(0)
        const CVec psi = build_state(spec, a, Vec::Zero(2));
        CHECK(std::abs(psi[0] - std::cos(M_PI / 4)) < 1e-14);
        CHECK(std::abs(psi[1] - std::sin(M_PI / 4)) < 1e-14);
    }
    SECTION("shape errors") {
        const CircuitSpec spec = make_circuit_spec(2, 1);
        CHECK_THROWS_AS(build_state(spec, Vec::Zero(3), Vec::Zero(4)), dimension_error);
        CHECK_THROWS_AS(build_state(spec, Vec::Zero(4), Vec::Zero(3)), dimension_error);
    }
    SECTION("matches the dense unitary-product oracle") {
        Rng rng(11);
        for (const int n_q : {1, 2, 3, 4}) {
            const CircuitSpec spec = make_circuit_spec(n_q, 2);
            for (int rep = 0; rep < 10; ++rep) {
                Vec a(spec.angle_count()), theta(spec.param_count());
                for (int i = 0; i < a.size(); ++i) a[i] = rng.uniform();
                for (int i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-M_PI, M_PI);
                const CVec got = build_state(spec, a, theta);
                const CVec want = oracle::circuit_state(n_q, 2, a, theta);
                CHECK((got - want).lpNorm<Eigen::Infinity>() < 1e-10);
            }
        }
    }
    SECTION("norm preserved after every gate") {
        Rng rng(13);
        CVec psi = CVec::Zero(8);
        psi[0] = 1.0;
        for (int step = 0; step < 50; ++step) {
            const int q = static_cast<int>(rng.below(3));
            switch (rng.below(4)) {
                case 0: apply_ry(psi, q, rng.uniform(-M_PI, M_PI)); break;
                case 1: apply_rz(psi, q, rng.uniform(-M_PI, M_PI)); break;
                case 2: apply_h(psi, q); break;
                default: apply_cz(psi, q, (q + 1) % 3); break;
            }
            CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("exact features on reference states", "[circuit]") {
    SECTION("computational vacuum") {
        const CircuitSpec spec = make_circuit_spec(3, 1);
        CVec psi = CVec::Zero(8);
        psi[0] = 1.0;
        const Vec f = exact_features(spec, psi);
        // [Z1 Z2 Z3, Z12 Z13 Z23, X1 X2 X3, X12 X13 X23]
        for (int i = 0; i < 6; ++i) CHECK(f[i] == Approx(1.0).margin(1e-12));
        for (int i = 6; i < 12; ++i) CHECK(f[i] == Approx(0.0).margin(1e-12));
    }
    SECTION("uniform superposition") {
        const CircuitSpec spec = make_circuit_spec(3, 1);
        const Vec f = exact_features(spec, plus_state(3));
        for (int i = 0; i < 6; ++i) CHECK(f[i] == Approx(0.0).margin(1e-12));
        for (int i = 6; i < 12; ++i) CHECK(f[i] == Approx(1.0).margin(1e-12));
    }
    SECTION("CZ on |++> zeroes the X family") {
        const CircuitSpec spec = make_circuit_spec(2, 1);
        CVec psi = plus_state(2);
        apply_cz(psi, 0, 1);
        const Vec f = exact_features(spec, psi);
        // ordering: [Z1, Z2, Z12, X1, X2, X12]
        CHECK(f[2] == Approx(0.0).margin(1e-12));
        CHECK(f[3] == Approx(0.0).margin(1e-12));
        CHECK(f[4] == Approx(0.0).margin(1e-12));
        CHECK(f[5] == Approx(0.0).margin(1e-12));
    }
    SECTION("unnormalized state rejected") {
        const CircuitSpec spec = make_circuit_spec(2, 1);
        CVec bad = CVec::Zero(4);
        bad[0] = 2.0;
        CHECK_THROWS_AS(exact_features(spec, bad), value_error);
    }
    SECTION("bounds hold on random states") {
        Rng rng(17);
        const CircuitSpec spec = make_circuit_spec(3, 2);
        for (int rep = 0; rep < 20; ++rep) {
            Vec a(spec.angle_count()), theta(spec.param_count());
            for (int i = 0; i < a.size(); ++i) a[i] = rng.uniform();
            for (int i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-M_PI, M_PI);
            const Vec f = exact_features(spec, build_state(spec, a, theta));
            for (int i = 0; i < f.size(); ++i) CHECK((f[i] >= -1.0 && f[i] <= 1.0));
        }
    }
}

TEST_CASE("sampled features behave statistically", "[circuit]") {
    const CircuitSpec spec = make_circuit_spec(3, 2);

    SECTION("deterministic outcome for the vacuum") {
        CVec psi = CVec::Zero(8);
        psi[0] = 1.0;
        Rng rng(1);
        const Vec f = sampled_features(spec, psi, 64, rng);
        for (int i = 0; i < 6; ++i) CHECK(f[i] == 1.0);
    }
    SECTION("invalid shot count") {
        CVec psi = CVec::Zero(8);
        psi[0] = 1.0;
        Rng rng(1);
        CHECK_THROWS_AS(sampled_features(spec, psi, 0, rng), value_error);
    }
    SECTION("exactly two measurement settings are consumed") {
        CVec psi = plus_state(3);
        Rng rng(2);
        ShotLedger ledger;
        sampled_features(spec, psi, 32, rng, &ledger);
        CHECK(ledger.circuits == 2);
        CHECK(ledger.shots == 64);
        exact_features(spec, psi, &ledger);
        CHECK(ledger.circuits == 4);
        CHECK(ledger.shots == 64);
    }
    SECTION("estimator variance matches (1 - f^2)/N_s and stays below 1/N_s") {
        // A product state with moderate expectations, so the binomial
        // variance formula is exercised away from its extremes.
        CVec psi = CVec::Zero(8);
        psi[0] = 1.0;
        for (int q = 0; q < 3; ++q) apply_ry(psi, q, 0.9);
        const Vec exact = exact_features(spec, psi);
        const int n_shots = 128;
        const int reps = 1000;
        Mat samples(reps, 12);
        Rng base(77);
        for (int r = 0; r < reps; ++r) {
            Rng rng = base.derived(r);
            samples.row(r) = sampled_features(spec, psi, n_shots, rng).transpose();
        }
        for (int i = 0; i < 12; ++i) {
            std::vector<double> col(reps);
            for (int r = 0; r < reps; ++r) col[static_cast<std::size_t>(r)] = samples(r, i);
            const double var = oracle::variance_of(col);
            const double predicted = (1.0 - exact[i] * exact[i]) / n_shots;
            CHECK(var <= 1.0 / n_shots);
            CHECK(var == Approx(predicted).margin(6.0 * predicted * std::sqrt(2.0 / reps) + 1e-6));
            CHECK(oracle::mean_of(col) == Approx(exact[i]).margin(5.0 * std::sqrt(predicted / reps) + 1e-9));
        }
    }
    SECTION("bounds hold for sampled features") {
        CVec psi = plus_state(3);
        Rng rng(5);
        const Vec f = sampled_features(spec, psi, 16, rng);
        for (int i = 0; i < f.size(); ++i) CHECK((f[i] >= -1.0 && f[i] <= 1.0));
    }
    SECTION("RMS error decays like one over sqrt shots") {
        Rng rng(23);
        Vec a(spec.angle_count()), theta(spec.param_count());
        for (int i = 0; i < a.size(); ++i) a[i] = rng.uniform();
        for (int i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-M_PI, M_PI);
        const CVec psi = build_state(spec, a, theta);
        const Vec exact = exact_features(spec, psi);
        std::vector<double> log_ns, log_rms;
        for (int p = 6; p <= 12; ++p) {
            const int n_shots = 1 << p;
            double acc = 0.0;
            const int reps = 24;
            for (int r = 0; r < reps; ++r) {
                Rng srng = rng.derived(p, r);
                acc += (sampled_features(spec, psi, n_shots, srng) - exact).squaredNorm();
            }
            log_ns.push_back(std::log2(static_cast<double>(n_shots)));
            log_rms.push_back(std::log2(std::sqrt(acc / (reps * 12.0))));
        }
        const double slope = oracle::slope_of(log_ns, log_rms);
        CHECK(slope == Approx(-0.5).margin(0.1));
    }
}
