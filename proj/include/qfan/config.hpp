#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "qfan/common.hpp"

namespace qfan {

enum class FeatureKind { quantum, quantum_weight1, rff };

inline std::string to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::quantum: return "quantum";
        case FeatureKind::quantum_weight1: return "weight1";
        case FeatureKind::rff: return "rff";
    }
    return "quantum";
}

inline FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "quantum") return FeatureKind::quantum;
    if (s == "weight1") return FeatureKind::quantum_weight1;
    if (s == "rff") return FeatureKind::rff;
    throw value_error("unknown feature kind: " + s);
}

// One flat record of every knob a run needs. Serialized as "key = value"
// lines with a versioned schema field; unknown keys are rejected.
struct RunConfig {
    // geometry
    int d = 12;
    int b = 6;
    int m = 32;
    // circuit
    int n_q = 3;
    int L = 2;
    // optimization
    int T = 120;
    int n_b = 128;
    int N_s = 512;
    double alpha = 1e-3;
    double spsa_a0 = 1.0;
    double spsa_c0 = 0.1;
    double spsa_A = -1.0;        // < 0 means use 0.1 * T
    std::string kernel_bandwidth = "median"; // "median" or a fixed number
    bool exact = false;          // exact expectations instead of shots
    // residual sampler
    int clusters = 8;
    int gate_epochs = 500;
    double gate_step = 0.1;
    int kmeans_restarts = 5;
    int kmeans_iters = 100;
    // feature stage
    std::string features = "quantum";
    int rff_features = 12;       // feature width when features = rff
    // misc
    std::uint64_t seed = 1;
    int threads = 1;

    [[nodiscard]] double spsa_stability() const { return spsa_A >= 0.0 ? spsa_A : 0.1 * T; }
    [[nodiscard]] FeatureKind feature_kind() const { return feature_kind_from_string(features); }
    [[nodiscard]] double fixed_bandwidth_or(double fallback) const {
        if (kernel_bandwidth == "median") return fallback;
        return std::stod(kernel_bandwidth);
    }
    [[nodiscard]] bool bandwidth_is_median() const { return kernel_bandwidth == "median"; }
};

inline void validate_config(const RunConfig& c) {
    if (c.d < 1 || c.b < 1 || c.m < 1) throw value_error("config: d, b, m must be positive");
    if (c.b > c.d) throw value_error("config: block size exceeds pixel count");
    if (c.n_q < 1 || c.L < 1) throw value_error("config: n_q and L must be positive");
    if (c.T < 1) throw value_error("config: T must be at least 1");
    if (c.n_b < 2) throw value_error("config: n_b must be at least 2 (MMD needs pairs)");
    if (c.N_s < 1) throw value_error("config: N_s must be positive");
    if (c.alpha <= 0.0) throw value_error("config: alpha must be positive");
    if (c.clusters < 1) throw value_error("config: clusters must be positive");
    if (c.threads < 1) throw value_error("config: threads must be positive");
    if (!c.bandwidth_is_median()) {
        double h = 0.0;
        try {
            h = std::stod(c.kernel_bandwidth);
        } catch (const std::exception&) {
            throw value_error("config: kernel_bandwidth must be 'median' or a number");
        }
        if (h <= 0.0) throw value_error("config: fixed kernel bandwidth must be positive");
    }
    feature_kind_from_string(c.features); // throws on unknown
}

inline constexpr const char* config_schema = "qfan-run-v1";

inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    os << "schema = " << config_schema << "\n";
    os << "d = " << c.d << "\n";
    os << "b = " << c.b << "\n";
    os << "m = " << c.m << "\n";
    os << "n_q = " << c.n_q << "\n";
    os << "L = " << c.L << "\n";
    os << "T = " << c.T << "\n";
    os << "n_b = " << c.n_b << "\n";
    os << "N_s = " << c.N_s << "\n";
    os << "alpha = " << fmt_double(c.alpha) << "\n";
    os << "spsa_a0 = " << fmt_double(c.spsa_a0) << "\n";
    os << "spsa_c0 = " << fmt_double(c.spsa_c0) << "\n";
    os << "spsa_A = " << fmt_double(c.spsa_A) << "\n";
    os << "kernel_bandwidth = " << c.kernel_bandwidth << "\n";
    os << "exact = " << (c.exact ? "true" : "false") << "\n";
    os << "clusters = " << c.clusters << "\n";
    os << "gate_epochs = " << c.gate_epochs << "\n";
    os << "gate_step = " << fmt_double(c.gate_step) << "\n";
    os << "kmeans_restarts = " << c.kmeans_restarts << "\n";
    os << "kmeans_iters = " << c.kmeans_iters << "\n";
    os << "features = " << c.features << "\n";
    os << "rff_features = " << c.rff_features << "\n";
    os << "seed = " << c.seed << "\n";
    os << "threads = " << c.threads << "\n";
    return os.str();
}

inline RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw data_error("config line " + std::to_string(lineno) + ": expected 'key = value'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    const auto it = kv.find("schema");
    if (it == kv.end()) throw data_error("config: missing schema field");
    if (it->second != config_schema) throw data_error("config: unsupported schema '" + it->second + "'");
    kv.erase(it);

    const auto take_int = [&kv](const std::string& key, int& dst) {
        auto i = kv.find(key);
        if (i == kv.end()) return;
        dst = std::stoi(i->second);
        kv.erase(i);
    };
    const auto take_u64 = [&kv](const std::string& key, std::uint64_t& dst) {
        auto i = kv.find(key);
        if (i == kv.end()) return;
        dst = std::stoull(i->second);
        kv.erase(i);
    };
    const auto take_double = [&kv](const std::string& key, double& dst) {
        auto i = kv.find(key);
        if (i == kv.end()) return;
        dst = std::stod(i->second);
        kv.erase(i);
    };
    const auto take_string = [&kv](const std::string& key, std::string& dst) {
        auto i = kv.find(key);
        if (i == kv.end()) return;
        dst = i->second;
        kv.erase(i);
    };
    const auto take_bool = [&kv](const std::string& key, bool& dst) {
        auto i = kv.find(key);
        if (i == kv.end()) return;
        if (i->second == "true") dst = true;
        else if (i->second == "false") dst = false;
        else throw data_error("config: boolean key '" + key + "' must be true or false");
        kv.erase(i);
    };

    take_int("d", c.d);
    take_int("b", c.b);
    take_int("m", c.m);
    take_int("n_q", c.n_q);
    take_int("L", c.L);
    take_int("T", c.T);
    take_int("n_b", c.n_b);
    take_int("N_s", c.N_s);
    take_double("alpha", c.alpha);
    take_double("spsa_a0", c.spsa_a0);
    take_double("spsa_c0", c.spsa_c0);
    take_double("spsa_A", c.spsa_A);
    take_string("kernel_bandwidth", c.kernel_bandwidth);
    take_bool("exact", c.exact);
    take_int("clusters", c.clusters);
    take_int("gate_epochs", c.gate_epochs);
    take_double("gate_step", c.gate_step);
    take_int("kmeans_restarts", c.kmeans_restarts);
    take_int("kmeans_iters", c.kmeans_iters);
    take_string("features", c.features);
    take_int("rff_features", c.rff_features);
    take_u64("seed", c.seed);
    take_int("threads", c.threads);

    if (!kv.empty()) throw data_error("config: unknown key '" + kv.begin()->first + "'");
    validate_config(c);
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("load_config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

// Table-2 simulator-column defaults at d = 12.
inline RunConfig default_config_d12() { return RunConfig{}; }

// Appendix configuration: d = 25 in five blocks, three layers (18 shared
// parameters), wider sketch.
inline RunConfig default_config_d25() {
    RunConfig c;
    c.d = 25;
    c.b = 5;
    c.m = 64;
    c.L = 3;
    return c;
}

} // namespace qfan
