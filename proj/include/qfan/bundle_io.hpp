#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qfan/common.hpp"
#include "qfan/config.hpp"
#include "qfan/model.hpp"

namespace qfan {

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw data_error("cannot open for write: " + path);
    os << text;
    if (!os) throw data_error("write failed: " + path);
}

inline std::string read_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("cannot open: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

inline void write_matrix_rows(std::ostream& os, const Mat& M) {
    for (int i = 0; i < M.rows(); ++i) {
        for (int j = 0; j < M.cols(); ++j) {
            if (j) os << ' ';
            os << fmt_double(M(i, j));
        }
        os << '\n';
    }
}

inline Mat read_matrix_rows(std::istream& is, int rows, int cols, const std::string& what) {
    Mat M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (!(is >> M(i, j))) throw data_error("truncated matrix in " + what);
    return M;
}

inline std::string block_file(const std::string& dir, const std::string& stem, int beta) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%03d.txt", stem.c_str(), beta);
    return dir + "/" + buf;
}

} // namespace detail

inline std::string bundle_hash(const ModelBundle& bundle) {
    std::uint64_t h = fnv1a64(bundle.theta.data(), sizeof(double) * static_cast<std::size_t>(bundle.theta.size()));
    for (const auto& dec : bundle.decoders)
        h = fnv1a64(dec.W.data(), sizeof(double) * static_cast<std::size_t>(dec.W.size()), h);
    h = fnv1a64(&bundle.sketch_seed, sizeof(bundle.sketch_seed), h);
    return hex64(h);
}

inline void save_bundle(const ModelBundle& bundle, const std::string& dir) {
    std::filesystem::create_directories(dir);
    detail::write_text(dir + "/config.txt", serialize_config(bundle.config));

    {
        std::ostringstream os;
        os << "qfan-theta v1 n_q=" << bundle.spec.n_q << " L=" << bundle.spec.L << "\n";
        for (int i = 0; i < bundle.theta.size(); ++i) os << fmt_double(bundle.theta[i]) << "\n";
        detail::write_text(dir + "/theta.txt", os.str());
    }
    {
        std::ostringstream os;
        os << "qfan-sketch v1 d=" << bundle.sketch.plan.d << " m=" << bundle.sketch.plan.m
           << " seed=" << bundle.sketch_seed << "\n";
        detail::write_text(dir + "/sketch.txt", os.str());
    }
    for (int beta = 0; beta < bundle.part.B; ++beta) {
        const auto& dec = bundle.decoders[static_cast<std::size_t>(beta)];
        std::ostringstream os;
        os << "qfan-decoder v1 p_f=" << dec.W.rows() << " b=" << dec.W.cols()
           << " alpha=" << fmt_double(dec.alpha) << " beta=" << beta << "\n";
        detail::write_matrix_rows(os, dec.W);
        detail::write_text(detail::block_file(dir, "decoder", beta), os.str());

        const auto& bank = bundle.banks[static_cast<std::size_t>(beta)];
        std::ostringstream ob;
        ob << "qfan-bank v1 M=" << bank.M << " b=" << bank.centroids.cols() << "\n";
        for (int k = 0; k < bank.M; ++k) {
            ob << "cluster " << k << " " << bank.members[static_cast<std::size_t>(k)].rows() << "\n";
            detail::write_matrix_rows(ob, bank.centroids.row(k));
            detail::write_matrix_rows(ob, bank.members[static_cast<std::size_t>(k)]);
        }
        detail::write_text(detail::block_file(dir, "bank", beta), ob.str());

        const auto& gate = bundle.gates[static_cast<std::size_t>(beta)];
        std::ostringstream og;
        og << "qfan-gate v1 M=" << gate.W.rows() << " m=" << gate.W.cols() << "\n";
        detail::write_matrix_rows(og, gate.W);
        detail::write_matrix_rows(og, gate.c.transpose());
        detail::write_text(detail::block_file(dir, "gate", beta), og.str());
    }
    if (bundle.config.feature_kind() == FeatureKind::rff) {
        std::ostringstream os;
        os << "qfan-rff v1 p_f=" << bundle.rff.W.rows() << " m=" << bundle.rff.W.cols() << "\n";
        detail::write_matrix_rows(os, bundle.rff.W);
        detail::write_matrix_rows(os, bundle.rff.b.transpose());
        detail::write_text(dir + "/rff.txt", os.str());
    }
}

namespace detail {

inline void expect_token(std::istream& is, const std::string& want, const std::string& what) {
    std::string got;
    if (!(is >> got) || got != want)
        throw data_error("malformed " + what + ": expected '" + want + "'");
}

inline long long read_kv_int(std::istream& is, const std::string& key, const std::string& what) {
    std::string tok;
    if (!(is >> tok)) throw data_error("truncated header in " + what);
    const auto eq = tok.find('=');
    if (eq == std::string::npos || tok.substr(0, eq) != key)
        throw data_error("malformed " + what + ": expected key '" + key + "'");
    return std::stoll(tok.substr(eq + 1));
}

inline double read_kv_double(std::istream& is, const std::string& key, const std::string& what) {
    std::string tok;
    if (!(is >> tok)) throw data_error("truncated header in " + what);
    const auto eq = tok.find('=');
    if (eq == std::string::npos || tok.substr(0, eq) != key)
        throw data_error("malformed " + what + ": expected key '" + key + "'");
    return std::stod(tok.substr(eq + 1));
}

} // namespace detail

inline ModelBundle load_bundle(const std::string& dir) {
    ModelBundle bundle;
    bundle.config = parse_config(detail::read_text(dir + "/config.txt"));
    bundle.spec = make_circuit_spec(bundle.config.n_q, bundle.config.L);
    bundle.part = make_partition(bundle.config.d, bundle.config.b);

    {
        std::istringstream is(detail::read_text(dir + "/sketch.txt"));
        detail::expect_token(is, "qfan-sketch", "sketch.txt");
        detail::expect_token(is, "v1", "sketch.txt");
        const int d = static_cast<int>(detail::read_kv_int(is, "d", "sketch.txt"));
        const int m = static_cast<int>(detail::read_kv_int(is, "m", "sketch.txt"));
        bundle.sketch_seed = static_cast<std::uint64_t>(detail::read_kv_int(is, "seed", "sketch.txt"));
        if (d != bundle.config.d || m != bundle.config.m)
            throw data_error("sketch.txt dimensions disagree with config");
        bundle.sketch = make_sketch_components(d, m, bundle.spec.angle_count(), bundle.sketch_seed);
    }
    {
        std::istringstream is(detail::read_text(dir + "/theta.txt"));
        detail::expect_token(is, "qfan-theta", "theta.txt");
        detail::expect_token(is, "v1", "theta.txt");
        const int n_q = static_cast<int>(detail::read_kv_int(is, "n_q", "theta.txt"));
        const int L = static_cast<int>(detail::read_kv_int(is, "L", "theta.txt"));
        if (n_q != bundle.spec.n_q || L != bundle.spec.L)
            throw data_error("theta.txt circuit shape disagrees with config");
        bundle.theta = Vec(bundle.spec.param_count());
        for (int i = 0; i < bundle.theta.size(); ++i)
            if (!(is >> bundle.theta[i])) throw data_error("truncated theta.txt");
    }
    for (int beta = 0; beta < bundle.part.B; ++beta) {
        {
            std::istringstream is(detail::read_text(detail::block_file(dir, "decoder", beta)));
            detail::expect_token(is, "qfan-decoder", "decoder");
            detail::expect_token(is, "v1", "decoder");
            const int p_f = static_cast<int>(detail::read_kv_int(is, "p_f", "decoder"));
            const int b = static_cast<int>(detail::read_kv_int(is, "b", "decoder"));
            const double alpha = detail::read_kv_double(is, "alpha", "decoder");
            const int idx = static_cast<int>(detail::read_kv_int(is, "beta", "decoder"));
            if (idx != beta) throw data_error("decoder file block index mismatch");
            RidgeWeights w;
            w.W = detail::read_matrix_rows(is, p_f, b, "decoder");
            w.alpha = alpha;
            w.block_index = beta;
            bundle.decoders.push_back(std::move(w));
        }
        {
            std::istringstream is(detail::read_text(detail::block_file(dir, "bank", beta)));
            detail::expect_token(is, "qfan-bank", "bank");
            detail::expect_token(is, "v1", "bank");
            const int M = static_cast<int>(detail::read_kv_int(is, "M", "bank"));
            const int b = static_cast<int>(detail::read_kv_int(is, "b", "bank"));
            ResidualBank bank;
            bank.M = M;
            bank.centroids = Mat(M, b);
            for (int k = 0; k < M; ++k) {
                detail::expect_token(is, "cluster", "bank");
                int idx = 0, count = 0;
                if (!(is >> idx >> count) || idx != k) throw data_error("malformed bank cluster header");
                bank.centroids.row(k) = detail::read_matrix_rows(is, 1, b, "bank centroid");
                bank.members.push_back(detail::read_matrix_rows(is, count, b, "bank members"));
            }
            bundle.banks.push_back(std::move(bank));
        }
        {
            std::istringstream is(detail::read_text(detail::block_file(dir, "gate", beta)));
            detail::expect_token(is, "qfan-gate", "gate");
            detail::expect_token(is, "v1", "gate");
            const int M = static_cast<int>(detail::read_kv_int(is, "M", "gate"));
            const int m = static_cast<int>(detail::read_kv_int(is, "m", "gate"));
            GateModel gate;
            gate.W = detail::read_matrix_rows(is, M, m, "gate");
            gate.c = detail::read_matrix_rows(is, 1, M, "gate bias").transpose();
            bundle.gates.push_back(std::move(gate));
        }
    }
    if (bundle.config.feature_kind() == FeatureKind::rff) {
        std::istringstream is(detail::read_text(dir + "/rff.txt"));
        detail::expect_token(is, "qfan-rff", "rff");
        detail::expect_token(is, "v1", "rff");
        const int p_f = static_cast<int>(detail::read_kv_int(is, "p_f", "rff"));
        const int m = static_cast<int>(detail::read_kv_int(is, "m", "rff"));
        bundle.rff.W = detail::read_matrix_rows(is, p_f, m, "rff");
        bundle.rff.b = detail::read_matrix_rows(is, 1, p_f, "rff bias").transpose();
    }
    return bundle;
}

} // namespace qfan
