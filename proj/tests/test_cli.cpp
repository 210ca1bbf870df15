#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "qfan/bundle_io.hpp"
#include "qfan/config.hpp"
#include "qfan/data.hpp"
#include "qfan/generation.hpp"
#include "qfan/report_io.hpp"

using namespace qfan;

namespace {

namespace fs = std::filesystem;

std::string cli() { return QFAN_CLI_PATH; }

int run(const std::string& args) {
    const std::string cmd = cli() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("qfan_cli_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("run config parsing", "[cli]") {
    SECTION("round trip") {
        RunConfig cfg;
        cfg.d = 25;
        cfg.b = 5;
        cfg.L = 3;
        cfg.m = 64;
        cfg.seed = 99;
        cfg.kernel_bandwidth = "0.5";
        const RunConfig back = parse_config(serialize_config(cfg));
        CHECK(back.d == 25);
        CHECK(back.L == 3);
        CHECK(back.seed == 99);
        CHECK(back.fixed_bandwidth_or(1.0) == 0.5);
        CHECK(serialize_config(back) == serialize_config(cfg));
    }
    SECTION("unknown keys are rejected") {
        const std::string text = std::string("schema = ") + config_schema + "\nwat = 7\n";
        CHECK_THROWS_AS(parse_config(text), data_error);
    }
    SECTION("missing or wrong schema is rejected") {
        CHECK_THROWS_AS(parse_config("d = 12\n"), data_error);
        CHECK_THROWS_AS(parse_config("schema = qfan-run-v999\n"), data_error);
    }
    SECTION("validation failures surface") {
        RunConfig cfg;
        cfg.n_b = 1; // MMD needs pairs
        CHECK_THROWS_AS(validate_config(cfg), value_error);
        RunConfig bw;
        bw.kernel_bandwidth = "banana";
        CHECK_THROWS_AS(validate_config(bw), value_error);
    }
    SECTION("comments and blank lines are fine") {
        std::string text = serialize_config(RunConfig{});
        text += "\n# trailing comment\n\n";
        CHECK_NOTHROW(parse_config(text));
    }
}

TEST_CASE("bundle save/load round trip", "[cli]") {
    const Dataset ds = synth_showers(ShowerRecipe{}, 12, 300, 5);
    RunConfig cfg;
    cfg.T = 3;
    cfg.n_b = 16;
    cfg.N_s = 16;
    cfg.threads = 2;
    const TrainResult res = train(cfg, ds.Y);
    TempDir tmp;
    const std::string dir = tmp / "bundle";
    save_bundle(res.bundle, dir);
    const ModelBundle back = load_bundle(dir);

    CHECK(back.theta == res.bundle.theta);
    CHECK(back.sketch_seed == res.bundle.sketch_seed);
    CHECK(back.sketch.plan.bucket == res.bundle.sketch.plan.bucket);
    for (int beta = 0; beta < 2; ++beta) {
        CHECK(back.decoders[static_cast<std::size_t>(beta)].W ==
              res.bundle.decoders[static_cast<std::size_t>(beta)].W);
        CHECK(back.banks[static_cast<std::size_t>(beta)].centroids ==
              res.bundle.banks[static_cast<std::size_t>(beta)].centroids);
        CHECK(back.gates[static_cast<std::size_t>(beta)].W ==
              res.bundle.gates[static_cast<std::size_t>(beta)].W);
        for (int k = 0; k < back.banks[static_cast<std::size_t>(beta)].M; ++k)
            CHECK(back.banks[static_cast<std::size_t>(beta)].members[static_cast<std::size_t>(k)] ==
                  res.bundle.banks[static_cast<std::size_t>(beta)].members[static_cast<std::size_t>(k)]);
    }
    // a reloaded bundle generates identically
    const Mat a = generate_batch(res.bundle, 8, 16, 3, true);
    const Mat b = generate_batch(back, 8, 16, 3, true);
    CHECK(a == b);
    CHECK(bundle_hash(back) == bundle_hash(res.bundle));
}

TEST_CASE("command line surface", "[cli]") {
    TempDir tmp;

    SECTION("gen-data writes a dataset and identical reruns") {
        const std::string out = tmp / "d.qfds";
        REQUIRE(run("gen-data --d 12 --n 50 --seed 3 --out " + out) == 0);
        const Dataset ds = load_dataset(out);
        CHECK(ds.n() == 50);
        CHECK(ds.d() == 12);
        const std::string bytes_a = slurp(out);
        REQUIRE(run("gen-data --d 12 --n 50 --seed 3 --out " + out) == 0);
        CHECK(slurp(out) == bytes_a);
        CHECK(fs::exists(out + ".meta.json"));
    }
    SECTION("gen-data d=25 column count") {
        const std::string out = tmp / "d25.qfds";
        REQUIRE(run("gen-data --d 25 --n 30 --seed 3 --out " + out) == 0);
        CHECK(load_dataset(out).d() == 25);
    }
    SECTION("usage errors exit with 1") {
        CHECK(run("definitely-not-a-command") == 1);
        CHECK(run("train") == 1); // missing required --data
    }
    SECTION("validation failures exit with 2") {
        const std::string recipe = tmp / "bad.recipe";
        std::ofstream f(recipe);
        f << "schema = qfan-recipe-v1\nenergy_spread = -1\n";
        f.close();
        CHECK(run("gen-data --d 12 --n 10 --recipe " + recipe + " --out " + (tmp / "x.qfds")) == 2);
        const std::string cfg = tmp / "bad.cfg";
        std::ofstream g(cfg);
        g << "schema = qfan-run-v1\nunknown_key = 1\n";
        g.close();
        const std::string data = tmp / "t.qfds";
        REQUIRE(run("gen-data --d 12 --n 40 --seed 1 --out " + data) == 0);
        CHECK(run("train --data " + data + " --config " + cfg + " --out " + (tmp / "b")) == 2);
    }
    SECTION("scale-table reproduces the design points") {
        const std::string out = tmp / "scale.csv";
        REQUIRE(run("scale-table --out " + out) == 0);
        const std::string csv = slurp(out);
        CHECK(csv.find("12,3,12,8,2,32") != std::string::npos);
        CHECK(csv.find("6480,8,72,48,135,256") != std::string::npos);
        CHECK(csv.find("40500,10,110,73,553,512") != std::string::npos);
    }
    SECTION("tiny train/generate/evaluate chain") {
        const std::string data = tmp / "train.qfds";
        REQUIRE(run("gen-data --d 12 --n 120 --seed 5 --out " + data) == 0);
        const std::string cfg_path = tmp / "run.cfg";
        RunConfig cfg;
        cfg.T = 2;
        cfg.n_b = 8;
        cfg.N_s = 8;
        cfg.threads = 2;
        std::ofstream f(cfg_path);
        f << serialize_config(cfg);
        f.close();
        const std::string bundle = tmp / "bundle";
        REQUIRE(run("train --data " + data + " --config " + cfg_path + " --out " + bundle) == 0);
        CHECK(fs::exists(bundle + "/theta.txt"));
        CHECK(fs::exists(bundle + "/history.jsonl"));
        CHECK(fs::exists(bundle + "/train_summary.json"));
        const json summary = load_json_file(bundle + "/train_summary.json");
        CHECK(summary["step_circuits_total"] == summary["expected_step_circuits_total"]);

        const std::string gen = tmp / "gen.qfds";
        REQUIRE(run("generate --bundle " + bundle + " --n 40 --seed 9 --out " + gen) == 0);
        CHECK(load_dataset(gen).n() == 40);

        const std::string report = tmp / "report.json";
        REQUIRE(run("evaluate --truth " + data + " --gen " + gen + " --blocks 2 --out " + report +
                    " --csv-dir " + (tmp / "csv")) == 0);
        const json rep = load_json_file(report);
        CHECK(rep["d"] == 12);
        CHECK(rep["boundary_profile"].size() == 1);
        CHECK(fs::exists(tmp / "csv/marginals.csv"));
        CHECK(fs::exists(tmp / "csv/corr_diff.csv"));
        CHECK(fs::exists(tmp / "csv/energy_sum.csv"));

        // evaluating a dataset against itself gives all-zero distances
        const std::string self_report = tmp / "self.json";
        REQUIRE(run("evaluate --truth " + data + " --gen " + data + " --blocks 2 --out " + self_report) == 0);
        const json self = load_json_file(self_report);
        CHECK(self["w1_mean"] == 0.0);
        CHECK(self["energy_w1"] == 0.0);
    }
    SECTION("theory-check ridge suite passes") {
        CHECK(run("theory-check --suite ridge --out " + (tmp / "ridge.json")) == 0);
    }
}
