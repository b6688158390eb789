/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "snls/cli.hpp"
#include "snls/config.hpp"
#include "snls/error.hpp"
#include "snls/io.hpp"
#include "snls/skeleton.hpp"

#include "../support/test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace snls {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::Gen;

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("snls-test-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<fs::path> run_dirs(const fs::path& root) {
    std::vector<fs::path> out;
    if (fs::exists(root)) {
        for (const auto& e : fs::directory_iterator(root)) {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

RunConfig random_config(Gen& gen) {
    RunConfig c;
    c.grid.n = std::size_t{16} << gen.index(4);
    c.grid.half_width = gen.uniform(5.0, 40.0);
    c.model.alpha = gen.uniform(1.5, 4.5);
    c.model.lambda = gen.uniform(0.0, 1.0) < 0.5 ? 1.0 : -1.0;
    c.model.beta = gen.uniform(0.0, 1.0);
    c.model.nonlinear = gen.uniform(0.0, 1.0) < 0.8;
    c.noise = NoiseConfig::with_modes(gen.index(5), gen.index(5));
    c.noise.g_shape = gen.uniform(0.0, 1.0) < 0.5 ? GShape::linear : GShape::saturated;
    c.solver.dt = gen.uniform(1e-4, 1e-2);
    c.solver.scheme = gen.uniform(0.0, 1.0) < 0.5 ? NoiseScheme::unitary : NoiseScheme::ito_literal;
    c.solver.field_stride = gen.index(10);
    c.initial.kind = gen.uniform(0.0, 1.0) < 0.5 ? "gaussian" : "fourier_mode";
    c.initial.amplitude = gen.uniform(0.1, 3.0);
    c.initial.mode = static_cast<int>(gen.index(7)) - 3;
    c.control.segments = 1 + gen.index(32);
    c.control.pattern = gen.uniform(0.0, 1.0) < 0.5 ? "zero" : "sine";
    c.control.amplitude = gen.normal();
    c.event.radius = gen.uniform(0.0, 2.0);
    c.event.level = gen.normal();
    c.sweep.epsilons = {gen.uniform(0.1, 0.5), gen.uniform(0.01, 0.1)};
    c.sweep.n_paths = 1 + gen.index(100000);
    if (gen.uniform(0.0, 1.0) < 0.5) {
        c.sweep.rate = gen.uniform(0.0, 1.0);
    }
    if (gen.uniform(0.0, 1.0) < 0.5) {
        c.rate.budget = gen.uniform(0.0, 10.0);
    }
    c.rate.kappa0 = gen.uniform(1.0, 100.0);
    c.diagnose.checks = {"picard", "order"};
    c.diagnose.gap_dts = {gen.uniform(1e-3, 1e-2), 1e-3 / 3.0};
    c.seed = static_cast<std::uint64_t>(gen.uniform(0.0, 1.0) * 1e18);
    c.threads = static_cast<unsigned>(gen.index(9));
    return c;
}

TEST(Config, JsonRoundTripIsExact) {
    Gen gen(31);
    for (int trial = 0; trial < 100; ++trial) {
        const RunConfig c = random_config(gen);
        const json j = to_json(c);
        const RunConfig back = config_from_json(json::parse(j.dump()));
        EXPECT_EQ(back, c) << j.dump();
        EXPECT_EQ(config_hash(back), config_hash(c));
    }
}

TEST(Config, DefaultsValidateAndHashIsSensitive) {
    const RunConfig c;
    EXPECT_NO_THROW(validate(c));
    RunConfig d = c;
    d.solver.dt *= 1.0 + 1e-15;
    EXPECT_NE(config_hash(c), config_hash(d));
    EXPECT_EQ(config_hash(c), config_hash(config_from_json(json::object())));
}

TEST(Config, UnknownKeyIsNamed) {
    try {
        config_from_json(json::parse(R"({"model": {"alpha": 2.0, "bogus": 1}})"));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "model.bogus");
    }
    EXPECT_THROW(config_from_json(json::parse(R"({"grid": {"n": "many"}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"extra": 1})")), ConfigError);
}

TEST(Config, SupercriticalAlphaCitesTheBound) {
    RunConfig c;
    c.model.alpha = 6.0;
    try {
        validate(c);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "model.alpha");
        EXPECT_NE(std::string(e.what()).find("1 < alpha < 1 + 4/d"), std::string::npos) << e.what();
    }
}

TEST(Config, ValidateRejectsBadFields) {
    auto expect_key = [](RunConfig c, const std::string& key) {
        try {
            validate(c);
            ADD_FAILURE() << "no error for " << key;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.key(), key);
        }
    };
    RunConfig c;
    c.solver.dt = -1.0;
    expect_key(c, "solver.dt");
    c = {};
    c.sweep.epsilons = {0.1, 0.2};
    expect_key(c, "sweep.epsilons");
    c = {};
    c.grid.n = 0;
    expect_key(c, "grid.n");
}

TEST(Config, OverridesParseJsonOrString) {
    json j = json::object();
    apply_override(j, "model.alpha=2.5");
    apply_override(j, "initial.kind=fourier_mode");
    apply_override(j, "sweep.epsilons=[0.2,0.1]");
    apply_override(j, "model.nonlinear=false");
    EXPECT_EQ(j["model"]["alpha"], 2.5);
    EXPECT_EQ(j["initial"]["kind"], "fourier_mode");
    EXPECT_EQ(j["sweep"]["epsilons"].size(), 2u);
    EXPECT_EQ(j["model"]["nonlinear"], false);
    const RunConfig c = config_from_json(j);
    EXPECT_EQ(c.model.alpha, 2.5);
    EXPECT_THROW(apply_override(j, "no_equals_sign"), ConfigError);
}

TEST(Io, FormatDoubleRoundTrips) {
    Gen gen(12);
    for (int i = 0; i < 1000; ++i) {
        const double x = gen.normal() * std::pow(10.0, gen.uniform(-300.0, 300.0));
        EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
    }
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Io, FieldDumpRoundTrip) {
    TempDir tmp("dump");
    RunConfig c;
    c.grid.n = 32;
    c.solver.dt = 0.01;
    c.solver.horizon = 0.1;
    c.solver.field_stride = 3;
    const GridPtr g = make_grid(c);
    const Model m = make_model(c, g);
    SolverSettings s = make_solver_settings(c);
    const Trajectory t = solve_skeleton(m, make_initial(c, g), make_control(c, m), s);
    write_field_dump(tmp.path / "f.bin", t);
    const FieldDump d = read_field_dump(tmp.path / "f.bin");
    EXPECT_EQ(d.dim, 1);
    EXPECT_EQ(d.n_per_dim, 32u);
    EXPECT_EQ(d.half_width, c.grid.half_width);
    ASSERT_EQ(d.values.size(), t.fields.size());
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        EXPECT_EQ(d.steps[i], t.field_steps[i]);
        EXPECT_EQ(d.times[i], t.times[t.field_steps[i]]);
        EXPECT_TRUE(std::equal(d.values[i].begin(), d.values[i].end(), t.fields[i].values().begin()));
    }
    std::ofstream(tmp.path / "bad.bin") << "NOTAFILE";
    EXPECT_THROW(read_field_dump(tmp.path / "bad.bin"), std::runtime_error);
}

TEST(Io, SweepCsvMarksCensoredRows) {
    TempDir tmp("csv");
    const SweepRow a = make_row(0.1, Tally{10, 5, 0});
    const SweepRow b = make_row(0.05, Tally{10, 0, 1});
    write_sweep_csv(tmp.path / "s.csv", {a, b});
    std::istringstream in(slurp(tmp.path / "s.csv"));
    std::string header;
    std::string first;
    std::string second;
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, second);
    EXPECT_EQ(header, "epsilon,n_paths,hits,p_hat,ci_lo,ci_hi,eps_log_p,failed");
    EXPECT_EQ(first.substr(0, 10), "0.10000000");
    EXPECT_NE(second.find(",censored,1"), std::string::npos) << second;
}

TEST(Io, CsvWriterChecksColumnCount) {
    TempDir tmp("writer");
    CsvWriter w(tmp.path / "w.csv", {"a", "b"});
    w.cell(1.0);
    EXPECT_THROW(w.end_row(), std::logic_error);
}

TEST(Cli, SkeletonDefaultConservesMass) {
    TempDir tmp("cli-skel");
    const CliResult r = cli({"skeleton", "--out", tmp.path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto dirs = run_dirs(tmp.path);
    ASSERT_EQ(dirs.size(), 1u);
    EXPECT_TRUE(fs::exists(dirs[0] / "trajectory.csv"));
    EXPECT_TRUE(fs::exists(dirs[0] / "fields.bin"));
    const json manifest = json::parse(slurp(dirs[0] / "manifest.json"));
    EXPECT_EQ(manifest["status"], "ok");
    const json summary = manifest["record"]["trajectory"];
    const double m0 = summary["initial_mass"];
    const double m1 = summary["final_mass"];
    EXPECT_NEAR(m1, m0, 1e-10 * m0);
    // The recorded config reproduces the run's hash.
    const RunConfig echo = config_from_json(manifest["config"]);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash(echo)));
    EXPECT_EQ(manifest["config_hash"], hex);
    EXPECT_NE(dirs[0].filename().string().find(hex), std::string::npos);
}

TEST(Cli, SupercriticalAlphaIsAConfigError) {
    TempDir tmp("cli-alpha");
    const CliResult r = cli({"skeleton", "--out", tmp.path.string(), "--set", "model.alpha=6"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("1 < alpha < 1 + 4/d"), std::string::npos) << r.err;
    const CliResult bad = cli({"skeleton", "--out", tmp.path.string(), "--set", "model.bogus=1"});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("model.bogus"), std::string::npos);
    EXPECT_EQ(cli({"nonsense"}).code, 2);
    EXPECT_EQ(cli({"skeleton", "--config", (tmp.path / "missing.json").string()}).code, 2);
}

TEST(Cli, DryRunWritesNothing) {
    TempDir tmp("cli-dry");
    const CliResult r = cli({"sweep", "--out", tmp.path.string(), "--dry-run", "--seed", "99"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(run_dirs(tmp.path).empty());
    EXPECT_EQ(json::parse(r.out)["seed"], 99);
}

TEST(Cli, BlowUpExitsWithThree) {
    TempDir tmp("cli-blow");
    const CliResult r =
        cli({"skeleton", "--out", tmp.path.string(), "--set", "initial.amplitude=1e155"});
    EXPECT_EQ(r.code, 3) << r.err;
    const auto dirs = run_dirs(tmp.path);
    ASSERT_EQ(dirs.size(), 1u);
    EXPECT_EQ(json::parse(slurp(dirs[0] / "manifest.json"))["status"], "blow_up");
}

TEST(Cli, SweepCsvIsByteIdenticalAcrossThreadCounts) {
    TempDir tmp("cli-sweep");
    std::vector<std::string> base{"sweep",       "--set", "grid.n=32",        "--set",
                                  "solver.dt=0.01", "--set", "sweep.epsilons=[0.1]", "--set",
                                  "sweep.n_paths=10", "--seed", "5"};
    std::vector<std::string> csvs;
    for (const char* threads : {"1", "1", "3"}) {
        const fs::path out = tmp.path / ("t" + std::to_string(csvs.size()));
        auto args = base;
        args.insert(args.end(), {"--threads", threads, "--out", out.string()});
        const CliResult r = cli(args);
        ASSERT_EQ(r.code, 0) << r.err;
        const auto dirs = run_dirs(out);
        ASSERT_EQ(dirs.size(), 1u);
        csvs.push_back(slurp(dirs[0] / "sweep.csv"));
    }
    EXPECT_FALSE(csvs[0].empty());
    EXPECT_EQ(csvs[0], csvs[1]);
    EXPECT_EQ(csvs[0], csvs[2]);
}

TEST(Cli, OutputRootFallsBackToEnvironment) {
    TempDir tmp("cli-env");
    ::setenv("SNLS_OUT_DIR", tmp.path.string().c_str(), 1);
    const CliResult r = cli({"skeleton", "--set", "grid.n=32", "--set", "solver.dt=0.01"});
    ::unsetenv("SNLS_OUT_DIR");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(run_dirs(tmp.path).size(), 1u);
}

} // namespace
} // namespace snls
