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

#include "snls/checks.hpp"
#include "snls/config.hpp"
#include "snls/error.hpp"
#include "snls/io.hpp"
#include "snls/mc.hpp"
#include "snls/parallel.hpp"
#include "snls/skeleton.hpp"
#include "snls/stochastic.hpp"
#include "snls/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace snls {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string subcommand;
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out_dir;
    bool dry_run = false;
};

std::string utc_stamp(std::time_t now) {
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

RunConfig resolve_config(const Options& opt) {
    json j = json::object();
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) {
            throw ConfigError("--config", "cannot open '" + opt.config_path + "'");
        }
        try {
            j = json::parse(in, nullptr, true, true);
        } catch (const json::parse_error& e) {
            throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
        }
    }
    for (const auto& s : opt.sets) {
        apply_override(j, s);
    }
    RunConfig cfg = config_from_json(j);
    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    if (opt.threads) {
        cfg.threads = *opt.threads;
    }
    validate(cfg);
    return cfg;
}

fs::path output_root(const Options& opt) {
    if (!opt.out_dir.empty()) {
        return opt.out_dir;
    }
    if (const char* env = std::getenv("SNLS_OUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return "runs";
}

fs::path make_run_dir(const fs::path& root, const std::string& sub, std::uint64_t hash) {
    fs::create_directories(root);
    const std::string base =
        utc_stamp(std::time(nullptr)) + "-" + sub + "-" + hex64(hash);
    fs::path dir = root / base;
    for (int k = 1; fs::exists(dir); ++k) {
        dir = root / (base + "-" + std::to_string(k));
    }
    fs::create_directory(dir);
    return dir;
}

/// Everything a subcommand needs: resolved config, output directory and the
/// list of artifacts written so far.
struct Run {
    const RunConfig& cfg;
    fs::path dir;
    std::ostream& out;
    json record = json::object();
    std::vector<std::string> artifacts;

    fs::path file(const std::string& name) {
        artifacts.push_back(name);
        return dir / name;
    }
};

void export_trajectory(Run& run, const Trajectory& traj) {
    write_trajectory_csv(run.file("trajectory.csv"), traj);
    write_field_dump(run.file("fields.bin"), traj);
}

void cmd_skeleton(Run& run) {
    const auto grid = make_grid(run.cfg);
    const Model model = make_model(run.cfg, grid);
    const ComplexField u0 = make_initial(run.cfg, grid);
    const Control ctrl = make_control(run.cfg, model);
    const Trajectory traj = solve_skeleton(model, u0, ctrl, make_solver_settings(run.cfg));
    export_trajectory(run, traj);
    run.record["trajectory"] = trajectory_summary(traj, model.pair().p);
    run.record["control_cost"] = control_cost(ctrl);
    run.out << "final mass " << format_double(run.record["trajectory"]["final_mass"]) << '\n';
}

void cmd_sde(Run& run) {
    const auto grid = make_grid(run.cfg);
    const Model model = make_model(run.cfg, grid);
    const ComplexField u0 = make_initial(run.cfg, grid);
    const Control ctrl = make_control(run.cfg, model);
    const Trajectory traj =
        solve_sde(model, u0, ctrl, SeedSpec{run.cfg.seed, 0}, make_sde_settings(run.cfg));
    export_trajectory(run, traj);
    run.record["trajectory"] = trajectory_summary(traj, model.pair().p);
    run.out << "final mass " << format_double(run.record["trajectory"]["final_mass"]) << '\n';
}

void cmd_truncated(Run& run) {
    const auto grid = make_grid(run.cfg);
    const Model model = make_model(run.cfg, grid);
    const ComplexField u0 = make_initial(run.cfg, grid);
    const Control ctrl = make_control(run.cfg, model);
    const TruncationSpec trunc{run.cfg.truncation.R};
    const auto [traj, stop] = solve_truncated(model, u0, ctrl, SeedSpec{run.cfg.seed, 0},
                                              make_sde_settings(run.cfg), trunc);
    export_trajectory(run, traj);
    const double p = model.pair().p;
    run.record["trajectory"] = trajectory_summary(traj, p);
    run.record["stop_report"] = to_json(stop);
    json taus = json::array();
    for (double level : run.cfg.truncation.levels) {
        taus.push_back(to_json(stopping_time(traj, level, p)));
    }
    run.record["stopping_times"] = taus;
    run.out << "tau_R " << format_double(stop.tau) << (stop.hit ? " (hit)" : "") << '\n';
}

RateOptions rate_options(const RunConfig& cfg) {
    RateOptions o = make_rate_options(cfg);
    o.threads = resolve_threads(cfg.threads);
    return o;
}

void cmd_rate(Run& run) {
    const auto grid = make_grid(run.cfg);
    const Model model = make_model(run.cfg, grid);
    const ComplexField u0 = make_initial(run.cfg, grid);
    const EventSpec event = make_event(run.cfg, model, u0);
    const RateResult r = minimize_action(model, u0, event, rate_options(run.cfg));
    write_json(run.file("rate.json"), to_json(r));
    CsvWriter csv(run.file("rate_trace.csv"),
                  {"round", "kappa", "iterations", "objective", "gradient_norm", "residual",
                   "cost"});
    for (const auto& t : r.trace) {
        csv.cell(t.round).cell(t.kappa).cell(t.iterations).cell(t.objective);
        csv.cell(t.gradient_norm).cell(t.residual).cell(t.cost);
        csv.end_row();
    }
    run.record["rate"] = {{"cost", r.cost}, {"feasible", r.feasible}, {"residual", r.residual}};
    run.out << "I* " << format_double(r.cost) << (r.feasible ? "" : " (infeasible)") << '\n';
}

void cmd_sweep(Run& run) {
    const auto grid = make_grid(run.cfg);
    const Model model = make_model(run.cfg, grid);
    McProblem problem;
    problem.model = &model;
    problem.u0 = make_initial(run.cfg, grid);
    problem.control = Control::zero(model.noise().m1(), model.noise().m2(), 1,
                                    run.cfg.solver.horizon);
    problem.event = make_event(run.cfg, model, problem.u0);
    problem.settings = make_sde_settings(run.cfg);
    const SweepResult sweep =
        epsilon_sweep(problem, run.cfg.sweep.epsilons, run.cfg.sweep.n_paths, run.cfg.seed,
                      resolve_threads(run.cfg.threads));
    write_sweep_csv(run.file("sweep.csv"), sweep.rows);
    json rows = json::array();
    for (const auto& row : sweep.rows) {
        rows.push_back(to_json(row));
        if (row.failure_warning()) {
            run.out << "warning: " << row.failed << " of " << row.n_paths
                    << " paths blew up at epsilon " << format_double(row.epsilon) << '\n';
        }
    }
    json summary{{"rows", rows}};
    if (run.cfg.sweep.rate) {
        summary["ldp_bounds"] = to_json(ldp_bounds_probe(*run.cfg.sweep.rate, sweep.rows));
    }
    write_json(run.file("sweep.json"), summary);
    run.record["sweep"] = {{"rows", sweep.rows.size()}};
}

void cmd_diagnose(Run& run) {
    CsvWriter summary_csv(run.file("diagnostics.csv"),
                          {"check", "metric", "value", "lo", "hi", "pass"});
    json checks = json::object();
    bool all = true;
    for (const auto& name : run.cfg.diagnose.checks) {
        const CheckResult r = run_check(name, run.cfg);
        CsvWriter table(run.file("diag_" + name + ".csv"), r.columns);
        for (const auto& row : r.table) {
            for (double v : row) {
                table.cell(v);
            }
            table.end_row();
        }
        json metrics = json::array();
        for (const auto& m : r.metrics) {
            summary_csv.cell(name).cell(m.name).cell(m.value).cell(m.lo).cell(m.hi).cell(m.pass);
            summary_csv.end_row();
            metrics.push_back({{"name", m.name},
                               {"value", m.value},
                               {"lo", std::isfinite(m.lo) ? json(m.lo) : json(nullptr)},
                               {"hi", std::isfinite(m.hi) ? json(m.hi) : json(nullptr)},
                               {"pass", m.pass}});
        }
        checks[name] = {{"pass", r.pass},
                        {"metrics", metrics},
                        {"note", r.note},
                        {"wall_seconds", r.wall_seconds}};
        all = all && r.pass;
        run.out << (r.pass ? "PASS " : "FAIL ") << name << '\n';
    }
    write_json(run.file("summary.json"), {{"all_pass", all}, {"checks", checks}});
    run.record["diagnose"] = {{"all_pass", all}};
}

json manifest(const Options& opt, const RunConfig& cfg, const std::string& started) {
    return {{"subcommand", opt.subcommand},
            {"started_utc", started},
            {"config", to_json(cfg)},
            {"config_hash", hex64(config_hash(cfg))},
            {"config_path", opt.config_path},
            {"overrides", opt.sets},
            {"seed", cfg.seed},
            {"threads", resolve_threads(cfg.threads)},
            {"versions",
             {{"snls", kVersion},
              {"fftw", fft_backend_version()},
              {"compiler", __VERSION__},
              {"cplusplus", __cplusplus}}}};
}

int dispatch(const Options& opt, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = resolve_config(opt);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (opt.dry_run) {
        out << to_json(cfg).dump(2) << '\n';
        return kExitOk;
    }

    const fs::path dir = make_run_dir(output_root(opt), opt.subcommand, config_hash(cfg));
    Run run{cfg, dir, out, json::object(), {}};
    json man = manifest(opt, cfg, utc_stamp(std::time(nullptr)));
    const auto start = std::chrono::steady_clock::now();
    int code = kExitOk;
    try {
        if (opt.subcommand == "skeleton") {
            cmd_skeleton(run);
        } else if (opt.subcommand == "sde") {
            cmd_sde(run);
        } else if (opt.subcommand == "truncated") {
            cmd_truncated(run);
        } else if (opt.subcommand == "rate") {
            cmd_rate(run);
        } else if (opt.subcommand == "sweep") {
            cmd_sweep(run);
        } else {
            cmd_diagnose(run);
        }
        man["status"] = "ok";
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        man["status"] = "config_error";
        man["error"] = e.what();
        code = kExitConfig;
    } catch (const BlowUpError& e) {
        err << "blow-up: " << e.what() << '\n';
        man["status"] = "blow_up";
        man["error"] = {{"step", e.step()}, {"norm", e.norm()}, {"message", e.what()}};
        code = kExitBlowUp;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        man["status"] = "error";
        man["error"] = e.what();
        code = kExitFailure;
    }
    man["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    man["artifacts"] = run.artifacts;
    man["record"] = run.record;
    write_json(dir / "manifest.json", man);
    out << "run directory: " << dir.string() << '\n';
    return code;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Controlled stochastic NLS solver", "snls"};
    app.set_version_flag("--version", kVersion);
    Options opt;
    app.add_option("--config", opt.config_path, "JSON config file (defaults apply when omitted)");
    app.add_option("--set", opt.sets, "Override a config entry, e.g. --set model.beta=0.1")
        ->allow_extra_args(false);
    std::uint64_t seed = 0;
    unsigned threads = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
    auto* threads_opt =
        app.add_option("--threads", threads, "Worker threads, 0 = logical cores");
    app.add_option("--out", opt.out_dir, "Output root (default $SNLS_OUT_DIR or ./runs)");
    app.add_flag("--dry-run", opt.dry_run, "Validate and print the resolved config");
    app.require_subcommand(1);
    const std::vector<std::pair<const char*, const char*>> subs{
        {"skeleton", "Deterministic controlled (skeleton) solve"},
        {"sde", "One stochastic path"},
        {"truncated", "One truncated stochastic path with stopping times"},
        {"rate", "Minimum-action search for the event"},
        {"sweep", "Monte Carlo event probabilities over the epsilon list"},
        {"diagnose", "Diagnostics suite with pass/fail summary"}};
    for (const auto& [name, help] : subs) {
        app.add_subcommand(name, help)->fallthrough();
    }

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    opt.subcommand = app.get_subcommands().front()->get_name();
    if (seed_opt->count() > 0) {
        opt.seed = seed;
    }
    if (threads_opt->count() > 0) {
        opt.threads = threads;
    }
    return dispatch(opt, out, err);
}

} // namespace snls
