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
// Thin bindings: configs cross the boundary as JSON text, arrays as NumPy.

#include "snls/checks.hpp"
#include "snls/cli.hpp"
#include "snls/config.hpp"
#include "snls/error.hpp"
#include "snls/io.hpp"
#include "snls/ldp.hpp"
#include "snls/mc.hpp"
#include "snls/skeleton.hpp"
#include "snls/stochastic.hpp"
#include "snls/version.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using nlohmann::json;

namespace {

snls::RunConfig parse(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw snls::ConfigError("<root>", e.what());
    }
    snls::RunConfig cfg = snls::config_from_json(j);
    snls::validate(cfg);
    return cfg;
}

py::array_t<double> doubles(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<std::complex<double>> complexes(const snls::ComplexField& f) {
    const auto v = f.values();
    return py::array_t<std::complex<double>>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict trajectory_dict(const snls::Trajectory& t, const snls::Model& m) {
    py::dict d;
    d["times"] = doubles(t.times);
    d["norm_h"] = doubles(t.norm_h);
    d["norm_lr"] = doubles(t.norm_r);
    d["final_field"] = complexes(t.final_field());
    d["summary"] = snls::trajectory_summary(t, m.pair().p).dump();
    return d;
}

py::dict skeleton(const std::string& text) {
    const snls::RunConfig cfg = parse(text);
    const auto grid = snls::make_grid(cfg);
    const snls::Model model = snls::make_model(cfg, grid);
    snls::SolverSettings s = snls::make_solver_settings(cfg);
    snls::Trajectory t;
    {
        py::gil_scoped_release release;
        t = snls::solve_skeleton(model, snls::make_initial(cfg, grid), snls::make_control(cfg, model), s);
    }
    return trajectory_dict(t, model);
}

py::dict sde(const std::string& text) {
    const snls::RunConfig cfg = parse(text);
    const auto grid = snls::make_grid(cfg);
    const snls::Model model = snls::make_model(cfg, grid);
    snls::Trajectory t;
    {
        py::gil_scoped_release release;
        t = snls::solve_sde(model, snls::make_initial(cfg, grid), snls::make_control(cfg, model),
                            snls::SeedSpec{cfg.seed, 0}, snls::make_sde_settings(cfg));
    }
    return trajectory_dict(t, model);
}

std::string rate(const std::string& text) {
    const snls::RunConfig cfg = parse(text);
    const auto grid = snls::make_grid(cfg);
    const snls::Model model = snls::make_model(cfg, grid);
    const auto u0 = snls::make_initial(cfg, grid);
    const auto event = snls::make_event(cfg, model, u0);
    snls::RateOptions o = snls::make_rate_options(cfg);
    o.threads = cfg.threads;
    py::gil_scoped_release release;
    return snls::to_json(snls::minimize_action(model, u0, event, o)).dump();
}

std::string sweep(const std::string& text) {
    const snls::RunConfig cfg = parse(text);
    const auto grid = snls::make_grid(cfg);
    const snls::Model model = snls::make_model(cfg, grid);
    snls::McProblem p;
    p.model = &model;
    p.u0 = snls::make_initial(cfg, grid);
    p.control = snls::make_control(cfg, model);
    p.event = snls::make_event(cfg, model, p.u0);
    p.settings = snls::make_sde_settings(cfg);
    p.settings.field_stride = 0;
    py::gil_scoped_release release;
    const auto r = snls::epsilon_sweep(p, cfg.sweep.epsilons, cfg.sweep.n_paths, cfg.seed, cfg.threads);
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back(snls::to_json(row));
    }
    return rows.dump();
}

std::string check(const std::string& name, const std::string& text) {
    const snls::RunConfig cfg = parse(text);
    snls::CheckResult r;
    {
        py::gil_scoped_release release;
        r = snls::run_check(name, cfg);
    }
    json j{{"name", r.name}, {"pass", r.pass}, {"note", r.note}, {"wall_seconds", r.wall_seconds},
           {"columns", r.columns}, {"table", r.table}};
    json metrics = json::array();
    for (const auto& m : r.metrics) {
        metrics.push_back({{"name", m.name}, {"value", m.value}, {"pass", m.pass}});
    }
    j["metrics"] = metrics;
    return j.dump();
}

py::tuple cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = snls::run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stochastic NLS solvers and large-deviation tools";

    static py::exception<snls::ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    static py::exception<snls::BlowUpError> blow_up_error(m, "BlowUpError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const snls::ConfigError& e) {
            py::set_error(config_error, e.what());
        } catch (const snls::BlowUpError& e) {
            py::set_error(blow_up_error, e.what());
        }
    });

    m.def("version", [] { return std::string(snls::kVersion); });
    m.def("fft_backend_version", [] { return snls::fft_backend_version(); });
    m.def("default_config", [] { return snls::to_json(snls::RunConfig{}).dump(); });
    m.def("normalize_config", [](const std::string& text) { return snls::to_json(parse(text)).dump(); },
          "Parse, validate and return the full config as JSON text.");
    m.def("config_hash", [](const std::string& text) { return snls::config_hash(parse(text)); });
    m.def("check_names", &snls::check_names);
    m.def("skeleton", &skeleton);
    m.def("sde", &sde);
    m.def("rate", &rate);
    m.def("sweep", &sweep);
    m.def("check", &check);
    m.def("run_cli", &cli);
}
