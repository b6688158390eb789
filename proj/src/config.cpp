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
#include "snls/config.hpp"

#include "snls/error.hpp"
#include "snls/norms.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace snls {

using nlohmann::json;

std::string to_string(NoiseScheme s) {
    return s == NoiseScheme::unitary ? "unitary" : "ito_literal";
}

NoiseScheme parse_noise_scheme(const std::string& s) {
    if (s == "unitary") {
        return NoiseScheme::unitary;
    }
    if (s == "ito_literal" || s == "ito-literal") {
        return NoiseScheme::ito_literal;
    }
    throw std::invalid_argument("unknown scheme '" + s + "' (unitary, ito_literal)");
}

namespace {

std::string join_key(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

/// Strict reader over one JSON object: tracks consumed keys so leftovers
/// can be reported.
class Reader {
public:
    Reader(const json& j, std::string prefix) : obj_(j), prefix_(std::move(prefix)) {
        if (!obj_.is_object()) {
            throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected a JSON object");
        }
    }

    Reader sub(const std::string& key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        static const json empty = json::object();
        return Reader(it == obj_.end() ? empty : *it, join_key(prefix_, key));
    }

    void get(const std::string& key, double& out) {
        with(key, [&](const json& v) {
            if (!v.is_number()) {
                fail(key, "expected a number");
            }
            out = v.get<double>();
        });
    }
    void get(const std::string& key, std::optional<double>& out) {
        with(key, [&](const json& v) {
            if (v.is_null()) {
                out.reset();
                return;
            }
            if (!v.is_number()) {
                fail(key, "expected a number or null");
            }
            out = v.get<double>();
        });
    }
    void get(const std::string& key, std::size_t& out) {
        with(key, [&](const json& v) {
            if (!v.is_number_unsigned()) {
                fail(key, "expected a non-negative integer");
            }
            out = v.get<std::size_t>();
        });
    }
    void get(const std::string& key, std::uint64_t& out, int) {
        with(key, [&](const json& v) {
            if (!v.is_number_unsigned()) {
                fail(key, "expected a non-negative integer");
            }
            out = v.get<std::uint64_t>();
        });
    }
    void get(const std::string& key, unsigned& out) {
        with(key, [&](const json& v) {
            if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 4096) {
                fail(key, "expected an integer in [0, 4096]");
            }
            out = v.get<unsigned>();
        });
    }
    void get(const std::string& key, int& out) {
        with(key, [&](const json& v) {
            if (!v.is_number_integer()) {
                fail(key, "expected an integer");
            }
            out = v.get<int>();
        });
    }
    void get(const std::string& key, bool& out) {
        with(key, [&](const json& v) {
            if (!v.is_boolean()) {
                fail(key, "expected true or false");
            }
            out = v.get<bool>();
        });
    }
    void get(const std::string& key, std::string& out) {
        with(key, [&](const json& v) {
            if (!v.is_string()) {
                fail(key, "expected a string");
            }
            out = v.get<std::string>();
        });
    }
    void get(const std::string& key, std::vector<double>& out) {
        with(key, [&](const json& v) {
            if (!v.is_array()) {
                fail(key, "expected an array of numbers");
            }
            out.clear();
            for (const auto& x : v) {
                if (!x.is_number()) {
                    fail(key, "expected an array of numbers");
                }
                out.push_back(x.get<double>());
            }
        });
    }
    void get(const std::string& key, std::vector<std::vector<double>>& out) {
        with(key, [&](const json& v) {
            if (!v.is_array()) {
                fail(key, "expected an array of arrays of numbers");
            }
            out.clear();
            for (const auto& row : v) {
                if (!row.is_array()) {
                    fail(key, "expected an array of arrays of numbers");
                }
                std::vector<double> r;
                for (const auto& x : row) {
                    if (!x.is_number()) {
                        fail(key, "expected an array of arrays of numbers");
                    }
                    r.push_back(x.get<double>());
                }
                out.push_back(std::move(r));
            }
        });
    }
    void get(const std::string& key, std::vector<std::string>& out) {
        with(key, [&](const json& v) {
            if (!v.is_array()) {
                fail(key, "expected an array of strings");
            }
            out.clear();
            for (const auto& x : v) {
                if (!x.is_string()) {
                    fail(key, "expected an array of strings");
                }
                out.push_back(x.get<std::string>());
            }
        });
    }
    template <class Enum, class Parse>
    void get_enum(const std::string& key, Enum& out, Parse parse) {
        std::string s;
        get(key, s);
        if (obj_.contains(key)) {
            try {
                out = parse(s);
            } catch (const std::invalid_argument& e) {
                fail(key, e.what());
            }
        }
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError(join_key(prefix_, it.key()), "unknown key");
            }
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError(join_key(prefix_, key), msg);
    }

private:
    template <class F>
    void with(const std::string& key, F&& f) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it != obj_.end()) {
            f(*it);
        }
    }

    const json& obj_;
    std::string prefix_;
    std::set<std::string> seen_;
};

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

json to_json(const RunConfig& c) {
    json j;
    j["grid"] = {{"dim", c.grid.dim}, {"n", c.grid.n}, {"half_width", c.grid.half_width}};
    j["model"] = {{"alpha", c.model.alpha},         {"lambda", c.model.lambda},
                  {"beta", c.model.beta},           {"epsilon", c.model.epsilon},
                  {"nonlinear", c.model.nonlinear}, {"dealias", c.model.dealias}};
    j["noise"] = {{"m1", c.noise.m1()},
                  {"m2", c.noise.m2()},
                  {"b_amplitudes", c.noise.b_amplitudes},
                  {"b_widths", c.noise.b_widths},
                  {"b_profile", to_string(c.noise.b_profile)},
                  {"g_amplitudes", c.noise.g_amplitudes},
                  {"g_widths", c.noise.g_widths},
                  {"g_profile", to_string(c.noise.g_profile)},
                  {"g_shape", to_string(c.noise.g_shape)}};
    j["solver"] = {{"dt", c.solver.dt},
                   {"horizon", c.solver.horizon},
                   {"scheme", to_string(c.solver.scheme)},
                   {"stratonovich_correction", c.solver.stratonovich_correction},
                   {"field_stride", c.solver.field_stride}};
    j["initial"] = {{"kind", c.initial.kind},         {"amplitude", c.initial.amplitude},
                    {"width", c.initial.width},       {"center", c.initial.center},
                    {"wavenumber", c.initial.wavenumber}, {"mode", c.initial.mode}};
    j["control"] = {{"segments", c.control.segments}, {"pattern", c.control.pattern},
                    {"amplitude", c.control.amplitude}, {"rho1", c.control.rho1},
                    {"rho2", c.control.rho2},         {"file", c.control.file}};
    j["event"] = {{"kind", c.event.kind},         {"field", c.event.field},
                  {"field_scale", c.event.field_scale}, {"radius", c.event.radius},
                  {"tolerance", c.event.tolerance}, {"observable", c.event.observable},
                  {"level", c.event.level}};
    j["sweep"] = {{"epsilons", c.sweep.epsilons},
                  {"n_paths", c.sweep.n_paths},
                  {"rate", optional_json(c.sweep.rate)}};
    j["truncation"] = {{"R", c.truncation.R}, {"levels", c.truncation.levels}};
    j["rate"] = {{"segments", c.rate.segments},
                 {"rounds", c.rate.rounds},
                 {"kappa0", c.rate.kappa0},
                 {"kappa_factor", c.rate.kappa_factor},
                 {"max_iterations", c.rate.max_iterations},
                 {"fd_step", c.rate.fd_step},
                 {"feasibility_tol", c.rate.feasibility_tol},
                 {"budget", optional_json(c.rate.budget)},
                 {"initial_scale", c.rate.initial_scale}};
    const auto& d = c.diagnose;
    j["diagnose"] = {
        {"checks", d.checks},
        {"strichartz",
         {{"n_samples", d.strichartz_samples},
          {"preset", d.strichartz_preset},
          {"max_ratio", d.strichartz_max_ratio}}},
        {"ito_gap",
         {{"dts", d.gap_dts},
          {"n_paths", d.gap_paths},
          {"slope_min", d.gap_slope_min},
          {"slope_max", d.gap_slope_max},
          {"plateau_factor", d.gap_plateau_factor}}},
        {"picard",
         {{"T_max", d.picard_T_max},
          {"n_pairs", d.picard_pairs},
          {"max_ratio", d.picard_max_ratio},
          {"max_decay", d.picard_max_decay}}},
        {"yosida", {{"mus", d.yosida_mus}, {"max_distance", d.yosida_max_distance}}},
        {"order",
         {{"skeleton_dts", d.skeleton_dts},
          {"stochastic_dts", d.stochastic_dts},
          {"n_paths", d.order_paths},
          {"epsilon", d.order_epsilon},
          {"skeleton_range", d.skeleton_order_range},
          {"stochastic_range", d.stochastic_order_range}}},
        {"weak",
         {{"epsilons", d.weak_epsilons},
          {"deltas", d.weak_deltas},
          {"n_paths", d.weak_paths},
          {"perturbation", d.weak_perturbation}}},
        {"mass_balance",
         {{"n_paths", d.balance_paths},
          {"checkpoints", d.balance_checkpoints},
          {"max_residual", d.balance_max_residual}}},
        {"conservation", {{"n_paths", d.conservation_paths}, {"max_drift", d.conservation_max_drift}}},
        {"continuity", {{"terms", d.continuity_terms}, {"perturbation", d.continuity_perturbation}}}};
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    Reader root(j, "");

    {
        Reader r = root.sub("grid");
        r.get("dim", c.grid.dim);
        r.get("n", c.grid.n);
        r.get("half_width", c.grid.half_width);
        r.finish();
    }
    {
        Reader r = root.sub("model");
        r.get("alpha", c.model.alpha);
        r.get("lambda", c.model.lambda);
        r.get("beta", c.model.beta);
        r.get("epsilon", c.model.epsilon);
        r.get("nonlinear", c.model.nonlinear);
        r.get("dealias", c.model.dealias);
        r.finish();
    }
    {
        Reader r = root.sub("noise");
        std::size_t m1 = c.noise.m1();
        std::size_t m2 = c.noise.m2();
        const bool has_m1 = r.has("m1");
        const bool has_m2 = r.has("m2");
        r.get("m1", m1);
        r.get("m2", m2);
        // Mode counts alone select the default amplitude / width ladders.
        const NoiseConfig ladder = NoiseConfig::with_modes(m1, m2);
        if (has_m1 && !r.has("b_amplitudes")) {
            c.noise.b_amplitudes = ladder.b_amplitudes;
            c.noise.b_widths = ladder.b_widths;
        }
        if (has_m2 && !r.has("g_amplitudes")) {
            c.noise.g_amplitudes = ladder.g_amplitudes;
            c.noise.g_widths = ladder.g_widths;
        }
        r.get("b_amplitudes", c.noise.b_amplitudes);
        r.get("b_widths", c.noise.b_widths);
        r.get_enum("b_profile", c.noise.b_profile, parse_profile_kind);
        r.get("g_amplitudes", c.noise.g_amplitudes);
        r.get("g_widths", c.noise.g_widths);
        r.get_enum("g_profile", c.noise.g_profile, parse_profile_kind);
        r.get_enum("g_shape", c.noise.g_shape, parse_g_shape);
        if (has_m1 && m1 != c.noise.m1()) {
            r.fail("m1", "m1 = " + std::to_string(m1) + " but b_amplitudes has " +
                             std::to_string(c.noise.m1()) + " entries");
        }
        if (has_m2 && m2 != c.noise.m2()) {
            r.fail("m2", "m2 = " + std::to_string(m2) + " but g_amplitudes has " +
                             std::to_string(c.noise.m2()) + " entries");
        }
        r.finish();
    }
    {
        Reader r = root.sub("solver");
        r.get("dt", c.solver.dt);
        r.get("horizon", c.solver.horizon);
        r.get_enum("scheme", c.solver.scheme, parse_noise_scheme);
        r.get("stratonovich_correction", c.solver.stratonovich_correction);
        r.get("field_stride", c.solver.field_stride);
        r.finish();
    }
    {
        Reader r = root.sub("initial");
        r.get("kind", c.initial.kind);
        r.get("amplitude", c.initial.amplitude);
        r.get("width", c.initial.width);
        r.get("center", c.initial.center);
        r.get("wavenumber", c.initial.wavenumber);
        r.get("mode", c.initial.mode);
        r.finish();
    }
    {
        Reader r = root.sub("control");
        r.get("segments", c.control.segments);
        r.get("pattern", c.control.pattern);
        r.get("amplitude", c.control.amplitude);
        r.get("rho1", c.control.rho1);
        r.get("rho2", c.control.rho2);
        r.get("file", c.control.file);
        r.finish();
    }
    {
        Reader r = root.sub("event");
        r.get("kind", c.event.kind);
        r.get("field", c.event.field);
        r.get("field_scale", c.event.field_scale);
        r.get("radius", c.event.radius);
        r.get("tolerance", c.event.tolerance);
        r.get("observable", c.event.observable);
        r.get("level", c.event.level);
        r.finish();
    }
    {
        Reader r = root.sub("sweep");
        r.get("epsilons", c.sweep.epsilons);
        r.get("n_paths", c.sweep.n_paths);
        r.get("rate", c.sweep.rate);
        r.finish();
    }
    {
        Reader r = root.sub("truncation");
        r.get("R", c.truncation.R);
        r.get("levels", c.truncation.levels);
        r.finish();
    }
    {
        Reader r = root.sub("rate");
        r.get("segments", c.rate.segments);
        r.get("rounds", c.rate.rounds);
        r.get("kappa0", c.rate.kappa0);
        r.get("kappa_factor", c.rate.kappa_factor);
        r.get("max_iterations", c.rate.max_iterations);
        r.get("fd_step", c.rate.fd_step);
        r.get("feasibility_tol", c.rate.feasibility_tol);
        r.get("budget", c.rate.budget);
        r.get("initial_scale", c.rate.initial_scale);
        r.finish();
    }
    {
        auto& d = c.diagnose;
        Reader r = root.sub("diagnose");
        r.get("checks", d.checks);
        Reader s = r.sub("strichartz");
        s.get("n_samples", d.strichartz_samples);
        s.get("preset", d.strichartz_preset);
        s.get("max_ratio", d.strichartz_max_ratio);
        s.finish();
        Reader g = r.sub("ito_gap");
        g.get("dts", d.gap_dts);
        g.get("n_paths", d.gap_paths);
        g.get("slope_min", d.gap_slope_min);
        g.get("slope_max", d.gap_slope_max);
        g.get("plateau_factor", d.gap_plateau_factor);
        g.finish();
        Reader p = r.sub("picard");
        p.get("T_max", d.picard_T_max);
        p.get("n_pairs", d.picard_pairs);
        p.get("max_ratio", d.picard_max_ratio);
        p.get("max_decay", d.picard_max_decay);
        p.finish();
        Reader y = r.sub("yosida");
        y.get("mus", d.yosida_mus);
        y.get("max_distance", d.yosida_max_distance);
        y.finish();
        Reader o = r.sub("order");
        o.get("skeleton_dts", d.skeleton_dts);
        o.get("stochastic_dts", d.stochastic_dts);
        o.get("n_paths", d.order_paths);
        o.get("epsilon", d.order_epsilon);
        o.get("skeleton_range", d.skeleton_order_range);
        o.get("stochastic_range", d.stochastic_order_range);
        o.finish();
        Reader w = r.sub("weak");
        w.get("epsilons", d.weak_epsilons);
        w.get("deltas", d.weak_deltas);
        w.get("n_paths", d.weak_paths);
        w.get("perturbation", d.weak_perturbation);
        w.finish();
        Reader b = r.sub("mass_balance");
        b.get("n_paths", d.balance_paths);
        b.get("checkpoints", d.balance_checkpoints);
        b.get("max_residual", d.balance_max_residual);
        b.finish();
        Reader cs = r.sub("conservation");
        cs.get("n_paths", d.conservation_paths);
        cs.get("max_drift", d.conservation_max_drift);
        cs.finish();
        Reader ct = r.sub("continuity");
        ct.get("terms", d.continuity_terms);
        ct.get("perturbation", d.continuity_perturbation);
        ct.finish();
        r.finish();
    }
    root.get("seed", c.seed, 0);
    root.get("threads", c.threads);
    root.finish();
    return c;
}

namespace {

void require(bool ok, const std::string& key, const std::string& msg) {
    if (!ok) {
        throw ConfigError(key, msg);
    }
}

bool power_of_two(std::size_t n) { return n >= 8 && (n & (n - 1)) == 0; }

bool multiple_of(double horizon, double dt) {
    const double steps = std::round(horizon / dt);
    return steps >= 1.0 && std::abs(steps * dt - horizon) <= 1e-9 * horizon;
}

void require_halving(const std::vector<double>& dts, const std::string& key) {
    require(dts.size() >= 2, key, "needs at least two entries");
    for (std::size_t i = 0; i < dts.size(); ++i) {
        require(dts[i] > 0.0, key, "time steps must be positive");
        if (i > 0) {
            require(std::abs(dts[i] - 0.5 * dts[i - 1]) <= 1e-12 * dts[i - 1], key,
                    "each time step must be half the previous one");
        }
    }
}

void require_non_increasing_positive(const std::vector<double>& v, const std::string& key) {
    require(!v.empty(), key, "must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        require(v[i] > 0.0 && std::isfinite(v[i]), key, "entries must be positive");
        if (i > 0) {
            require(v[i] <= v[i - 1], key, "entries must be non-increasing");
        }
    }
}

void check_table(const std::vector<std::vector<double>>& t, std::size_t modes,
                 std::size_t segments, const std::string& key) {
    if (t.empty()) {
        return;
    }
    require(t.size() == modes, key,
            "expected " + std::to_string(modes) + " rows (one per noise mode), got " +
                std::to_string(t.size()));
    for (const auto& row : t) {
        require(row.size() == segments, key,
                "expected " + std::to_string(segments) + " entries per row (one per segment)");
        for (double v : row) {
            require(std::isfinite(v), key, "coefficients must be finite");
        }
    }
}

} // namespace

void validate(const RunConfig& c) {
    require(c.grid.dim >= 1 && c.grid.dim <= 3, "grid.dim", "dimension must be 1, 2 or 3");
    require(power_of_two(c.grid.n), "grid.n", "points per dimension must be a power of two >= 8");
    require(c.grid.half_width > 0.0 && std::isfinite(c.grid.half_width), "grid.half_width",
            "half width L must be positive");

    const double critical = 1.0 + 4.0 / c.grid.dim;
    if (!(c.model.alpha > 1.0 && c.model.alpha < critical)) {
        std::ostringstream msg;
        msg << "alpha = " << c.model.alpha << " violates the subcritical bound 1 < alpha < 1 + 4/d = "
            << critical << " for d = " << c.grid.dim;
        throw ConfigError("model.alpha", msg.str());
    }
    require(c.model.lambda == 1.0 || c.model.lambda == -1.0, "model.lambda",
            "lambda must be +1 (defocusing) or -1 (focusing)");
    require(c.model.beta >= 0.0 && std::isfinite(c.model.beta), "model.beta",
            "damping beta must be >= 0");
    require(c.model.epsilon >= 0.0 && c.model.epsilon <= 1.0, "model.epsilon",
            "noise intensity must lie in [0, 1]");
    require(admissible_r(c.grid.dim, c.model.alpha + 1.0), "model.alpha",
            "r = alpha + 1 is not an admissible Strichartz exponent in this dimension");

    try {
        c.noise.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("noise", e.what());
    }

    require(c.solver.dt > 0.0 && std::isfinite(c.solver.dt), "solver.dt", "dt must be positive");
    require(c.solver.horizon > 0.0 && std::isfinite(c.solver.horizon), "solver.horizon",
            "horizon T must be positive");
    require(multiple_of(c.solver.horizon, c.solver.dt), "solver.dt",
            "horizon T must be an integer multiple of dt");

    require(c.initial.kind == "gaussian" || c.initial.kind == "fourier_mode", "initial.kind",
            "initial kind must be gaussian or fourier_mode");
    require(c.initial.width > 0.0, "initial.width", "width must be positive");
    require(std::isfinite(c.initial.amplitude), "initial.amplitude", "amplitude must be finite");

    require(c.control.segments >= 1, "control.segments", "at least one segment");
    require(c.control.pattern == "zero" || c.control.pattern == "sine", "control.pattern",
            "pattern must be zero or sine");
    check_table(c.control.rho1, c.noise.m1(), c.control.segments, "control.rho1");
    check_table(c.control.rho2, c.noise.m2(), c.control.segments, "control.rho2");

    try {
        (void)parse_event_kind(c.event.kind);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("event.kind", e.what());
    }
    try {
        (void)parse_observable(c.event.observable);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("event.observable", e.what());
    }
    require(c.event.field == "zero" || c.event.field == "initial" ||
                c.event.field == "uncontrolled_terminal",
            "event.field", "field must be zero, initial or uncontrolled_terminal");
    require(c.event.radius >= 0.0, "event.radius", "radius must be >= 0");
    require(c.event.tolerance >= 0.0, "event.tolerance", "tolerance must be >= 0");

    require_non_increasing_positive(c.sweep.epsilons, "sweep.epsilons");
    require(c.sweep.n_paths >= 1, "sweep.n_paths", "at least one path");
    require(!c.sweep.rate || *c.sweep.rate >= 0.0, "sweep.rate", "rate must be >= 0");

    require(c.truncation.R > 0.0, "truncation.R", "truncation radius must be positive");
    for (double l : c.truncation.levels) {
        require(l > 0.0, "truncation.levels", "levels must be positive");
    }

    require(c.rate.segments >= 1, "rate.segments", "at least one segment");
    require(c.rate.rounds >= 1, "rate.rounds", "at least one penalty round");
    require(c.rate.kappa0 > 0.0, "rate.kappa0", "initial penalty must be positive");
    require(c.rate.kappa_factor >= 1.0, "rate.kappa_factor", "penalty factor must be >= 1");
    require(c.rate.fd_step > 0.0, "rate.fd_step", "finite-difference step must be positive");
    require(c.rate.feasibility_tol >= 0.0, "rate.feasibility_tol", "tolerance must be >= 0");
    require(!c.rate.budget || *c.rate.budget >= 0.0, "rate.budget", "budget must be >= 0");

    const auto& d = c.diagnose;
    static const std::set<std::string> known{"strichartz", "ito_gap", "picard",
                                             "yosida",     "order",   "weak",
                                             "mass_balance", "conservation", "continuity"};
    for (const auto& name : d.checks) {
        require(known.count(name) == 1, "diagnose.checks", "unknown check '" + name + "'");
    }
    try {
        (void)parse_field_preset(d.strichartz_preset);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("diagnose.strichartz.preset", e.what());
    }
    require_halving(d.gap_dts, "diagnose.ito_gap.dts");
    require(d.gap_paths >= 1, "diagnose.ito_gap.n_paths", "at least one path");
    require(d.picard_pairs >= 1, "diagnose.picard.n_pairs", "at least one pair");
    require(d.picard_T_max > 0.0 && d.picard_T_max <= c.solver.horizon, "diagnose.picard.T_max",
            "T_max must lie in (0, solver.horizon]");
    require(!d.yosida_mus.empty(), "diagnose.yosida.mus", "must not be empty");
    for (double mu : d.yosida_mus) {
        require(mu > 0.0, "diagnose.yosida.mus", "mu must be positive");
    }
    require(d.skeleton_dts.size() >= 3, "diagnose.order.skeleton_dts", "needs at least three rungs");
    require_halving(d.stochastic_dts, "diagnose.order.stochastic_dts");
    require(d.stochastic_dts.size() >= 3, "diagnose.order.stochastic_dts",
            "needs at least three rungs");
    require(d.order_epsilon >= 0.0 && d.order_epsilon <= 1.0, "diagnose.order.epsilon",
            "epsilon must lie in [0, 1]");
    require(d.skeleton_order_range.size() == 2, "diagnose.order.skeleton_range", "expected [lo, hi]");
    require(d.stochastic_order_range.size() == 2, "diagnose.order.stochastic_range",
            "expected [lo, hi]");
    require_non_increasing_positive(d.weak_epsilons, "diagnose.weak.epsilons");
    require(!d.weak_deltas.empty(), "diagnose.weak.deltas", "must not be empty");
    require(d.weak_paths >= 1, "diagnose.weak.n_paths", "at least one path");
    require(d.balance_paths >= 100, "diagnose.mass_balance.n_paths",
            "at least 100 paths (the estimator is too noisy below that)");
    require(d.balance_checkpoints >= 1, "diagnose.mass_balance.checkpoints", "at least one window");
    require(d.conservation_paths >= 1, "diagnose.conservation.n_paths", "at least one path");
    require(d.continuity_terms >= 2, "diagnose.continuity.terms", "at least two terms");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("--config", "cannot open '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(j);
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError(assignment, "override must have the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
        if (part.empty()) {
            throw ConfigError(key, "empty component in override key");
        }
        if (!node->is_object()) {
            throw ConfigError(key, "override path crosses a non-object value");
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) {
            *node = json::object();
        }
        start = dot + 1;
    }
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string text = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

GridPtr make_grid(const RunConfig& cfg) {
    return Grid::make(cfg.grid.dim, cfg.grid.n, cfg.grid.half_width);
}

Model make_model(const RunConfig& cfg, const GridPtr& grid) {
    return Model(grid, cfg.model, NoiseModel::build(*grid, cfg.noise));
}

ComplexField make_initial(const RunConfig& cfg, const GridPtr& grid) {
    const auto& ic = cfg.initial;
    if (ic.kind == "fourier_mode") {
        const double L = grid->half_width();
        const double norm = ic.amplitude / std::sqrt(std::pow(2.0 * L, grid->dim()));
        const double k = std::numbers::pi * ic.mode / L;
        return sample_field(grid, [&](const std::array<double, 3>& x) {
            return std::polar(norm, k * x[0]);
        });
    }
    return sample_field(grid, [&](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int d = 0; d < grid->dim(); ++d) {
            const double y = x[static_cast<std::size_t>(d)] - ic.center;
            r2 += y * y;
        }
        return std::polar(ic.amplitude * std::exp(-r2 / (ic.width * ic.width)),
                          ic.wavenumber * x[0]);
    });
}

namespace {

void fill_table(std::vector<double>& flat, std::size_t modes, std::size_t segments,
                const std::vector<std::vector<double>>& table) {
    for (std::size_t m = 0; m < modes; ++m) {
        for (std::size_t s = 0; s < segments; ++s) {
            flat[s * modes + m] = table[m][s];
        }
    }
}

} // namespace

Control make_control(const RunConfig& cfg, const Model& model) {
    const std::size_t m1 = model.noise().m1();
    const std::size_t m2 = model.noise().m2();
    std::size_t segments = cfg.control.segments;
    std::vector<std::vector<double>> rho1 = cfg.control.rho1;
    std::vector<std::vector<double>> rho2 = cfg.control.rho2;
    if (!cfg.control.file.empty()) {
        std::ifstream in(cfg.control.file);
        if (!in) {
            throw ConfigError("control.file", "cannot open '" + cfg.control.file + "'");
        }
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("control.file", std::string("invalid JSON: ") + e.what());
        }
        const json& node = j.contains("control") ? j["control"] : j;
        try {
            segments = node.at("segments").get<std::size_t>();
            rho1 = node.at("rho1").get<std::vector<std::vector<double>>>();
            rho2 = node.at("rho2").get<std::vector<std::vector<double>>>();
        } catch (const json::exception& e) {
            throw ConfigError("control.file", std::string("expected segments, rho1, rho2: ") +
                                                  e.what());
        }
        check_table(rho1, m1, segments, "control.file");
        check_table(rho2, m2, segments, "control.file");
    }
    Control c = Control::zero(m1, m2, segments, cfg.solver.horizon);
    if (!rho1.empty() || !rho2.empty()) {
        if (!rho1.empty()) {
            fill_table(c.rho1, m1, segments, rho1);
        }
        if (!rho2.empty()) {
            fill_table(c.rho2, m2, segments, rho2);
        }
        return c;
    }
    if (cfg.control.pattern == "sine") {
        const double a = cfg.control.amplitude;
        for (std::size_t s = 0; s < segments; ++s) {
            const auto sd = static_cast<double>(s);
            for (std::size_t m = 0; m < m1; ++m) {
                c.rho1_ref(s, m) = a * std::sin(0.7 * sd + static_cast<double>(m));
            }
            for (std::size_t m = 0; m < m2; ++m) {
                c.rho2_ref(s, m) = a * std::cos(0.5 * sd + 2.0 * static_cast<double>(m));
            }
        }
    }
    return c;
}

EventSpec make_event(const RunConfig& cfg, const Model& model, const ComplexField& u0) {
    EventSpec ev;
    ev.kind = parse_event_kind(cfg.event.kind);
    ev.observable = parse_observable(cfg.event.observable);
    ev.radius = cfg.event.radius;
    ev.tolerance = cfg.event.tolerance;
    ev.level = cfg.event.level;
    ev.horizon = cfg.solver.horizon;
    if (cfg.event.field == "zero") {
        ev.field = ComplexField(model.grid_ptr());
    } else if (cfg.event.field == "initial") {
        ev.field = u0;
    } else {
        const Control zero =
            Control::zero(model.noise().m1(), model.noise().m2(), 1, cfg.solver.horizon);
        ev.field = skeleton_terminal(model, u0, zero, cfg.solver.dt);
    }
    ev.field *= Complex{cfg.event.field_scale, 0.0};
    return ev;
}

RateOptions make_rate_options(const RunConfig& cfg) {
    RateOptions o;
    o.segments = cfg.rate.segments;
    o.dt = cfg.solver.dt;
    o.rounds = cfg.rate.rounds;
    o.kappa0 = cfg.rate.kappa0;
    o.kappa_factor = cfg.rate.kappa_factor;
    o.max_iterations = cfg.rate.max_iterations;
    o.fd_step = cfg.rate.fd_step;
    o.feasibility_tol = cfg.rate.feasibility_tol;
    o.budget = cfg.rate.budget.value_or(std::numeric_limits<double>::infinity());
    o.initial_scale = cfg.rate.initial_scale;
    o.threads = cfg.threads;
    return o;
}

SolverSettings make_solver_settings(const RunConfig& cfg) {
    SolverSettings s;
    s.dt = cfg.solver.dt;
    s.field_stride = cfg.solver.field_stride;
    return s;
}

SdeSettings make_sde_settings(const RunConfig& cfg) {
    SdeSettings s;
    s.dt = cfg.solver.dt;
    s.epsilon = cfg.model.epsilon;
    s.scheme = cfg.solver.scheme;
    s.stratonovich_correction = cfg.solver.stratonovich_correction;
    s.field_stride = cfg.solver.field_stride;
    return s;
}

} // namespace snls
