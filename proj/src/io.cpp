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
#include "snls/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace snls {

static_assert(std::endian::native == std::endian::little,
              "the field dump format assumes a little-endian host");

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        out_ << (i ? "," : "") << header[i];
    }
    out_ << '\n';
}

void CsvWriter::separator() {
    if (in_row_++ > 0) {
        out_ << ',';
    }
}

CsvWriter& CsvWriter::cell(double x) {
    separator();
    out_ << format_double(x);
    return *this;
}

CsvWriter& CsvWriter::cell(std::size_t x) {
    separator();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::cell(const std::string& x) {
    separator();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::cell(bool x) {
    separator();
    out_ << (x ? "true" : "false");
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) {
        throw std::logic_error("CSV row has " + std::to_string(in_row_) + " cells, expected " +
                               std::to_string(columns_));
    }
    out_ << '\n';
    in_row_ = 0;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    CsvWriter csv(path, {"t", "norm_h", "norm_lr"});
    for (std::size_t n = 0; n < traj.times.size(); ++n) {
        csv.cell(traj.times[n]).cell(traj.norm_h[n]).cell(traj.norm_r[n]);
        csv.end_row();
    }
}

namespace {

constexpr char kMagic[8] = {'S', 'N', 'L', 'S', 'F', 'L', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) {
        throw std::runtime_error("truncated field dump");
    }
    return v;
}

} // namespace

void write_field_dump(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    const Grid& g = *traj.grid;
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
    put<std::uint64_t>(out, g.n_per_dim());
    put<double>(out, g.half_width());
    put<std::uint64_t>(out, traj.fields.size());
    for (std::size_t i = 0; i < traj.fields.size(); ++i) {
        const std::size_t step = traj.field_steps[i];
        put<std::uint64_t>(out, step);
        put<double>(out, traj.times[step]);
        const auto v = traj.fields[i].values();
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(Complex)));
    }
}

FieldDump read_field_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw std::runtime_error("not a field dump (bad magic)");
    }
    if (take<std::uint32_t>(in) != kVersion) {
        throw std::runtime_error("unsupported field dump version");
    }
    FieldDump d;
    d.dim = static_cast<int>(take<std::uint32_t>(in));
    d.n_per_dim = take<std::uint64_t>(in);
    d.half_width = take<double>(in);
    const auto count = take<std::uint64_t>(in);
    std::size_t size = 1;
    for (int k = 0; k < d.dim; ++k) {
        size *= d.n_per_dim;
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        d.steps.push_back(take<std::uint64_t>(in));
        d.times.push_back(take<double>(in));
        std::vector<Complex> v(size);
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(size * sizeof(Complex)));
        if (!in) {
            throw std::runtime_error("truncated field dump");
        }
        d.values.push_back(std::move(v));
    }
    return d;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    CsvWriter csv(path, {"epsilon", "n_paths", "hits", "p_hat", "ci_lo", "ci_hi", "eps_log_p",
                         "failed"});
    for (const auto& r : rows) {
        csv.cell(r.epsilon).cell(r.n_paths).cell(r.hits).cell(r.p_hat).cell(r.ci_lo).cell(r.ci_hi);
        if (r.eps_log_p) {
            csv.cell(*r.eps_log_p);
        } else {
            csv.cell(std::string("censored"));
        }
        csv.cell(r.failed);
        csv.end_row();
    }
}

using nlohmann::json;

json to_json(const StopReport& s) {
    return {{"tau", s.tau}, {"hit", s.hit}, {"level", s.level}};
}

json to_json(const Control& c) {
    json rho1 = json::array();
    json rho2 = json::array();
    for (std::size_t m = 0; m < c.m1; ++m) {
        json row = json::array();
        for (std::size_t s = 0; s < c.segments; ++s) {
            row.push_back(c.rho1_at(s)[m]);
        }
        rho1.push_back(row);
    }
    for (std::size_t m = 0; m < c.m2; ++m) {
        json row = json::array();
        for (std::size_t s = 0; s < c.segments; ++s) {
            row.push_back(c.rho2_at(s)[m]);
        }
        rho2.push_back(row);
    }
    return {{"segments", c.segments}, {"horizon", c.horizon}, {"rho1", rho1}, {"rho2", rho2}};
}

json to_json(const RateResult& r) {
    json trace = json::array();
    for (const auto& t : r.trace) {
        trace.push_back({{"round", t.round},
                         {"kappa", t.kappa},
                         {"iterations", t.iterations},
                         {"objective", t.objective},
                         {"gradient_norm", t.gradient_norm},
                         {"residual", t.residual},
                         {"cost", t.cost}});
    }
    return {{"cost", r.cost},
            {"residual", r.residual},
            {"feasible", r.feasible},
            {"within_budget", r.within_budget},
            {"evaluations", r.evaluations},
            {"control", to_json(r.control)},
            {"trace", trace}};
}

json to_json(const SweepRow& r) {
    return {{"epsilon", r.epsilon},
            {"n_paths", r.n_paths},
            {"hits", r.hits},
            {"failed", r.failed},
            {"p_hat", r.p_hat},
            {"ci_lo", r.ci_lo},
            {"ci_hi", r.ci_hi},
            {"eps_log_p", r.eps_log_p ? json(*r.eps_log_p) : json("censored")},
            {"failure_warning", r.failure_warning()},
            {"wall_seconds", r.wall_seconds}};
}

json to_json(const LdpBoundsReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"epsilon", row.epsilon},
                        {"censored", row.censored},
                        {"eps_log_p", row.eps_log_p},
                        {"gap", row.gap},
                        {"relative_gap", row.relative_gap},
                        {"gap_lo", row.gap_lo},
                        {"gap_hi", row.gap_hi}});
    }
    return {{"rate", r.rate},
            {"rows", rows},
            {"gap_decreasing", r.gap_decreasing},
            {"consistent", r.consistent}};
}

json trajectory_summary(const Trajectory& traj, double p) {
    json j;
    j["steps"] = traj.steps();
    j["dt"] = traj.dt;
    j["horizon"] = traj.horizon();
    j["r"] = traj.r;
    j["p"] = p;
    if (!traj.norm_h.empty()) {
        const double m0 = traj.norm_h.front() * traj.norm_h.front();
        const double m1 = traj.norm_h.back() * traj.norm_h.back();
        double drift = 0.0;
        for (double h : traj.norm_h) {
            drift = std::max(drift, std::abs(h * h - m0));
        }
        j["initial_mass"] = m0;
        j["final_mass"] = m1;
        j["max_mass_drift"] = drift;
        j["mixed_norm"] =
            mixed_norm_from_norms(traj.norm_h, traj.norm_r, traj.dt, traj.steps(), p);
    }
    if (traj.seed) {
        j["seed"] = *traj.seed;
    }
    if (traj.path_index) {
        j["path_index"] = *traj.path_index;
    }
    return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << j.dump(2) << '\n';
}

} // namespace snls
