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
#pragma once

#include "snls/diagnostics.hpp"
#include "snls/ldp.hpp"
#include "snls/mc.hpp"
#include "snls/stochastic.hpp"
#include "snls/trajectory.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace snls {

/// Shortest round-trip text for a double: printf "%.17g". Non-finite values
/// print as nan / inf / -inf.
std::string format_double(double x);

/// Minimal CSV writer; every floating-point cell goes through format_double.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& cell(double x);
    CsvWriter& cell(std::size_t x);
    CsvWriter& cell(const std::string& x);
    CsvWriter& cell(bool x);
    void end_row();

private:
    void separator();

    std::ofstream out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

/// t,norm_h,norm_lr with one row per stored step.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Binary snapshot file, little-endian:
///   magic "SNLSFLD1", u32 version (1), u32 dim, u64 n_per_dim, f64 half_width,
///   u64 snapshot count; then per snapshot u64 step, f64 time, and
///   n_per_dim^dim complex doubles (re, im) in row-major order.
struct FieldDump {
    int dim = 1;
    std::size_t n_per_dim = 0;
    double half_width = 0.0;
    std::vector<std::size_t> steps;
    std::vector<double> times;
    std::vector<std::vector<Complex>> values;
};

void write_field_dump(const std::filesystem::path& path, const Trajectory& traj);
FieldDump read_field_dump(const std::filesystem::path& path);

/// epsilon,n_paths,hits,p_hat,ci_lo,ci_hi,eps_log_p,failed; zero-hit rows
/// carry the token `censored` in eps_log_p.
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

nlohmann::json to_json(const StopReport& s);
nlohmann::json to_json(const Control& c);
nlohmann::json to_json(const RateResult& r);
nlohmann::json to_json(const SweepRow& r);
nlohmann::json to_json(const LdpBoundsReport& r);
/// Scalar summary (no per-step data) of a trajectory.
nlohmann::json trajectory_summary(const Trajectory& traj, double p);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace snls
