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

#include "snls/field.hpp"

#include <span>
#include <string>
#include <vector>

namespace snls {

/// Admissible Strichartz pair: 2/p = d/2 - d/r.
struct AdmissiblePair {
    double p;
    double r;
    int dim;

    /// Builds the pair for a given r; throws std::invalid_argument when r lies
    /// outside the dimension's admissible range.
    static AdmissiblePair from_r(int dim, double r);
};

/// The unique p with 2/p = d/2 - d/r (infinity for r = 2).
double admissible_p(int dim, double r);

/// True when r lies in the admissible range for `dim`.
bool admissible_r(int dim, double r) noexcept;

struct ModelParams {
    double alpha = 3.0;    ///< nonlinearity exponent, 1 < alpha < 1 + 4/d
    double lambda = 1.0;   ///< +1 defocusing, -1 focusing
    double beta = 0.0;     ///< linear damping
    double epsilon = 0.1;  ///< noise intensity for stochastic runs
    bool nonlinear = true; ///< false disables the polynomial term entirely
    bool dealias = false;  ///< 2/3-rule filter in `Model::nonlinearity`

    double r() const noexcept { return alpha + 1.0; }
    /// Throws std::invalid_argument (subcritical range, lambda sign, beta sign).
    void validate(int dim) const;

    bool operator==(const ModelParams&) const = default;
};

enum class GShape { linear, saturated };
enum class ProfileKind { bump, constant };

std::string to_string(GShape s);
std::string to_string(ProfileKind k);
GShape parse_g_shape(const std::string& s);
ProfileKind parse_profile_kind(const std::string& s);

/// Finite-mode description of the noise coefficients; the config block.
///
/// Mode m (0-based) has multiplier amplitude * exp(-|x|^2 / width^2) for the
/// bump profile, or the constant amplitude.
struct NoiseConfig {
    std::vector<double> b_amplitudes{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> b_widths{2.0, 4.0, 6.0, 8.0};
    ProfileKind b_profile = ProfileKind::bump;
    std::vector<double> g_amplitudes{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> g_widths{3.0, 5.0, 7.0, 9.0};
    ProfileKind g_profile = ProfileKind::bump;
    GShape g_shape = GShape::saturated;

    std::size_t m1() const noexcept { return b_amplitudes.size(); }
    std::size_t m2() const noexcept { return g_amplitudes.size(); }

    /// Defaults c_m = 0.2 * 2^{-m}, m = 1..count, widths 2m (B) and 2m + 1 (G).
    static NoiseConfig with_modes(std::size_t m1, std::size_t m2);
    void validate() const;

    bool operator==(const NoiseConfig&) const = default;
};

/// Sampled noise coefficients with the recorded structural constants.
struct NoiseModel {
    std::vector<std::vector<double>> b;  ///< M1 real multipliers B_m(x)
    std::vector<std::vector<double>> g;  ///< M2 real profiles g_m(x)
    GShape g_shape = GShape::saturated;
    std::vector<double> b_sq_sum;        ///< sum_m B_m(x)^2 per point
    double b_sup_sq_sum = 0.0;           ///< sum_m ||B_m||_inf^2
    double g_lipschitz = 0.0;            ///< L_G (Hilbert-Schmidt)
    double g_growth_c1 = 0.0;            ///< ||G(u)|| <= C1 + C2 ||u||
    double g_growth_c2 = 0.0;

    static NoiseModel build(const Grid& grid, const NoiseConfig& cfg);
    static NoiseModel none(const Grid& grid);

    std::size_t m1() const noexcept { return b.size(); }
    std::size_t m2() const noexcept { return g.size(); }
    std::vector<double> g_sup() const;
};

/// sigma(u) for the two supported G shapes; both satisfy |sigma(u)| <= |u|
/// and have Lipschitz constant 1.
inline Complex g_sigma(GShape shape, Complex u) noexcept {
    if (shape == GShape::linear) {
        return u;
    }
    return u / (1.0 + std::norm(u));
}

/// Deterministic operators of the equation on a fixed grid.
class Model {
public:
    Model(GridPtr grid, ModelParams params, NoiseModel noise);

    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const Grid& grid() const noexcept { return *grid_; }
    const ModelParams& params() const noexcept { return params_; }
    const NoiseModel& noise() const noexcept { return noise_; }
    AdmissiblePair pair() const { return AdmissiblePair::from_r(grid_->dim(), params_.r()); }

    /// -Laplacian via the exact spectral symbol |k|^2.
    ComplexField apply_A(const ComplexField& f) const;
    /// lambda |u|^{alpha-1} u pointwise (optionally 2/3-dealiased).
    ComplexField nonlinearity(const ComplexField& f) const;
    /// mu (mu - Laplacian)^{-1}.
    ComplexField yosida(const ComplexField& f, double mu) const;
    ComplexField apply_B(const ComplexField& f, std::size_t m) const;
    ComplexField apply_B_full(const ComplexField& f, std::span<const double> y) const;
    ComplexField apply_G(const ComplexField& f, std::size_t m) const;
    /// sum_m y_m G_m(f)
    ComplexField apply_G_full(const ComplexField& f, std::span<const double> y) const;
    /// b(u) = 1/2 sum_m B_m^2 u
    ComplexField stratonovich_correction(const ComplexField& f) const;

    /// Pointwise lambda |u|^{alpha-1} as a real multiplier (the phase rate).
    double nonlinear_rate(Complex u) const noexcept;

private:
    GridPtr grid_;
    ModelParams params_;
    NoiseModel noise_;
};

/// Yosida symbol mu / (mu + |k|^2) per spectral index.
std::vector<double> yosida_symbol(const Grid& grid, double mu);

} // namespace snls
