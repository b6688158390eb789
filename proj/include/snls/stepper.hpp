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

#include "snls/model.hpp"

#include <span>
#include <vector>

namespace snls {

enum class NoiseScheme {
    /// Stratonovich B-noise as the exact unitary phase exp(-i sqrt(eps) sum B_m dW_m).
    unitary,
    /// Explicit Ito form: -eps b(u) dt - i sqrt(eps) B(u) dW plus the
    /// commutative Milstein term.
    ito_literal,
};

struct StepperOptions {
    NoiseScheme scheme = NoiseScheme::unitary;
    /// Only read by ito_literal; false drops the -eps b(u) dt drift (ablation).
    bool stratonovich_correction = true;
    /// > 0 replaces N by J N(J .) and G by J G(J .).
    double yosida_mu = 0.0;
    /// J applied this many times in each Yosida slot.
    int yosida_passes = 1;
};

/// Per-step inputs. Empty dW spans mean a deterministic step.
struct StepDrive {
    std::span<const double> rho1;
    std::span<const double> rho2;
    std::span<const double> dW1;
    std::span<const double> dW2;
    double sqrt_eps = 0.0;
    double nonlinear_weight = 1.0; ///< theta_R factor for the truncated equation
};

/// Symmetric split step for
///   du = -[iAu + i N(u) + beta u] dt - i B(u) (rho1 dt + sqrt(eps) o dW1)
///        - i G(u) (rho2 dt + sqrt(eps) dW2).
///
/// Sequence: exact linear+damping half step, half nonlinear phase, B phase
/// half, G kick (control by explicit midpoint, noise by Euler-Maruyama), B
/// phase half, half nonlinear phase, linear half step.
///
/// Holds scratch buffers: one instance per thread.
class SplitStepper {
public:
    SplitStepper(const Model& model, double dt, StepperOptions options = {});

    void step(std::span<Complex> u, const StepDrive& drive);

    double dt() const noexcept { return dt_; }
    const Model& model() const noexcept { return *model_; }

private:
    void linear_half(std::span<Complex> u);
    void nonlinear_half(std::span<Complex> u, double weight);
    void nonlinear_half_yosida(std::span<Complex> u, double weight);
    void yosida_inplace(std::span<Complex> u);
    void yosida_nonlinear_rhs(std::span<const Complex> u, double weight, std::span<Complex> out);
    void b_phase(std::span<Complex> u);
    void g_kick(std::span<Complex> u, const StepDrive& drive);
    void g_control_rhs(std::span<const Complex> u, std::span<Complex> out);
    void ito_literal_b_noise(std::span<Complex> u, const StepDrive& drive);

    const Model* model_;
    double dt_;
    StepperOptions options_;
    std::vector<Complex> half_propagator_; // exp((-i|k|^2 - beta) dt/2) / N
    std::vector<double> yosida_;
    std::vector<Complex> b_factor_; // exp(-i angle / 2) of the current step
    std::vector<double> g_control_;
    std::vector<double> g_noise_;
    std::vector<Complex> work_a_;
    std::vector<Complex> work_b_;
    std::vector<Complex> work_c_;
    std::vector<Complex> work_d_;
};

} // namespace snls
