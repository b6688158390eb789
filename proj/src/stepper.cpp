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
#include "snls/stepper.hpp"

#include <cmath>
#include <stdexcept>

namespace snls {

SplitStepper::SplitStepper(const Model& model, double dt, StepperOptions options)
    : model_(&model), dt_(dt), options_(options) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("time step must be positive");
    }
    const Grid& grid = model.grid();
    const std::size_t n = grid.size();
    const double beta = model.params().beta;
    const double inv_n = 1.0 / static_cast<double>(n);
    const auto k2 = grid.k_squared();
    half_propagator_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        half_propagator_[i] = std::exp(Complex{-beta * 0.5 * dt, -k2[i] * 0.5 * dt}) * inv_n;
    }
    if (options_.yosida_mu > 0.0) {
        if (options_.yosida_passes < 1) {
            throw std::invalid_argument("Yosida passes must be >= 1");
        }
        yosida_ = yosida_symbol(grid, options_.yosida_mu);
        for (auto& s : yosida_) {
            s = std::pow(s, options_.yosida_passes) * inv_n;
        }
    }
    b_factor_.resize(n);
    g_control_.resize(n);
    g_noise_.resize(n);
    work_a_.resize(n);
    work_b_.resize(n);
    work_c_.resize(n);
    work_d_.resize(n);
}

void SplitStepper::linear_half(std::span<Complex> u) {
    const auto& fft = model_->grid().fft();
    fft.forward(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] *= half_propagator_[i];
    }
    fft.backward(u);
}

void SplitStepper::nonlinear_half(std::span<Complex> u, double weight) {
    if (!model_->params().nonlinear || weight == 0.0) {
        return;
    }
    if (options_.yosida_mu > 0.0) {
        nonlinear_half_yosida(u, weight);
        return;
    }
    const double h = 0.5 * dt_ * weight;
    for (auto& v : u) {
        v *= std::polar(1.0, -model_->nonlinear_rate(v) * h);
    }
}

void SplitStepper::yosida_inplace(std::span<Complex> u) {
    const auto& fft = model_->grid().fft();
    fft.forward(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] *= yosida_[i];
    }
    fft.backward(u);
}

// out = -i weight J N(J u)
void SplitStepper::yosida_nonlinear_rhs(std::span<const Complex> u, double weight,
                                        std::span<Complex> out) {
    std::copy(u.begin(), u.end(), out.begin());
    yosida_inplace(out);
    for (auto& v : out) {
        v = Complex{0.0, -weight} * model_->nonlinear_rate(v) * v;
    }
    yosida_inplace(out);
}

void SplitStepper::nonlinear_half_yosida(std::span<Complex> u, double weight) {
    // Classical RK4 over dt/2 for du/dt = -i weight J N(J u).
    const double h = 0.5 * dt_;
    const std::size_t n = u.size();
    std::span<Complex> k(work_a_.data(), n);
    std::span<Complex> stage(work_b_.data(), n);
    std::span<Complex> acc(work_c_.data(), n);

    yosida_nonlinear_rhs(u, weight, k);
    for (std::size_t i = 0; i < n; ++i) {
        acc[i] = k[i];
        stage[i] = u[i] + 0.5 * h * k[i];
    }
    yosida_nonlinear_rhs(stage, weight, k);
    for (std::size_t i = 0; i < n; ++i) {
        acc[i] += 2.0 * k[i];
        stage[i] = u[i] + 0.5 * h * k[i];
    }
    yosida_nonlinear_rhs(stage, weight, k);
    for (std::size_t i = 0; i < n; ++i) {
        acc[i] += 2.0 * k[i];
        stage[i] = u[i] + h * k[i];
    }
    yosida_nonlinear_rhs(stage, weight, k);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] += (h / 6.0) * (acc[i] + k[i]);
    }
}

void SplitStepper::b_phase(std::span<Complex> u) {
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] *= b_factor_[i];
    }
}

void SplitStepper::ito_literal_b_noise(std::span<Complex> u, const StepDrive& drive) {
    // Ito drift -eps b(u) dt, diffusion -i sqrt(eps) sum B_m u dW_m and the
    // commutative Milstein term 1/2 sum_{m,n} s_m s_n u (dW_m dW_n - delta_mn dt)
    // with s_m = -i sqrt(eps) B_m.
    const auto& noise = model_->noise();
    const double eps = drive.sqrt_eps * drive.sqrt_eps;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double x = 0.0;
        for (std::size_t m = 0; m < noise.m1(); ++m) {
            x += noise.b[m][i] * drive.dW1[m];
        }
        x *= drive.sqrt_eps;
        const double c = 0.5 * eps * noise.b_sq_sum[i];
        const Complex drift = options_.stratonovich_correction ? Complex{-c * dt_, 0.0}
                                                               : Complex{0.0, 0.0};
        const Complex diffusion{0.0, -x};
        const Complex milstein{-0.5 * x * x + c * dt_, 0.0};
        u[i] += (drift + diffusion + milstein) * u[i];
    }
}

void SplitStepper::g_control_rhs(std::span<const Complex> u, std::span<Complex> out) {
    const GShape shape = model_->noise().g_shape;
    if (options_.yosida_mu > 0.0) {
        std::copy(u.begin(), u.end(), out.begin());
        yosida_inplace(out);
        for (std::size_t i = 0; i < u.size(); ++i) {
            out[i] = g_control_[i] * g_sigma(shape, out[i]);
        }
        yosida_inplace(out);
        for (auto& v : out) {
            v *= Complex{0.0, -dt_};
        }
        return;
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        out[i] = Complex{0.0, -dt_ * g_control_[i]} * g_sigma(shape, u[i]);
    }
}

void SplitStepper::g_kick(std::span<Complex> u, const StepDrive& drive) {
    const auto& noise = model_->noise();
    const std::size_t m2 = noise.m2();
    const bool control = !drive.rho2.empty();
    const bool stochastic = !drive.dW2.empty();
    if (m2 == 0 || (!control && !stochastic)) {
        return;
    }
    const std::size_t n = u.size();
    const GShape shape = noise.g_shape;

    // Euler-Maruyama noise term from the pre-kick state.
    std::span<Complex> noise_term(work_d_.data(), n);
    bool any_noise = false;
    if (stochastic) {
        if (options_.yosida_mu > 0.0) {
            throw std::logic_error("Yosida stepping is deterministic only");
        }
        for (std::size_t i = 0; i < n; ++i) {
            double a = 0.0;
            for (std::size_t m = 0; m < m2; ++m) {
                a += noise.g[m][i] * drive.dW2[m];
            }
            a *= drive.sqrt_eps;
            g_noise_[i] = a;
            if (a != 0.0) {
                any_noise = true;
                noise_term[i] = Complex{0.0, -a} * g_sigma(shape, u[i]);
            } else {
                noise_term[i] = Complex{0.0, 0.0};
            }
        }
    }

    if (control) {
        bool any_control = false;
        for (std::size_t i = 0; i < n; ++i) {
            double a = 0.0;
            for (std::size_t m = 0; m < m2; ++m) {
                a += noise.g[m][i] * drive.rho2[m];
            }
            g_control_[i] = a;
            any_control = any_control || a != 0.0;
        }
        if (any_control) {
            // Explicit midpoint for du = -i G(u) rho2 dt.
            std::span<Complex> k(work_a_.data(), n);
            std::span<Complex> mid(work_b_.data(), n);
            g_control_rhs(u, k);
            for (std::size_t i = 0; i < n; ++i) {
                mid[i] = u[i] + 0.5 * k[i];
            }
            g_control_rhs(mid, k);
            for (std::size_t i = 0; i < n; ++i) {
                u[i] += k[i];
            }
        }
    }

    if (any_noise) {
        for (std::size_t i = 0; i < n; ++i) {
            if (g_noise_[i] != 0.0) {
                u[i] += noise_term[i];
            }
        }
    }
}

void SplitStepper::step(std::span<Complex> u, const StepDrive& drive) {
    const auto& noise = model_->noise();
    const std::size_t m1 = noise.m1();
    const std::size_t n = u.size();
    if (n != model_->grid().size()) {
        throw std::invalid_argument("state size does not match grid");
    }
    if ((!drive.rho1.empty() && drive.rho1.size() != m1) ||
        (!drive.rho2.empty() && drive.rho2.size() != noise.m2()) ||
        (!drive.dW1.empty() && drive.dW1.size() != m1) ||
        (!drive.dW2.empty() && drive.dW2.size() != noise.m2())) {
        throw std::invalid_argument("step drive does not match the noise model's mode counts");
    }

    linear_half(u);
    nonlinear_half(u, drive.nonlinear_weight);

    const bool literal = options_.scheme == NoiseScheme::ito_literal;
    const bool b_active = m1 > 0 && (!drive.rho1.empty() || !drive.dW1.empty());
    if (b_active) {
        // Stratonovich noise enters the unitary phase together with the control.
        for (std::size_t i = 0; i < n; ++i) {
            double a = 0.0;
            for (std::size_t m = 0; m < m1; ++m) {
                double coef = drive.rho1.empty() ? 0.0 : drive.rho1[m] * dt_;
                if (!drive.dW1.empty() && !literal) {
                    coef += drive.sqrt_eps * drive.dW1[m];
                }
                a += noise.b[m][i] * coef;
            }
            b_factor_[i] = std::polar(1.0, -0.5 * a);
        }
        b_phase(u);
        if (literal && !drive.dW1.empty()) {
            ito_literal_b_noise(u, drive);
        }
    }
    g_kick(u, drive);
    if (b_active) {
        b_phase(u);
    }

    nonlinear_half(u, drive.nonlinear_weight);
    linear_half(u);
}

} // namespace snls
