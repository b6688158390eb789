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
#include "snls/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace snls {

bool admissible_r(int dim, double r) noexcept {
    if (std::isnan(r) || r < 2.0) {
        return false;
    }
    if (dim == 1) {
        return true;
    }
    if (dim == 2) {
        return std::isfinite(r);
    }
    return r <= 2.0 * dim / (dim - 2.0);
}

double admissible_p(int dim, double r) {
    if (dim < 1) {
        throw std::invalid_argument("dimension must be positive");
    }
    if (!admissible_r(dim, r)) {
        std::ostringstream msg;
        msg << "r = " << r << " is not admissible in dimension " << dim;
        throw std::invalid_argument(msg.str());
    }
    if (r == 2.0) {
        return std::numeric_limits<double>::infinity();
    }
    // 2/p = d/2 - d/r  =>  p = 4r / (d (r - 2)), with r = inf giving 4/d.
    if (std::isinf(r)) {
        return 4.0 / dim;
    }
    return 4.0 * r / (dim * (r - 2.0));
}

AdmissiblePair AdmissiblePair::from_r(int dim, double r) { return {admissible_p(dim, r), r, dim}; }

void ModelParams::validate(int dim) const {
    const double critical = 1.0 + 4.0 / dim;
    if (!(alpha > 1.0) || !(alpha < critical)) {
        std::ostringstream msg;
        msg << "alpha = " << alpha << " must satisfy 1 < alpha < 1 + 4/d = " << critical
            << " (subcritical range)";
        throw std::invalid_argument(msg.str());
    }
    if (lambda != 1.0 && lambda != -1.0) {
        throw std::invalid_argument("lambda must be +1 (defocusing) or -1 (focusing)");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("damping beta must be >= 0");
    }
    if (!(epsilon >= 0.0) || epsilon > 1.0) {
        throw std::invalid_argument("noise intensity epsilon must lie in [0, 1]");
    }
    admissible_p(dim, r());
}

std::string to_string(GShape s) { return s == GShape::linear ? "linear" : "saturated"; }

std::string to_string(ProfileKind k) { return k == ProfileKind::bump ? "bump" : "constant"; }

GShape parse_g_shape(const std::string& s) {
    if (s == "linear") {
        return GShape::linear;
    }
    if (s == "saturated") {
        return GShape::saturated;
    }
    throw std::invalid_argument("unknown G shape '" + s + "' (expected linear|saturated)");
}

ProfileKind parse_profile_kind(const std::string& s) {
    if (s == "bump") {
        return ProfileKind::bump;
    }
    if (s == "constant") {
        return ProfileKind::constant;
    }
    throw std::invalid_argument("unknown profile '" + s + "' (expected bump|constant)");
}

NoiseConfig NoiseConfig::with_modes(std::size_t m1, std::size_t m2) {
    NoiseConfig cfg;
    cfg.b_amplitudes.clear();
    cfg.b_widths.clear();
    cfg.g_amplitudes.clear();
    cfg.g_widths.clear();
    for (std::size_t m = 1; m <= m1; ++m) {
        cfg.b_amplitudes.push_back(0.2 * std::ldexp(1.0, -static_cast<int>(m)));
        cfg.b_widths.push_back(2.0 * static_cast<double>(m));
    }
    for (std::size_t m = 1; m <= m2; ++m) {
        cfg.g_amplitudes.push_back(0.2 * std::ldexp(1.0, -static_cast<int>(m)));
        cfg.g_widths.push_back(2.0 * static_cast<double>(m) + 1.0);
    }
    return cfg;
}

void NoiseConfig::validate() const {
    if (b_profile == ProfileKind::bump && b_widths.size() != b_amplitudes.size()) {
        throw std::invalid_argument("noise: b_widths must have one entry per B mode");
    }
    if (g_profile == ProfileKind::bump && g_widths.size() != g_amplitudes.size()) {
        throw std::invalid_argument("noise: g_widths must have one entry per G mode");
    }
    auto check = [](const std::vector<double>& v, const char* what, bool positive) {
        for (double x : v) {
            if (!std::isfinite(x) || (positive && !(x > 0.0))) {
                throw std::invalid_argument(std::string("noise: invalid entry in ") + what);
            }
        }
    };
    check(b_amplitudes, "b_amplitudes", false);
    check(g_amplitudes, "g_amplitudes", false);
    if (b_profile == ProfileKind::bump) {
        check(b_widths, "b_widths", true);
    }
    if (g_profile == ProfileKind::bump) {
        check(g_widths, "g_widths", true);
    }
}

namespace {

std::vector<double> sample_profile(const Grid& grid, ProfileKind kind, double amplitude,
                                   double width) {
    std::vector<double> out(grid.size(), amplitude);
    if (kind == ProfileKind::constant) {
        return out;
    }
    const double inv_w2 = 1.0 / (width * width);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto x = grid.position(i);
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        out[i] = amplitude * std::exp(-r2 * inv_w2);
    }
    return out;
}

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

} // namespace

NoiseModel NoiseModel::build(const Grid& grid, const NoiseConfig& cfg) {
    cfg.validate();
    NoiseModel nm;
    nm.g_shape = cfg.g_shape;
    for (std::size_t m = 0; m < cfg.m1(); ++m) {
        const double w = cfg.b_profile == ProfileKind::bump ? cfg.b_widths[m] : 0.0;
        nm.b.push_back(sample_profile(grid, cfg.b_profile, cfg.b_amplitudes[m], w));
    }
    for (std::size_t m = 0; m < cfg.m2(); ++m) {
        const double w = cfg.g_profile == ProfileKind::bump ? cfg.g_widths[m] : 0.0;
        nm.g.push_back(sample_profile(grid, cfg.g_profile, cfg.g_amplitudes[m], w));
    }
    nm.b_sq_sum.assign(grid.size(), 0.0);
    for (const auto& bm : nm.b) {
        for (std::size_t i = 0; i < bm.size(); ++i) {
            nm.b_sq_sum[i] += bm[i] * bm[i];
        }
        const double s = sup_abs(bm);
        nm.b_sup_sq_sum += s * s;
    }
    // ||G(u) - G(v)||_HS^2 = sum_m ||g_m (sigma(u) - sigma(v))||^2
    //                     <= (sum_m ||g_m||_inf^2) Lip(sigma)^2 ||u - v||^2, Lip(sigma) = 1.
    double g_sq = 0.0;
    for (const auto& gm : nm.g) {
        const double s = sup_abs(gm);
        g_sq += s * s;
    }
    nm.g_lipschitz = std::sqrt(g_sq);
    nm.g_growth_c1 = 0.0; // sigma(0) = 0
    nm.g_growth_c2 = nm.g_lipschitz;
    return nm;
}

NoiseModel NoiseModel::none(const Grid& grid) {
    NoiseModel nm;
    nm.b_sq_sum.assign(grid.size(), 0.0);
    return nm;
}

std::vector<double> NoiseModel::g_sup() const {
    std::vector<double> out;
    out.reserve(g.size());
    for (const auto& gm : g) {
        out.push_back(sup_abs(gm));
    }
    return out;
}

Model::Model(GridPtr grid, ModelParams params, NoiseModel noise)
    : grid_(std::move(grid)), params_(params), noise_(std::move(noise)) {
    if (!grid_) {
        throw std::invalid_argument("model requires a grid");
    }
    params_.validate(grid_->dim());
    auto check = [&](const std::vector<std::vector<double>>& v) {
        for (const auto& f : v) {
            if (f.size() != grid_->size()) {
                throw std::invalid_argument("noise profile size does not match grid");
            }
        }
    };
    check(noise_.b);
    check(noise_.g);
    if (noise_.b_sq_sum.size() != grid_->size()) {
        noise_.b_sq_sum.assign(grid_->size(), 0.0);
        for (const auto& bm : noise_.b) {
            for (std::size_t i = 0; i < bm.size(); ++i) {
                noise_.b_sq_sum[i] += bm[i] * bm[i];
            }
        }
    }
}

double Model::nonlinear_rate(Complex u) const noexcept {
    const double a2 = std::norm(u);
    if (params_.alpha == 3.0) {
        return params_.lambda * a2;
    }
    return params_.lambda * std::pow(a2, 0.5 * (params_.alpha - 1.0));
}

ComplexField Model::apply_A(const ComplexField& f) const {
    return apply_spectral_symbol(f, grid_->k_squared());
}

ComplexField Model::nonlinearity(const ComplexField& f) const {
    ComplexField out(f.grid_ptr());
    if (!params_.nonlinear) {
        return out;
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        out[i] = nonlinear_rate(f[i]) * f[i];
    }
    if (params_.dealias) {
        // 2/3 rule: keep modes with |j| < n/3 along every axis.
        const std::size_t n = grid_->n_per_dim();
        std::vector<double> mask(grid_->size(), 1.0);
        for (std::size_t flat = 0; flat < mask.size(); ++flat) {
            const auto idx = grid_->unflatten(flat);
            for (int axis = 0; axis < grid_->dim(); ++axis) {
                auto j = static_cast<std::ptrdiff_t>(idx[static_cast<std::size_t>(axis)]);
                if (j >= static_cast<std::ptrdiff_t>(n / 2)) {
                    j -= static_cast<std::ptrdiff_t>(n);
                }
                if (3 * std::abs(j) >= static_cast<std::ptrdiff_t>(n)) {
                    mask[flat] = 0.0;
                }
            }
        }
        out = apply_spectral_symbol(out, mask);
    }
    return out;
}

std::vector<double> yosida_symbol(const Grid& grid, double mu) {
    if (!(mu > 0.0)) {
        throw std::invalid_argument("Yosida parameter mu must be positive");
    }
    std::vector<double> symbol(grid.size());
    const auto k2 = grid.k_squared();
    for (std::size_t i = 0; i < symbol.size(); ++i) {
        symbol[i] = mu / (mu + k2[i]);
    }
    return symbol;
}

ComplexField Model::yosida(const ComplexField& f, double mu) const {
    return apply_spectral_symbol(f, yosida_symbol(*grid_, mu));
}

ComplexField Model::apply_B(const ComplexField& f, std::size_t m) const {
    if (m >= noise_.m1()) {
        throw std::out_of_range("B mode index " + std::to_string(m) + " out of range");
    }
    ComplexField out(f.grid_ptr());
    const auto& bm = noise_.b[m];
    for (std::size_t i = 0; i < f.size(); ++i) {
        out[i] = bm[i] * f[i];
    }
    return out;
}

ComplexField Model::apply_B_full(const ComplexField& f, std::span<const double> y) const {
    if (y.size() != noise_.m1()) {
        throw std::invalid_argument("B coefficient vector has wrong length");
    }
    ComplexField out(f.grid_ptr());
    for (std::size_t i = 0; i < f.size(); ++i) {
        double mult = 0.0;
        for (std::size_t m = 0; m < y.size(); ++m) {
            mult += y[m] * noise_.b[m][i];
        }
        out[i] = mult * f[i];
    }
    return out;
}

ComplexField Model::apply_G(const ComplexField& f, std::size_t m) const {
    if (m >= noise_.m2()) {
        throw std::out_of_range("G mode index " + std::to_string(m) + " out of range");
    }
    ComplexField out(f.grid_ptr());
    const auto& gm = noise_.g[m];
    for (std::size_t i = 0; i < f.size(); ++i) {
        out[i] = gm[i] * g_sigma(noise_.g_shape, f[i]);
    }
    return out;
}

ComplexField Model::apply_G_full(const ComplexField& f, std::span<const double> y) const {
    if (y.size() != noise_.m2()) {
        throw std::invalid_argument("G coefficient vector has wrong length");
    }
    ComplexField out(f.grid_ptr());
    for (std::size_t i = 0; i < f.size(); ++i) {
        double mult = 0.0;
        for (std::size_t m = 0; m < y.size(); ++m) {
            mult += y[m] * noise_.g[m][i];
        }
        out[i] = mult * g_sigma(noise_.g_shape, f[i]);
    }
    return out;
}

ComplexField Model::stratonovich_correction(const ComplexField& f) const {
    ComplexField out(f.grid_ptr());
    for (std::size_t i = 0; i < f.size(); ++i) {
        out[i] = 0.5 * noise_.b_sq_sum[i] * f[i];
    }
    return out;
}

} // namespace snls
