#pragma once

// Weighted energy functionals of w on the unit ball and the per-frame
// integrals consumed by the verifier.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "blowup/core.hpp"
#include "blowup/interpolation.hpp"
#include "blowup/quadrature.hpp"

namespace blowup {

namespace detail {

template <class Fn>
std::vector<double> pointwise(const WState& st, Fn&& fn) {
    std::vector<double> out(st.size());
    for (std::size_t j = 0; j < st.size(); ++j) out[j] = fn(j, st.ygrid.at(j));
    return out;
}

} // namespace detail

/// E_η(w); η = 0 gives E₀. Uses |∇w|² - (y·∇w)² = w_y² (1 - |y|²) for
/// radial fields.
inline double energy_E(const WState& st, double eta, const ModelParams& m) {
    const double p = m.p;
    const double c2 = (p + 1.0) / ((p - 1.0) * (p - 1.0));
    auto bulk = detail::pointwise(st, [&](std::size_t j, double) {
        return 0.5 * st.ws[j] * st.ws[j] + c2 * st.w[j] * st.w[j] - m.power_p1(st.w[j]) / (p + 1.0);
    });
    auto grad = detail::pointwise(st, [&](std::size_t j, double) { return 0.5 * st.wy[j] * st.wy[j]; });
    return ball_integral(st.ygrid, bulk, m.N, eta) + ball_integral(st.ygrid, grad, m.N, eta + 1.0);
}

/// I_η(w) = -e^{-2(p+1)s/(p-1)} ∫ F(e^{2s/(p-1)} w) ρ_η.
inline double source_I(const WState& st, double eta, const ModelParams& m) {
    if (!m.perturbation.has_source()) return 0.0;
    const double p = m.p;
    const double lift = std::exp(2.0 * st.s / (p - 1.0));
    const double damp = std::exp(-2.0 * (p + 1.0) * st.s / (p - 1.0));
    auto F = detail::pointwise(st, [&](std::size_t j, double) { return m.perturbation.F(lift * st.w[j]); });
    return -damp * ball_integral(st.ygrid, F, m.N, eta);
}

/// J_η(w) = -η ∫ w ∂ₛw ρ_η + (Nη/2) ∫ w² ρ_η.
inline double coupling_J(const WState& st, double eta, const ModelParams& m) {
    if (eta == 0.0) return 0.0;
    auto f = detail::pointwise(st, [&](std::size_t j, double) {
        return -eta * st.w[j] * st.ws[j] + 0.5 * m.N * eta * st.w[j] * st.w[j];
    });
    return ball_integral(st.ygrid, f, m.N, eta);
}

inline double total_H_eta(const WState& st, double eta, const ModelParams& m) {
    return energy_E(st, eta, m) + source_I(st, eta, m) + coupling_J(st, eta, m);
}

/// G_η = (H_η + θ) e^{-η(p+3)s/2}.
inline double scaled_G_eta(double h_eta, double s, double eta, double theta, double p) {
    const double e = std::exp(-eta * (p + 3.0) * s / 2.0);
    return h_eta * e + theta * e;
}

/// H = E₀ + I₀ + σ e^{-γs}.
inline double lyapunov_H(const WState& st, const ModelParams& m) {
    return energy_E(st, 0.0, m) + source_I(st, 0.0, m) + m.sigma * std::exp(-m.gamma * st.s);
}

/// Value of a field on |y| = 1 by quadratic extrapolation from the last
/// three cells.
inline double boundary_value(const WState& st, std::span<const double> f) {
    return extrapolate_quadratic(st.ygrid, f, 1.0);
}

/// ∫_{∂B} (∂ₛw)² dσ for a radial field.
inline double boundary_dissipation(const WState& st, int N) {
    const double v = boundary_value(st, st.ws);
    return sphere_area(N) * v * v;
}

/// RHS - LHS of the weighted Hardy inequality
///   ∫ w² |y|² ρ_η / (1-|y|²) <= η^{-2} ∫ |∇w|² (1-|y|²) ρ_η + (N/η) ∫ w² ρ_η.
inline double hardy_gap(const UniformGrid& g, std::span<const double> w, std::span<const double> wy, double eta, int N) {
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("hardy_gap: eta must lie in (0,1)");
    std::vector<double> lhs(w.size()), grad(w.size()), mass(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double y = g.at(j);
        lhs[j] = w[j] * w[j] * y * y;
        grad[j] = wy[j] * wy[j];
        mass[j] = w[j] * w[j];
    }
    const double L = ball_integral(g, lhs, N, eta - 1.0);
    const double R = ball_integral(g, grad, N, eta + 1.0) / (eta * eta) + N / eta * ball_integral(g, mass, N, eta);
    return R - L;
}

inline double hardy_gap(const WState& st, double eta, int N) { return hardy_gap(st.ygrid, st.w, st.wy, eta, N); }

/// Coefficient of ∫|w|^{p+1} ρ_η in the Jensen-type bound.
inline double jensen_coefficient(double eta, double p) { return eta * (p - 1.0) / (8.0 * (p + 1.0)); }

/// Constant field maximizing C_j a² - c a^{p+1}.
inline double jensen_maximizer(double eta, double p, double Cj) {
    const double c = jensen_coefficient(eta, p);
    return std::pow(2.0 * Cj / ((p + 1.0) * c), 1.0 / (p - 1.0));
}

/// c ∫|w|^{p+1} ρ_η + C - C_j ∫ w² ρ_η with C = sup_a (C_j a² - c a^{p+1}) ∫ρ_η.
inline double jensen_gap(const UniformGrid& g, std::span<const double> w, double eta, double p, int N, double Cj) {
    if (!(Cj > 0.0)) throw DomainError("jensen_gap: C_j must be positive");
    const double c = jensen_coefficient(eta, p);
    const double a = jensen_maximizer(eta, p, Cj);
    const double sup = Cj * a * a - c * std::pow(a, p + 1.0);
    std::vector<double> one(w.size(), 1.0), pw(w.size()), sq(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        pw[j] = std::pow(std::abs(w[j]), p + 1.0);
        sq[j] = w[j] * w[j];
    }
    const double C = sup * ball_integral(g, one, N, eta);
    return c * ball_integral(g, pw, N, eta) + C - Cj * ball_integral(g, sq, N, eta);
}

/// ‖w‖_{H¹(B)} + ‖∂ₛw‖_{L²(B)}, unweighted.
inline double h1l2_norm(const WState& st, int N) {
    auto a = detail::pointwise(st, [&](std::size_t j, double) { return st.w[j] * st.w[j] + st.wy[j] * st.wy[j]; });
    auto b = detail::pointwise(st, [&](std::size_t j, double) { return st.ws[j] * st.ws[j]; });
    return std::sqrt(ball_integral(st.ygrid, a, N, 0.0)) + std::sqrt(ball_integral(st.ygrid, b, N, 0.0));
}

// ---------------------------------------------------------------------------
// Per-frame integrals
// ---------------------------------------------------------------------------

/// Everything the checks need from one frame, evaluated once.
struct FrameIntegrals {
    double s = 0.0;
    // functionals
    double E0 = 0, I0 = 0, E_eta = 0, I_eta = 0, J_eta = 0, H_eta = 0, G_eta = 0, H = 0;
    double boundary = 0; ///< ∫_{∂B} ws²
    double h1l2 = 0;
    // source terms of d/ds (E₀ + I₀)
    double I1 = 0, I2 = 0, I3 = 0;
    // unweighted ball integrals
    double ws2 = 0, grad2 = 0, grad_tan = 0, w2 = 0, wp1 = 0, ws_ydw = 0;
    double bracket = 0;      ///< ∫ (w ws + ((p+3)/(2(p-1)) - N) w²)
    double w_ws_bdry = 0;    ///< ∫_{∂B} w ws
    double pert_f = 0;       ///< e^{-2ps/(p-1)} ∫ f(e^{2s/(p-1)} w) w
    double pert_g = 0;       ///< e^{-2ps/(p-1)} ∫ g(e^{(p+1)s/(p-1)}(ws + y·∇w + 2w/(p-1))) w
    // weighted dissipation terms
    double le_ws = 0;   ///< ∫ ws² ρ_η / (1-|y|²)
    double le_wp1 = 0;  ///< ∫ |w|^{p+1} ρ_η
    double le_grad = 0; ///< ∫ |∇w|² (1-|y|²) ρ_η
};

inline FrameIntegrals frame_integrals(const WState& st, const ModelParams& m) {
    FrameIntegrals fi;
    const double p = m.p, eta = m.eta, s = st.s;
    const int N = m.N;
    const auto& g = st.ygrid;
    const std::size_t n = st.size();
    const double a = 2.0 / (p - 1.0);
    fi.s = s;
    fi.E0 = energy_E(st, 0.0, m);
    fi.I0 = source_I(st, 0.0, m);
    fi.E_eta = energy_E(st, eta, m);
    fi.I_eta = source_I(st, eta, m);
    fi.J_eta = coupling_J(st, eta, m);
    fi.H_eta = fi.E_eta + fi.I_eta + fi.J_eta;
    fi.G_eta = scaled_G_eta(fi.H_eta, s, eta, m.theta, p);
    fi.H = fi.E0 + fi.I0 + m.sigma * std::exp(-m.gamma * s);
    fi.boundary = boundary_dissipation(st, N);
    fi.h1l2 = h1l2_norm(st, N);

    std::vector<double> ws2(n), wy2(n), w2(n), wp1(n), cross(n), br(n), fw(n), gw(n), F(n), gs(n);
    const double lift = std::exp(a * s);
    const double glift = std::exp((p + 1.0) * s / (p - 1.0));
    const double scale_fg = std::exp(-2.0 * p * s / (p - 1.0));
    const double cb = (p + 3.0) / (2.0 * (p - 1.0)) - N;
    const auto& pert = m.perturbation;
    for (std::size_t j = 0; j < n; ++j) {
        const double y = g.at(j), w = st.w[j], ws = st.ws[j], wy = st.wy[j];
        ws2[j] = ws * ws;
        wy2[j] = wy * wy;
        w2[j] = w * w;
        wp1[j] = m.power_p1(w);
        cross[j] = ws * y * wy;
        br[j] = w * ws + cb * w * w;
        const double fv = pert.has_source() ? pert.f(lift * w) : 0.0;
        const double gv = pert.has_damping() ? pert.g(glift * (ws + y * wy + a * w)) : 0.0;
        fw[j] = fv * w;
        gw[j] = gv * w;
        gs[j] = gv * ws;
        F[j] = pert.has_source() ? pert.F(lift * w) : 0.0;
    }
    fi.ws2 = ball_integral(g, ws2, N, 0.0);
    fi.grad2 = ball_integral(g, wy2, N, 0.0);
    fi.grad_tan = ball_integral(g, wy2, N, 1.0);
    fi.w2 = ball_integral(g, w2, N, 0.0);
    fi.wp1 = ball_integral(g, wp1, N, 0.0);
    fi.ws_ydw = ball_integral(g, cross, N, 0.0);
    fi.bracket = ball_integral(g, br, N, 0.0);
    fi.w_ws_bdry = sphere_area(N) * boundary_value(st, st.w) * boundary_value(st, st.ws);
    fi.pert_f = scale_fg * ball_integral(g, fw, N, 0.0);
    fi.pert_g = scale_fg * ball_integral(g, gw, N, 0.0);
    fi.I1 = 2.0 * (p + 1.0) / (p - 1.0) * std::exp(-2.0 * (p + 1.0) * s / (p - 1.0)) * ball_integral(g, F, N, 0.0);
    fi.I2 = -a * fi.pert_f;
    fi.I3 = scale_fg * ball_integral(g, gs, N, 0.0);
    fi.le_ws = ball_integral(g, ws2, N, eta - 1.0);
    fi.le_wp1 = ball_integral(g, wp1, N, eta);
    fi.le_grad = ball_integral(g, wy2, N, eta + 1.0);
    return fi;
}

/// Time series of the functionals along similarity time.
struct EnergyTrace {
    double eta = 0.5, sigma = 0.0, theta = 0.0, gamma = 0.5;
    std::vector<FrameIntegrals> frames;

    [[nodiscard]] std::size_t size() const { return frames.size(); }
    [[nodiscard]] std::vector<double> column(double FrameIntegrals::*field) const {
        std::vector<double> out(frames.size());
        for (std::size_t k = 0; k < frames.size(); ++k) out[k] = frames[k].*field;
        return out;
    }
};

} // namespace blowup
