#pragma once

// Discrete checks of the energy identities and inequalities satisfied by
// w along similarity time. Every check consumes an EnergyTrace sampled on a
// uniform s-grid and returns a CheckReport.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blowup/core.hpp"
#include "blowup/functionals.hpp"
#include "blowup/similarity.hpp"
#include "blowup/solver.hpp"

namespace blowup {

enum class CheckStatus { pass, fail, inconclusive, not_applicable };

inline std::string_view to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
    case CheckStatus::not_applicable: return "not_applicable";
    }
    return "?";
}

struct CheckReport {
    std::string name;
    CheckStatus status = CheckStatus::inconclusive;
    double lhs = 0.0, rhs = 0.0;
    double residual = 0.0, tolerance = 0.0;
    std::map<std::string, double> metrics; ///< resolution metadata and fitted constants
    std::vector<std::string> notes;

    [[nodiscard]] bool passed() const { return status == CheckStatus::pass; }
    [[nodiscard]] bool failed() const { return status == CheckStatus::fail; }

    /// pass/fail from residual <= tolerance.
    void decide() { status = residual <= tolerance ? CheckStatus::pass : CheckStatus::fail; }
};

/// Discretization scales entering the default tolerance
/// 10 (h_y² + h_s²) max(1, scale).
struct Resolution {
    double dy = 1.0 / 1024;
    double ds = 0.01;
    double dr = 0.0;      ///< physical spacing, 0 when not applicable
    double tau_min = 1.0; ///< smallest T0 - t among the frames

    /// Effective y-spacing: the y-grid or the physical grid seen in y.
    [[nodiscard]] double hy() const { return std::max(dy, dr > 0.0 ? dr / tau_min : 0.0); }
    [[nodiscard]] double tolerance(double scale) const {
        return 10.0 * (hy() * hy() + ds * ds) * std::max(1.0, scale);
    }
    void annotate(CheckReport& r) const {
        r.metrics["dy"] = dy;
        r.metrics["ds"] = ds;
        r.metrics["dr"] = dr;
        r.metrics["hy_effective"] = hy();
    }
};

// ---------------------------------------------------------------------------
// Trace construction
// ---------------------------------------------------------------------------

/// Refresh H and G_η after changing σ or θ.
inline void retune(EnergyTrace& tr, const ModelParams& m) {
    tr.sigma = m.sigma;
    tr.theta = m.theta;
    for (auto& f : tr.frames) {
        f.H = f.E0 + f.I0 + m.sigma * std::exp(-m.gamma * f.s);
        f.G_eta = scaled_G_eta(f.H_eta, f.s, m.eta, m.theta, m.p);
    }
}

/// Uniform spacing of the trace in s; throws if not uniform.
inline double trace_ds(const EnergyTrace& tr) {
    if (tr.size() < 2) return 0.0;
    const double ds = (tr.frames.back().s - tr.frames.front().s) / static_cast<double>(tr.size() - 1);
    for (std::size_t k = 1; k < tr.size(); ++k)
        if (std::abs(tr.frames[k].s - tr.frames[k - 1].s - ds) > 1e-6 * ds)
            throw FrameError("energy trace must be uniform in s");
    return ds;
}

namespace detail {

/// Cumulative trapezoid integral, out[k] = ∫_{s_0}^{s_k}.
inline std::vector<double> cumulative(const std::vector<double>& v, double ds) {
    std::vector<double> c(v.size(), 0.0);
    for (std::size_t k = 1; k < v.size(); ++k) c[k] = c[k - 1] + 0.5 * ds * (v[k] + v[k - 1]);
    return c;
}

inline std::optional<std::size_t> window_steps(double W, double ds) {
    if (!(ds > 0.0)) return std::nullopt;
    const double m = W / ds;
    const double r = std::round(m);
    if (r < 1.0 || std::abs(m - r) > 1e-6) return std::nullopt;
    return static_cast<std::size_t>(r);
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline void note_window(CheckReport& r, double W) {
    r.metrics["window"] = W;
    if (W != 10.0) r.notes.push_back("shortened window W=" + short_num(W) + " (reference length 10)");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

/// (s, d/ds(E₀+I₀) - RHS) at every interior frame, with the derivative by
/// central differences and RHS = -∫_{∂B} ws² + I₁ + I₂ + I₃.
inline std::vector<std::pair<double, double>> dissipation_residuals(const EnergyTrace& tr) {
    const double ds = trace_ds(tr);
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
        const auto& a = tr.frames[k - 1];
        const auto& b = tr.frames[k];
        const auto& c = tr.frames[k + 1];
        const double lhs = ((c.E0 + c.I0) - (a.E0 + a.I0)) / (2.0 * ds);
        const double rhs = -b.boundary + b.I1 + b.I2 + b.I3;
        out.emplace_back(b.s, lhs - rhs);
    }
    return out;
}

inline CheckReport check_dissipation_identity(const EnergyTrace& tr, const Resolution& res) {
    CheckReport r;
    r.name = "dissipation_identity";
    res.annotate(r);
    if (tr.size() < 3) {
        r.notes.push_back("fewer than three frames");
        return r;
    }
    const double ds = trace_ds(tr);
    if (ds > 0.25) {
        r.notes.push_back("frames too coarse in s");
        return r;
    }
    double scale = 0.0;
    for (const auto& f : tr.frames)
        scale = std::max({scale, std::abs(f.E0), std::abs(f.boundary), std::abs(f.I1), std::abs(f.I2), std::abs(f.I3)});
    auto resid = dissipation_residuals(tr);
    double worst = 0.0;
    for (const auto& [s, e] : resid)
        if (std::abs(e) >= worst) {
            worst = std::abs(e);
            r.metrics["worst_s"] = s;
        }
    const auto& mid = tr.frames[tr.size() / 2];
    r.lhs = (tr.frames[tr.size() / 2 + 1].E0 + tr.frames[tr.size() / 2 + 1].I0 - tr.frames[tr.size() / 2 - 1].E0 -
             tr.frames[tr.size() / 2 - 1].I0) /
            (2.0 * ds);
    r.rhs = -mid.boundary + mid.I1 + mid.I2 + mid.I3;
    r.residual = worst;
    r.tolerance = res.tolerance(scale);
    r.metrics["scale"] = scale;
    r.decide();
    return r;
}

/// Non-increase of E₀ between consecutive frames, up to the tolerance.
inline CheckReport check_energy_monotone(const EnergyTrace& tr, const Resolution& res) {
    CheckReport r;
    r.name = "e0_nonincreasing";
    res.annotate(r);
    if (tr.size() < 2) {
        r.notes.push_back("fewer than two frames");
        return r;
    }
    double scale = 0.0, worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tr.size(); ++k) {
        scale = std::max(scale, std::abs(tr.frames[k].E0));
        if (k > 0) worst = std::max(worst, tr.frames[k].E0 - tr.frames[k - 1].E0);
    }
    r.lhs = tr.frames.back().E0;
    r.rhs = tr.frames.front().E0;
    r.residual = worst;
    r.tolerance = res.tolerance(scale);
    r.metrics["scale"] = scale;
    r.decide();
    return r;
}

/// Windowed Lyapunov inequality
///   H(s+W) - H(s) <= -∫_s^{s+W} ∫_{∂B} ws² + tol
/// over every window start on the trace. With `reversed` the opposite
/// inequality H(s+W) - H(s) >= +∫∫ is tested instead (negative control).
inline CheckReport check_lyapunov_window(const EnergyTrace& tr, double W, const Resolution& res, bool reversed = false) {
    CheckReport r;
    r.name = reversed ? "lyapunov_window_reversed" : "lyapunov_window";
    res.annotate(r);
    detail::note_window(r, W);
    const double ds = trace_ds(tr);
    auto steps = detail::window_steps(W, ds);
    if (!steps || *steps >= tr.size()) throw FrameError("window exceeds the trace or is not a multiple of ds");
    const auto D = detail::cumulative(tr.column(&FrameIntegrals::boundary), ds);
    double scale = 0.0, worst = -std::numeric_limits<double>::infinity();
    std::size_t windows = 0;
    // σ is left out of the scale so that tuning cannot loosen the tolerance
    for (const auto& f : tr.frames) scale = std::max({scale, std::abs(f.E0 + f.I0), std::abs(f.boundary)});
    for (std::size_t k = 0; k + *steps < tr.size(); ++k) {
        const std::size_t j = k + *steps;
        const double dH = tr.frames[j].H - tr.frames[k].H;
        const double diss = D[j] - D[k];
        const double excess = reversed ? (diss - dH) : (dH + diss);
        if (excess > worst) {
            worst = excess;
            r.lhs = dH;
            r.rhs = -diss;
            r.metrics["worst_s"] = tr.frames[k].s;
        }
        ++windows;
    }
    r.metrics["windows"] = static_cast<double>(windows);
    r.metrics["sigma"] = tr.sigma;
    r.residual = worst;
    r.tolerance = res.tolerance(scale);
    r.decide();
    return r;
}

/// Dissipation inequality for G_η between every pair of frames.
inline CheckReport check_g_eta_decrease(const EnergyTrace& tr, const ModelParams& m, const Resolution& res) {
    CheckReport r;
    r.name = "g_eta_decrease";
    res.annotate(r);
    const double eta = m.eta, p = m.p;
    const double beta = eta * (p + 3.0) / 2.0;
    const double c1 = eta * (p - 1.0) / (p + 15.0);
    const double c2 = eta * (p - 1.0) / (8.0 * (p + 1.0));
    const double c3 = eta * (p - 1.0) / 16.0;
    if (tr.size() < 2) {
        r.notes.push_back("fewer than two frames");
        return r;
    }
    const double ds = trace_ds(tr);
    std::vector<double> dens(tr.size());
    double scale = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto& f = tr.frames[k];
        dens[k] = std::exp(-beta * f.s) * (c1 * f.le_ws + c2 * f.le_wp1 + c3 * f.le_grad);
        scale = std::max({scale, std::abs(f.H_eta) * std::exp(-beta * f.s), std::abs(dens[k])});
    }
    const auto C = detail::cumulative(dens, ds);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tr.size(); ++k)
        for (std::size_t j = k + 1; j < tr.size(); ++j) {
            const double dG = tr.frames[j].G_eta - tr.frames[k].G_eta;
            const double excess = dG + (C[j] - C[k]);
            if (excess > worst) {
                worst = excess;
                r.lhs = dG;
                r.rhs = -(C[j] - C[k]);
                r.metrics["worst_s1"] = tr.frames[k].s;
                r.metrics["worst_s2"] = tr.frames[j].s;
            }
        }
    r.metrics["theta"] = m.theta;
    r.metrics["eta"] = eta;
    r.residual = worst;
    r.tolerance = res.tolerance(scale);
    r.decide();
    if (r.failed() && m.theta == 0.0) r.notes.push_back("theta under-tuned");
    return r;
}

/// Least-squares slope of log Q(s) where Q(s) is the windowed space-time
/// integral of ws² + |w|^{p+1} + |∇w|²; passes if the slope stays below
/// η(p+3)/2 + slack.
inline CheckReport check_rough_bound(const EnergyTrace& tr, double eta, double p, double W, double slack = 0.05,
                                     std::size_t min_windows = 5) {
    CheckReport r;
    r.name = "rough_bound";
    detail::note_window(r, W);
    r.metrics["eta"] = eta;
    const double ds = trace_ds(tr);
    auto steps = detail::window_steps(W, ds);
    if (!steps || *steps >= tr.size()) {
        r.notes.push_back("trace shorter than one window");
        return r;
    }
    std::vector<double> dens(tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) dens[k] = tr.frames[k].ws2 + tr.frames[k].wp1 + tr.frames[k].grad2;
    const auto C = detail::cumulative(dens, ds);
    const std::size_t nwin = tr.size() - *steps;
    if (nwin < min_windows) {
        r.notes.push_back("fewer than " + std::to_string(min_windows) + " windows");
        return r;
    }
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < nwin; ++k) {
        const double q = C[k + *steps] - C[k];
        if (q > 0.0) {
            xs.push_back(tr.frames[k].s);
            ys.push_back(std::log(q));
        }
    }
    r.rhs = eta * (p + 3.0) / 2.0;
    r.tolerance = slack;
    if (xs.size() < 2) {
        r.notes.push_back("vanishing space-time integrals");
        r.lhs = 0.0;
        r.residual = -r.rhs;
        r.decide();
        return r;
    }
    const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xm) * (xs[i] - xm);
        sxy += (xs[i] - xm) * (ys[i] - ym);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    r.lhs = slope;
    r.residual = slope - r.rhs;
    r.metrics["slope"] = slope;
    r.metrics["K1_fit"] = std::exp(ym - slope * xm);
    r.metrics["windows"] = static_cast<double>(xs.size());
    r.decide();
    return r;
}

/// Per-window residual of the identity obtained by multiplying the
/// similarity equation by w and integrating over B × [s, s+W].
inline std::vector<std::pair<double, double>> pohozaev_residuals(const EnergyTrace& tr, double W, double p, int N) {
    const double ds = trace_ds(tr);
    auto steps = detail::window_steps(W, ds);
    if (!steps || *steps >= tr.size()) throw FrameError("window exceeds the trace or is not a multiple of ds");
    const double cw = (2.0 * p + 2.0) / ((p - 1.0) * (p - 1.0));
    (void)N;
    std::vector<double> dens(tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto& f = tr.frames[k];
        dens[k] = f.ws2 - f.grad_tan - cw * f.w2 + f.wp1 + 2.0 * f.ws_ydw - 2.0 * f.w_ws_bdry + f.pert_f + f.pert_g;
    }
    const auto C = detail::cumulative(dens, ds);
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 0; k + *steps < tr.size(); ++k) {
        const std::size_t j = k + *steps;
        out.emplace_back(tr.frames[k].s, (tr.frames[j].bracket - tr.frames[k].bracket) - (C[j] - C[k]));
    }
    return out;
}

inline CheckReport check_pohozaev_identity(const EnergyTrace& tr, double W, const ModelParams& m, const Resolution& res) {
    CheckReport r;
    r.name = "pohozaev_identity";
    res.annotate(r);
    detail::note_window(r, W);
    const auto resid = pohozaev_residuals(tr, W, m.p, m.N);
    double scale = 0.0;
    for (const auto& f : tr.frames) scale = std::max({scale, std::abs(f.bracket), f.ws2, f.wp1, f.w2, f.grad_tan});
    double worst = 0.0;
    for (const auto& [s, e] : resid)
        if (std::abs(e) >= worst) {
            worst = std::abs(e);
            r.metrics["worst_s"] = s;
        }
    r.lhs = tr.frames.back().bracket - tr.frames.front().bracket;
    r.residual = worst;
    r.tolerance = res.tolerance(scale) * W;
    r.metrics["scale"] = scale;
    r.decide();
    return r;
}

/// Smallest K₃ with ∫∫|w|^{p+1} <= K₃/ε₁ + K₃ ε₁ ∫∫|∇w|² + C ∫(ws(s)² + ws(s+W)²)
/// over every window of the trace.
inline double fit_K3(const EnergyTrace& tr, double eps1, double W, double C) {
    const double ds = trace_ds(tr);
    auto steps = detail::window_steps(W, ds);
    if (!steps || *steps >= tr.size()) throw FrameError("window exceeds the trace or is not a multiple of ds");
    const auto L = detail::cumulative(tr.column(&FrameIntegrals::wp1), ds);
    const auto G = detail::cumulative(tr.column(&FrameIntegrals::grad2), ds);
    double K = 0.0;
    for (std::size_t k = 0; k + *steps < tr.size(); ++k) {
        const std::size_t j = k + *steps;
        const double lhs = L[j] - L[k];
        const double b = C * (tr.frames[k].ws2 + tr.frames[j].ws2);
        K = std::max(K, (lhs - b) / (1.0 / eps1 + eps1 * (G[j] - G[k])));
    }
    return K;
}

/// Space-time L^{p+1} control with a calibrated K₃: passes when the bound
/// holds on every window and the K₃ fitted at each supplied resolution
/// stays within ±50% of the calibration value.
inline CheckReport check_lp1_control(const std::vector<const EnergyTrace*>& traces, double eps1, double W, double p,
                                     double K3_calibrated) {
    CheckReport r;
    r.name = "lp1_control";
    detail::note_window(r, W);
    if (!(eps1 > 0.0 && eps1 < 1.0)) throw DomainError("eps1 must lie in (0,1)");
    const double C = (p + 1.0) / (p - 1.0);
    r.metrics["C"] = C;
    r.metrics["eps1"] = eps1;
    r.metrics["K3_calibrated"] = K3_calibrated;
    double worst_ratio = 0.0, spread = 0.0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const double K = fit_K3(*traces[i], eps1, W, C);
        r.metrics["K3_fit_" + std::to_string(i)] = K;
        worst_ratio = std::max(worst_ratio, K / std::max(K3_calibrated, 1e-300));
        if (K3_calibrated > 0.0) spread = std::max(spread, std::abs(K / K3_calibrated - 1.0));
    }
    r.lhs = worst_ratio;
    r.rhs = 1.0;
    r.residual = std::max(worst_ratio - 1.0, spread - 0.5);
    r.tolerance = 1e-12;
    r.metrics["K3_spread"] = spread;
    r.decide();
    return r;
}

// ---------------------------------------------------------------------------
// Blow-up criterion
// ---------------------------------------------------------------------------

struct CriterionRow {
    double amplitude = 0.0;
    double H_first = 0.0;
    bool blew_up = false; ///< reached the cap before T0
    double t_cap = 0.0;
};

/// {H(first frame) < 0} must be contained in {blow-up before T0}.
inline CheckReport blowup_criterion_report(const std::vector<CriterionRow>& rows) {
    CheckReport r;
    r.name = "blowup_criterion";
    std::size_t negative = 0, counter = 0;
    for (const auto& row : rows) {
        if (row.H_first < 0.0) {
            ++negative;
            if (!row.blew_up) ++counter;
        }
    }
    r.metrics["rows"] = static_cast<double>(rows.size());
    r.metrics["negative_H"] = static_cast<double>(negative);
    r.metrics["counterexamples"] = static_cast<double>(counter);
    r.lhs = static_cast<double>(negative);
    r.rhs = static_cast<double>(negative - counter);
    if (negative == 0) {
        r.status = CheckStatus::not_applicable;
        r.notes.push_back("no sampled amplitude gives H < 0; the criterion makes no claim");
        return r;
    }
    r.residual = static_cast<double>(counter);
    r.tolerance = 0.0;
    r.decide();
    return r;
}

// ---------------------------------------------------------------------------
// Blow-up rate
// ---------------------------------------------------------------------------

struct RateSample {
    double t = 0.0, tau = 0.0;
    double q_u = 0.0, q_ut = 0.0, q_grad = 0.0;
    [[nodiscard]] double sum() const { return q_u + q_ut + q_grad; }
};

/// Scaled L² quantities on B(0, T - t), computed in similarity variables:
/// ‖w‖, ‖ws + y·∇w + 2w/(p-1)‖ and ‖∇w‖ over the unit ball.
inline RateSample scaled_norms(const RadialSnapshot& snap, double T, double p, int N, std::size_t y_cells) {
    const auto st = to_similarity(snap, 0.0, T, p, y_cells);
    const double a = 2.0 / (p - 1.0);
    std::vector<double> w2(st.size()), v2(st.size()), g2(st.size());
    for (std::size_t j = 0; j < st.size(); ++j) {
        const double v = st.ws[j] + st.ygrid.at(j) * st.wy[j] + a * st.w[j];
        w2[j] = st.w[j] * st.w[j];
        v2[j] = v * v;
        g2[j] = st.wy[j] * st.wy[j];
    }
    RateSample r;
    r.t = snap.t;
    r.tau = T - snap.t;
    r.q_u = std::sqrt(ball_integral(st.ygrid, w2, N, 0.0));
    r.q_ut = std::sqrt(ball_integral(st.ygrid, v2, N, 0.0));
    r.q_grad = std::sqrt(ball_integral(st.ygrid, g2, N, 0.0));
    return r;
}

/// Log-log slope of the amplitude trace against T - t over tau in
/// [tau_lo, tau_hi], and the band of the scaled norms over the snapshots
/// in the same range. Passes iff the slope is within 2% of -2/(p-1) and
/// max/min of the summed scaled norms is at most `band`.
inline CheckReport fit_blowup_rate(const Trajectory& traj, double T, double tau_lo, double tau_hi, std::size_t y_cells,
                                   std::vector<RateSample>* samples = nullptr, double band = 10.0) {
    CheckReport r;
    r.name = "blowup_rate";
    if (!traj.reached_cap) {
        r.status = CheckStatus::not_applicable;
        r.notes.push_back("trajectory does not blow up");
        return r;
    }
    const double p = traj.meta.p;
    const double target = -2.0 / (p - 1.0);
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        const double tau = T - traj.t[k];
        if (tau >= tau_lo && tau <= tau_hi && traj.umax[k] > 0.0) {
            xs.push_back(std::log(tau));
            ys.push_back(std::log(traj.umax[k]));
        }
    }
    r.metrics["tau_lo"] = tau_lo;
    r.metrics["tau_hi"] = tau_hi;
    if (xs.size() < 3) {
        r.notes.push_back("fewer than three trace samples in the rate window");
        return r;
    }
    const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xm) * (xs[i] - xm);
        sxy += (xs[i] - xm) * (ys[i] - ym);
    }
    const double slope = sxy / sxx;
    r.metrics["slope"] = slope;
    r.metrics["slope_target"] = target;
    r.lhs = slope;
    r.rhs = target;
    const double slope_err = std::abs(slope / target - 1.0);

    std::vector<RateSample> qs;
    if (traj.meta.N >= 2 && traj.config.geometry == Geometry::radial) {
        for (const auto& snap : traj.snapshots) {
            const double tau = T - snap.t;
            if (tau >= tau_lo * (1 - 1e-9) && tau <= tau_hi * (1 + 1e-9))
                qs.push_back(scaled_norms(snap, T, p, traj.meta.N, y_cells));
        }
    }
    double ratio = 1.0;
    if (!qs.empty()) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& q : qs) {
            lo = std::min(lo, q.sum());
            hi = std::max(hi, q.sum());
        }
        ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        r.metrics["band_min"] = lo;
        r.metrics["band_max"] = hi;
    } else {
        r.notes.push_back("no snapshots in the rate window; band not evaluated");
    }
    r.metrics["band_ratio"] = ratio;
    r.metrics["band_samples"] = static_cast<double>(qs.size());
    // residual: worst normalized violation of the two criteria
    r.residual = std::max(slope_err / 0.02, ratio / band) - 1.0;
    r.tolerance = 0.0;
    r.decide();
    if (samples) *samples = std::move(qs);
    return r;
}

// ---------------------------------------------------------------------------
// Convergence helpers
// ---------------------------------------------------------------------------

/// max |residual| over the given s-values (matched to 1e-9).
inline double residual_at(const std::vector<std::pair<double, double>>& res, const std::vector<double>& s_eval) {
    double worst = 0.0;
    for (double s : s_eval) {
        bool found = false;
        for (const auto& [sk, e] : res)
            if (std::abs(sk - s) < 1e-9) {
                worst = std::max(worst, std::abs(e));
                found = true;
            }
        if (!found) throw FrameError("evaluation point not on the trace");
    }
    return worst;
}

} // namespace blowup
