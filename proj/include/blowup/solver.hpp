#pragma once

// Explicit integrator for u_tt = Δu + |u|^(p-1)u + f(u) + g(u_t), radially
// symmetric in R^N or on a line, plus the blow-up time estimators built on
// its amplitude traces.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blowup/core.hpp"
#include "blowup/errors.hpp"

namespace blowup {

enum class Geometry { radial, line };
enum class Boundary { outgoing, periodic };

inline std::string_view to_string(Geometry g) { return g == Geometry::radial ? "radial" : "line"; }
inline std::string_view to_string(Boundary b) { return b == Boundary::outgoing ? "outgoing" : "periodic"; }

/// Default amplitude cap, lowered for large p so that T - t stays well
/// above the resolution of double precision time stamps.
inline double default_cap(double p) { return std::min(1e8, equilibrium_kappa(p) * std::pow(1e-9, -2.0 / (p - 1.0))); }

struct SolverConfig {
    Geometry geometry = Geometry::radial;
    Boundary boundary = Boundary::outgoing;
    double cfl = 0.5;
    /// dt <= amp_step * |u|_inf^(-(p-1)/2), i.e. a fixed fraction of the
    /// ODE time to blow-up.
    double amp_step = 0.02;
    double cap = 0.0; ///< 0 selects default_cap(p)
    bool nonlinear = true;
};

/// Spatially discretized right-hand side and one Verlet step.
class Solver {
public:
    Solver(ModelParams model, SolverConfig cfg, UniformGrid grid) : m_(std::move(model)), c_(cfg), g_(grid) {
        if (!(c_.cfl > 0.0 && c_.cfl <= 0.9)) throw ConfigError("cfl must lie in (0, 0.9]");
        if (g_.size < 3) throw ConfigError("solver grid needs at least 3 nodes");
        if (!(g_.spacing > 0.0)) throw ConfigError("grid spacing must be positive");
        if (c_.cap <= 0.0) c_.cap = default_cap(m_.p);
        if (c_.geometry == Geometry::radial) {
            if (c_.boundary == Boundary::periodic) throw ConfigError("periodic boundary needs line geometry");
            if (std::abs(g_.origin) > 0.0) throw ConfigError("radial grid must start at r = 0");
            build_radial();
        }
    }

    [[nodiscard]] const ModelParams& model() const { return m_; }
    [[nodiscard]] const SolverConfig& config() const { return c_; }
    [[nodiscard]] const UniformGrid& grid() const { return g_; }
    [[nodiscard]] double cap() const { return c_.cap; }

    /// Largest stable step for the current amplitude.
    [[nodiscard]] double stable_dt(double umax) const {
        double dt = c_.cfl * g_.spacing;
        if (c_.nonlinear && umax > 0.0) dt = std::min(dt, c_.amp_step * std::pow(umax, -0.5 * (m_.p - 1.0)));
        return dt;
    }

    /// Part of the acceleration that does not depend on u_t.
    void accel_u(std::span<const double> u, std::span<double> a) const {
        const std::size_t n = u.size();
        const double h = g_.spacing;
        if (c_.geometry == Geometry::radial) {
            a[0] = cR_[0] * (u[1] - u[0]);
            for (std::size_t j = 1; j + 1 < n; ++j) a[j] = cR_[j] * (u[j + 1] - u[j]) - cL_[j] * (u[j] - u[j - 1]);
            a[n - 1] = -cL_[n - 1] * (u[n - 1] - u[n - 2]) - bnd_u_ * u[n - 1];
        } else {
            const double ih2 = 1.0 / (h * h);
            for (std::size_t j = 1; j + 1 < n; ++j) a[j] = ((u[j + 1] - u[j]) - (u[j] - u[j - 1])) * ih2;
            if (c_.boundary == Boundary::periodic) {
                a[0] = ((u[1] - u[0]) - (u[0] - u[n - 1])) * ih2;
                a[n - 1] = ((u[0] - u[n - 1]) - (u[n - 1] - u[n - 2])) * ih2;
            } else {
                a[0] = (u[1] - u[0]) * 2.0 * ih2;
                a[n - 1] = -(u[n - 1] - u[n - 2]) * 2.0 * ih2;
            }
        }
        if (c_.nonlinear)
            for (std::size_t j = 0; j < n; ++j) a[j] += m_.nonlinearity(u[j]);
        if (m_.perturbation.has_source())
            for (std::size_t j = 0; j < n; ++j) a[j] += m_.perturbation.f(u[j]);
    }

    /// Velocity-dependent part: damping g(u_t) and the outgoing boundary flux.
    void accel_v(std::span<const double> v, std::span<double> a) const {
        const std::size_t n = v.size();
        if (m_.perturbation.has_damping())
            for (std::size_t j = 0; j < n; ++j) a[j] += m_.perturbation.g(v[j]);
        if (c_.boundary != Boundary::outgoing) return;
        if (c_.geometry == Geometry::radial) {
            a[n - 1] -= bnd_v_ * v[n - 1];
        } else {
            const double k = 2.0 / g_.spacing;
            a[0] -= k * v[0];
            a[n - 1] -= k * v[n - 1];
        }
    }

    [[nodiscard]] bool velocity_dependent() const {
        return m_.perturbation.has_damping() || c_.boundary == Boundary::outgoing;
    }

    /// Full acceleration at (u, v).
    [[nodiscard]] std::vector<double> acceleration(const RadialSnapshot& s) const {
        std::vector<double> a(s.u.size());
        accel_u(s.u, a);
        accel_v(s.ut, a);
        return a;
    }

    struct StepInfo {
        double residual = 0.0; ///< size of the fixed-point velocity correction
    };

    /// One kick-drift-kick step. `acc` holds the acceleration at the input
    /// state and is overwritten with the acceleration at the output state.
    StepInfo step_inplace(RadialSnapshot& s, std::vector<double>& acc, double dt) const {
        const std::size_t n = s.u.size();
        StepInfo info;
        for (std::size_t j = 0; j < n; ++j) s.ut[j] += 0.5 * dt * acc[j];
        for (std::size_t j = 0; j < n; ++j) s.u[j] += dt * s.ut[j];
        base_.resize(n);
        accel_u(s.u, base_);
        if (!velocity_dependent()) {
            for (std::size_t j = 0; j < n; ++j) s.ut[j] += 0.5 * dt * base_[j];
            acc = base_;
        } else {
            // predictor with the half-step velocity, then one correction
            half_ = s.ut;
            acc = base_;
            accel_v(half_, acc);
            pred_.resize(n);
            for (std::size_t j = 0; j < n; ++j) pred_[j] = half_[j] + 0.5 * dt * acc[j];
            acc = base_;
            accel_v(pred_, acc);
            for (std::size_t j = 0; j < n; ++j) {
                s.ut[j] = half_[j] + 0.5 * dt * acc[j];
                info.residual = std::max(info.residual, std::abs(s.ut[j] - pred_[j]));
            }
            acc = base_;
            accel_v(s.ut, acc);
        }
        s.t += dt;
        for (std::size_t j = 0; j < n; ++j)
            if (!std::isfinite(s.u[j]) || !std::isfinite(s.ut[j])) throw BlowupReached(s.t - dt);
        return info;
    }

    /// Functional form of a single step.
    [[nodiscard]] RadialSnapshot step(const RadialSnapshot& s, double dt) const {
        if (dt > c_.cfl * g_.spacing * (1.0 + 1e-12)) throw DomainError("dt exceeds cfl * dr");
        if (s.max_abs_u() >= c_.cap) throw DomainError("state already above the amplitude cap");
        RadialSnapshot out = s;
        auto acc = acceleration(s);
        step_inplace(out, acc, dt);
        return out;
    }

    /// Cell volumes (radial: shell volumes divided by |S^{N-1}|; line: dx
    /// with half cells at non-periodic ends).
    [[nodiscard]] std::vector<double> cell_volumes() const {
        if (c_.geometry == Geometry::radial) return V_;
        std::vector<double> v(g_.size, g_.spacing);
        if (c_.boundary == Boundary::outgoing) v.front() = v.back() = 0.5 * g_.spacing;
        return v;
    }

    /// Discrete linear-wave energy ½ v'Mv + ½ u'Ku, with K the (symmetric)
    /// stiffness of the flux-form Laplacian, without boundary terms. For
    /// radial geometry the sphere area factor is included.
    [[nodiscard]] double linear_energy(const RadialSnapshot& s) const {
        const auto V = cell_volumes();
        const std::size_t n = s.u.size();
        double kin = 0.0, pot = 0.0;
        for (std::size_t j = 0; j < n; ++j) kin += V[j] * s.ut[j] * s.ut[j];
        const double h = g_.spacing;
        if (c_.geometry == Geometry::radial) {
            for (std::size_t j = 0; j + 1 < n; ++j) {
                const double du = s.u[j + 1] - s.u[j];
                pot += A_[j] * du * du / h;
            }
        } else {
            for (std::size_t j = 0; j + 1 < n; ++j) {
                const double du = s.u[j + 1] - s.u[j];
                pot += du * du / h;
            }
            if (c_.boundary == Boundary::periodic) {
                const double du = s.u[0] - s.u[n - 1];
                pot += du * du / h;
            }
        }
        const double scale = c_.geometry == Geometry::radial ? sphere_area(m_.N) : 1.0;
        return 0.5 * scale * (kin + pot);
    }

    /// Energy conserved exactly (up to round-off) by the Verlet scheme for
    /// the linear wave without boundary flux: linear_energy - (dt²/8) a'Ma.
    [[nodiscard]] double shadow_energy(const RadialSnapshot& s, double dt) const {
        const auto V = cell_volumes();
        std::vector<double> a(s.u.size());
        accel_u(s.u, a);
        double am = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) am += V[j] * a[j] * a[j];
        const double scale = c_.geometry == Geometry::radial ? sphere_area(m_.N) : 1.0;
        return linear_energy(s) - scale * dt * dt / 8.0 * am;
    }

private:
    void build_radial() {
        const std::size_t n = g_.size;
        const double h = g_.spacing;
        const int N = m_.N;
        A_.resize(n);
        V_.resize(n);
        cL_.assign(n, 0.0);
        cR_.assign(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) A_[j] = std::pow((static_cast<double>(j) + 0.5) * h, N - 1);
        auto rn = [&](double r) { return std::pow(r, N) / N; };
        V_[0] = rn(0.5 * h);
        for (std::size_t j = 1; j + 1 < n; ++j)
            V_[j] = rn((static_cast<double>(j) + 0.5) * h) - rn((static_cast<double>(j) - 0.5) * h);
        const double R = g_.at(n - 1);
        V_[n - 1] = rn(R) - rn(R - 0.5 * h);
        for (std::size_t j = 0; j < n; ++j) {
            if (j + 1 < n) cR_[j] = A_[j] / (h * V_[j]);
            if (j > 0) cL_[j] = A_[j - 1] / (h * V_[j]);
        }
        const double AR = std::pow(R, N - 1);
        bnd_v_ = AR / V_[n - 1];
        bnd_u_ = AR / V_[n - 1] * (N - 1) / (2.0 * R);
    }

    ModelParams m_;
    SolverConfig c_;
    UniformGrid g_;
    std::vector<double> A_, V_, cL_, cR_; // A_[j] = r_{j+1/2}^{N-1}
    double bnd_v_ = 0.0, bnd_u_ = 0.0;
    mutable std::vector<double> base_, half_, pred_;
};

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct Trajectory {
    std::vector<RadialSnapshot> snapshots;
    // per-step trace
    std::vector<double> t;
    std::vector<double> umax;
    std::vector<std::vector<double>> probes; ///< probes[k][step] = u(x_k, t)
    std::vector<std::size_t> probe_index;
    double dt = 0.0; ///< last step size
    double cfl = 0.5;
    double cap = 1e8;
    ModelParams meta;
    SolverConfig config;
    bool reached_cap = false;
    bool nonfinite = false;
    double max_residual = 0.0;
    std::size_t steps = 0;
};

struct IntegrateOptions {
    double t_max = 1.0;
    std::vector<double> output_times; ///< hit exactly; must be increasing
    std::vector<std::size_t> probe_index;
    std::size_t max_steps = 50'000'000;
};

/// Advance `init` until t_max or the amplitude cap, storing snapshots at
/// the requested times.
inline Trajectory integrate(const Solver& solver, RadialSnapshot init, const IntegrateOptions& opt) {
    Trajectory tr;
    tr.meta = solver.model();
    tr.config = solver.config();
    tr.cfl = solver.config().cfl;
    tr.cap = solver.cap();
    tr.probe_index = opt.probe_index;
    tr.probes.resize(opt.probe_index.size());
    for (std::size_t i = 1; i < opt.output_times.size(); ++i)
        if (!(opt.output_times[i] > opt.output_times[i - 1])) throw ConfigError("output times must increase");
    for (auto k : opt.probe_index)
        if (k >= init.u.size()) throw ConfigError("probe index outside grid");
    if (init.u.size() != solver.grid().size || init.ut.size() != init.u.size())
        throw ConfigError("initial data does not match the solver grid");

    RadialSnapshot s = std::move(init);
    s.grid = solver.grid();
    auto record = [&] {
        tr.t.push_back(s.t);
        tr.umax.push_back(s.max_abs_u());
        for (std::size_t k = 0; k < tr.probe_index.size(); ++k) tr.probes[k].push_back(s.u[tr.probe_index[k]]);
    };
    std::size_t next_out = 0;
    while (next_out < opt.output_times.size() && opt.output_times[next_out] < s.t) ++next_out;
    auto maybe_output = [&] {
        while (next_out < opt.output_times.size() && std::abs(opt.output_times[next_out] - s.t) <= 1e-14 * (1.0 + std::abs(s.t))) {
            tr.snapshots.push_back(s);
            ++next_out;
        }
    };
    record();
    maybe_output();
    auto acc = solver.acceleration(s);
    double umax = s.max_abs_u();
    while (s.t < opt.t_max && tr.steps < opt.max_steps) {
        if (umax >= tr.cap) {
            tr.reached_cap = true;
            break;
        }
        double dt = std::min(solver.stable_dt(umax), opt.t_max - s.t);
        bool hits_output = false;
        if (next_out < opt.output_times.size() && s.t + dt >= opt.output_times[next_out]) {
            dt = opt.output_times[next_out] - s.t;
            hits_output = true;
        }
        const double t_target = hits_output ? opt.output_times[next_out] : (dt == opt.t_max - s.t ? opt.t_max : -1.0);
        try {
            auto info = solver.step_inplace(s, acc, dt);
            tr.max_residual = std::max(tr.max_residual, info.residual);
        } catch (const BlowupReached&) {
            tr.nonfinite = true;
            tr.reached_cap = true;
            break;
        }
        if (t_target >= 0.0) s.t = t_target; // pin to the requested time exactly
        tr.dt = dt;
        ++tr.steps;
        umax = s.max_abs_u();
        if (umax >= tr.cap) {
            // keep the trace strictly below the cap
            tr.reached_cap = true;
            break;
        }
        record();
        maybe_output();
    }
    return tr;
}

/// Closed-form blow-up solution of u'' = u^p: κ (T - t)^(-2/(p-1)).
inline double ode_reference(double p, double T, double t) {
    if (!(t < T)) throw DomainError("ode_reference: need t < T");
    return equilibrium_kappa(p) * std::pow(T - t, -2.0 / (p - 1.0));
}

/// d/dt of ode_reference.
inline double ode_reference_rate(double p, double T, double t) {
    return 2.0 / (p - 1.0) * ode_reference(p, T, t) / (T - t);
}

struct BlowupEstimate {
    double T = 0.0;
    double ci = 0.0;
    bool fallback = false;
    std::size_t samples = 0;
};

/// Root of the least-squares line through z = |u|^(-(p-1)/2) against t,
/// fitted over the final 30% of the log-amplitude climb.
inline BlowupEstimate estimate_blowup_time(std::span<const double> t, std::span<const double> amp, double p,
                                           double last_dt = 0.0) {
    const std::size_t n = t.size();
    if (n == 0 || amp.size() != n) throw InsufficientData("empty amplitude series");
    double a0 = std::numeric_limits<double>::infinity(), a1 = 0.0;
    for (double a : amp) {
        if (a > 0.0) a0 = std::min(a0, a);
        a1 = std::max(a1, a);
    }
    BlowupEstimate est;
    est.T = t[n - 1] + last_dt;
    est.ci = last_dt;
    est.fallback = true;
    if (!(a1 > 0.0) || !std::isfinite(a0)) return est;
    // start the window at the first sample after which the series stays above the threshold
    const double thr = std::exp(std::log(a0) + 0.7 * (std::log(a1) - std::log(a0)));
    std::size_t start = n;
    while (start > 0 && amp[start - 1] >= thr) --start;
    if (n - start < 3) start = n >= 3 ? n - std::max<std::size_t>(3, (3 * n) / 10) : 0;
    const std::size_t m = n - start;
    if (m < 3) return est;
    const double ex = -0.5 * (p - 1.0);
    double st = 0, sz = 0;
    std::vector<double> z(m);
    for (std::size_t i = 0; i < m; ++i) {
        z[i] = std::pow(amp[start + i], ex);
        st += t[start + i];
        sz += z[i];
    }
    const double tm = st / m, zm = sz / m;
    double stt = 0, stz = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dt = t[start + i] - tm;
        stt += dt * dt;
        stz += dt * (z[i] - zm);
    }
    if (!(stt > 0.0)) return est;
    const double b = stz / stt;
    const double a = zm - b * tm;
    if (!(b < 0.0)) return est;
    double sse = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = z[i] - (a + b * t[start + i]);
        sse += r * r;
    }
    const double s2 = m > 2 ? sse / static_cast<double>(m - 2) : 0.0;
    const double T = -a / b;
    // delta method: T - tm = -zm/b, var(zm) = s2/m, var(b) = s2/stt, independent
    const double var = s2 / static_cast<double>(m) / (b * b) + (zm * zm) / (b * b * b * b) * s2 / stt;
    if (!std::isfinite(T) || T < t[n - 1]) {
        est.T = std::max(t[n - 1] + last_dt, std::isfinite(T) ? T : 0.0);
        return est;
    }
    est.T = T;
    est.ci = 2.0 * std::sqrt(var);
    est.fallback = false;
    est.samples = m;
    return est;
}

/// Blow-up time of a capped trajectory.
inline BlowupEstimate detect_blowup(const Trajectory& traj) {
    if (!traj.reached_cap) throw NoBlowupDetected("trajectory never reached the amplitude cap");
    return estimate_blowup_time(traj.t, traj.umax, traj.meta.p, traj.dt);
}

// ---------------------------------------------------------------------------
// Blow-up graph
// ---------------------------------------------------------------------------

struct BlowupGraph {
    std::vector<double> centers;
    std::vector<double> T;
    std::vector<double> ci;
    std::vector<bool> ok;
    std::vector<std::string> error;
    std::vector<double> delta0; ///< fitted slope per center (NaN if none)

    [[nodiscard]] std::size_t size() const { return centers.size(); }

    /// max over valid pairs of |T_i - T_j| - |x_i - x_j|.
    [[nodiscard]] double lipschitz_excess() const {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = i + 1; j < size(); ++j)
                if (ok[i] && ok[j])
                    worst = std::max(worst, std::abs(T[i] - T[j]) - std::abs(centers[i] - centers[j]));
        return worst;
    }
};

/// Per-center blow-up times from the probe series of one capped run.
inline BlowupGraph blowup_graph(const Trajectory& traj, std::span<const double> centers) {
    if (centers.size() != traj.probes.size()) throw ConfigError("one probe series per center expected");
    BlowupGraph g;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        g.centers.push_back(centers[k]);
        std::vector<double> amp(traj.probes[k].size());
        std::transform(traj.probes[k].begin(), traj.probes[k].end(), amp.begin(), [](double v) { return std::abs(v); });
        bool ok = traj.reached_cap;
        std::string err;
        BlowupEstimate e;
        if (!ok) {
            err = "run did not reach the amplitude cap";
        } else {
            e = estimate_blowup_time(traj.t, amp, traj.meta.p, traj.dt);
            if (e.fallback) {
                ok = false;
                err = "ill-conditioned fit";
            }
        }
        g.T.push_back(ok ? e.T : std::numeric_limits<double>::quiet_NaN());
        g.ci.push_back(ok ? e.ci : std::numeric_limits<double>::quiet_NaN());
        g.ok.push_back(ok);
        g.error.push_back(err);
        g.delta0.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return g;
}

/// Discrete cone containment T(x) >= T(x0) - δ0|x - x0| - tol for every
/// valid graph sample within `radius` of x0. The neighbourhood must hold
/// samples on both sides of x0.
inline bool non_characteristic_check(const BlowupGraph& g, double x0, double delta0, double tol, double radius) {
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw DomainError("delta0 must lie in (0,1)");
    std::optional<double> T0;
    bool left = false, right = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g.ok[i]) continue;
        const double d = g.centers[i] - x0;
        if (std::abs(d) <= 1e-12) T0 = g.T[i];
        if (d < -1e-12 && -d <= radius) left = true;
        if (d > 1e-12 && d <= radius) right = true;
    }
    if (!T0 || !left || !right) throw InsufficientData("blow-up graph does not cover a neighbourhood of x0");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g.ok[i]) continue;
        const double d = std::abs(g.centers[i] - x0);
        if (d > radius) continue;
        if (g.T[i] < *T0 - delta0 * d - tol) return false;
    }
    return true;
}

/// Smallest δ0 on a uniform scan of (0,1) passing non_characteristic_check.
inline std::optional<double> fit_delta0(const BlowupGraph& g, double x0, double tol, double radius, int steps = 99) {
    for (int k = 1; k <= steps; ++k) {
        const double d = static_cast<double>(k) / (steps + 1);
        if (non_characteristic_check(g, x0, d, tol, radius)) return d;
    }
    return std::nullopt;
}

} // namespace blowup
