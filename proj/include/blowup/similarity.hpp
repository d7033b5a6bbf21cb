#pragma once

// Change of variables y = (x - x0)/(T0 - t), s = -log(T0 - t),
// w = (T0 - t)^(2/(p-1)) u, and its inverse, for radial snapshots.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "blowup/core.hpp"
#include "blowup/errors.hpp"
#include "blowup/interpolation.hpp"
#include "blowup/solver.hpp"

namespace blowup {

inline constexpr std::size_t default_y_cells = 1024;

inline double time_of_s(double s, double T0) { return T0 - std::exp(-s); }
inline double s_of_time(double t, double T0) {
    if (!(t < T0)) throw DomainError("similarity time needs t < T0");
    return -std::log(T0 - t);
}

/// Transform a radial snapshot (origin at x0 = 0) onto `y_cells` cell-centred
/// radial points of the unit ball.
inline WState to_similarity(const RadialSnapshot& snap, double x0, double T0, double p,
                            std::size_t y_cells = default_y_cells) {
    if (!(snap.t < T0)) throw DomainError("to_similarity: need t < T0");
    if (x0 != 0.0) throw FrameError("radial snapshots only support frames centred at the origin");
    const auto& sg = snap.grid;
    if (std::abs(sg.origin) > 0.0 && std::abs(sg.origin - 0.5 * sg.spacing) > 1e-12 * sg.spacing)
        throw FrameError("radial snapshot grid must start at r = 0 or half a cell above it");
    const double tau = T0 - snap.t;
    // the cubic stencil needs one node past the last sample point
    if (snap.grid.back() < tau + 2.0 * snap.grid.spacing)
        throw FrameError("physical grid does not cover the backward cone |x| <= T0 - t");
    WState st;
    st.ygrid = UniformGrid::cell_centred(y_cells);
    st.s = -std::log(tau);
    st.x0 = x0;
    st.T0 = T0;
    st.p = p;
    const double a = 2.0 / (p - 1.0);
    const double sw = std::pow(tau, a);
    const double sv = sw * tau;
    EvenSampler U(snap.grid, snap.u, true), V(snap.grid, snap.ut, true);
    st.w.resize(y_cells);
    st.ws.resize(y_cells);
    std::vector<double> vt(y_cells);
    for (std::size_t j = 0; j < y_cells; ++j) {
        const double r = tau * st.ygrid.at(j);
        st.w[j] = sw * U(r);
        vt[j] = sv * V(r);
    }
    st.wy = centred_derivative(st.ygrid, st.w, true);
    for (std::size_t j = 0; j < y_cells; ++j) st.ws[j] = vt[j] - st.ygrid.at(j) * st.wy[j] - a * st.w[j];
    return st;
}

/// Inverse map on the covered region r = (T0 - t) y. The returned grid is
/// the physical image of the y-grid.
inline RadialSnapshot from_similarity(const WState& st) {
    const double tau = std::exp(-st.s);
    const double a = 2.0 / (st.p - 1.0);
    RadialSnapshot out;
    out.t = st.T0 - tau;
    out.grid = {tau * st.ygrid.origin, tau * st.ygrid.spacing, st.ygrid.size};
    const double su = std::pow(tau, -a);
    const double sv = su / tau;
    out.u.resize(st.size());
    out.ut.resize(st.size());
    for (std::size_t j = 0; j < st.size(); ++j) {
        out.u[j] = su * st.w[j];
        out.ut[j] = sv * (st.ws[j] + st.ygrid.at(j) * st.wy[j] + a * st.w[j]);
    }
    return out;
}

/// Frames at the requested similarity times. Snapshots stored at the exact
/// time are used directly; otherwise each field is interpolated in time
/// with cubic Lagrange polynomials through the four nearest snapshots.
inline std::vector<WState> sample_frames(const Trajectory& traj, double x0, double T0, std::span<const double> s_list,
                                         std::size_t y_cells = default_y_cells) {
    const auto& snaps = traj.snapshots;
    if (snaps.empty()) throw FrameError("trajectory holds no snapshots");
    std::vector<double> ts(snaps.size());
    for (std::size_t k = 0; k < snaps.size(); ++k) ts[k] = snaps[k].t;
    std::vector<WState> out;
    out.reserve(s_list.size());
    for (double s : s_list) {
        const double t = time_of_s(s, T0);
        const double eps = 1e-12 * (1.0 + std::abs(t));
        if (t < ts.front() - eps || t > ts.back() + eps) throw FrameError("s outside the trajectory time range");
        std::size_t hit = snaps.size();
        for (std::size_t k = 0; k < snaps.size(); ++k)
            if (std::abs(ts[k] - t) <= eps) hit = k;
        if (hit < snaps.size()) {
            auto st = to_similarity(snaps[hit], x0, T0, traj.meta.p, y_cells);
            st.s = s;
            out.push_back(std::move(st));
            continue;
        }
        if (snaps.size() < 2) throw FrameError("temporal interpolation needs two snapshots");
        RadialSnapshot mix = snaps.front();
        mix.t = t;
        const std::size_t n = mix.u.size();
        std::vector<double> col(snaps.size());
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < snaps.size(); ++k) col[k] = snaps[k].u[j];
            mix.u[j] = lagrange_in_time(ts, col, t);
            for (std::size_t k = 0; k < snaps.size(); ++k) col[k] = snaps[k].ut[j];
            mix.ut[j] = lagrange_in_time(ts, col, t);
        }
        auto st = to_similarity(mix, x0, T0, traj.meta.p, y_cells);
        st.s = s;
        out.push_back(std::move(st));
    }
    return out;
}

} // namespace blowup
