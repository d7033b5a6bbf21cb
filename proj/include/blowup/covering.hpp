#pragma once

// Backward light-cone geometry: cones, truncated domains and slices, the
// slanted surface T*(x), the sub-slice cover of a slice and a brute-force
// check of the L^q transfer inequality between cone-shaped regions.
//
// Slice convention: S_{x,T,t,δ} = {t <= τ <= T - e^{-10}(T - t),
// |ξ - x| <= (T - τ)/δ}. Spatial dimension D is a template parameter
// (1 and 2 are exercised by the tests).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "blowup/errors.hpp"
#include "blowup/verifier.hpp"

namespace blowup::covering {

template <std::size_t D>
using Vec = std::array<double, D>;

template <std::size_t D>
double distance(const Vec<D>& a, const Vec<D>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < D; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

/// Height factor of a slice: it stops at T - e^{-10}(T - t).
inline const double slice_top_factor = std::exp(-10.0);

template <std::size_t D>
struct ConeDescriptor {
    Vec<D> x{};
    double t = 0.0;
    double delta = 0.5;

    /// C_{x,t,δ} = {(ξ,τ) != (x,t) : 0 <= τ <= t - δ|ξ - x|}
    [[nodiscard]] bool contains(const Vec<D>& xi, double tau) const {
        if (tau == t && distance(xi, x) == 0.0) return false;
        return tau >= 0.0 && tau <= t - delta * distance(xi, x);
    }
};

template <std::size_t D>
struct SliceDescriptor {
    Vec<D> x{};
    double T = 1.0;  ///< top time
    double t1 = 0.0; ///< bottom time
    double delta = 1.0;

    [[nodiscard]] double top() const { return T - slice_top_factor * (T - t1); }
    [[nodiscard]] double radius_at(double tau) const { return (T - tau) / delta; }
    [[nodiscard]] bool valid() const { return t1 < T && delta > 0.0; }
};

/// T*(x) = T0 - δ0 |x - x0| on the basis |x - x0| <= (T0 - t1)/δ0.
template <std::size_t D>
double t_star(const Vec<D>& x, const Vec<D>& x0, double T0, double t1, double delta0) {
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw DomainError("t_star: delta0 must lie in (0,1)");
    const double d = distance(x, x0);
    if (d > (T0 - t1) / delta0 * (1.0 + 1e-12)) throw DomainError("t_star: x outside the basis");
    return T0 - delta0 * d;
}

/// Closed membership test for a slice.
template <std::size_t D>
bool slice_contains(const Vec<D>& xi, double tau, const SliceDescriptor<D>& s) {
    if (tau < s.t1 || tau > s.top()) return false;
    return distance(xi, s.x) <= s.radius_at(tau);
}

/// Truncated backward domain D_{x0,T0,t,δ0} = {(ξ,τ) != (x0,T0) : t <= τ <= T0 - δ0|ξ - x0|}.
template <std::size_t D>
bool domain_contains(const Vec<D>& xi, double tau, const Vec<D>& x0, double T0, double t, double delta0) {
    const double d = distance(xi, x0);
    if (tau == T0 && d == 0.0) return false;
    return tau >= t && tau <= T0 - delta0 * d;
}

template <std::size_t D>
struct Cover {
    std::vector<SliceDescriptor<D>> slices;
    std::size_t k = 0;
    double spacing = 0.0;
};

/// Covers S_{x*,T*,t1,1} by slices S_{x_i, T*-δ0|x_i-x*|, t1, (1-δ0)/2}
/// centred on a lattice of spacing ((1-δ0)/4)(T* - t1) inside the ball
/// |x_i - x*| <= T* - t1. The lattice is enumerated in integer
/// coordinates, so k depends on δ0 only.
template <std::size_t D>
Cover<D> cover_slice(const Vec<D>& x_star, double T_star, double t1, double delta0) {
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw DomainError("cover_slice: delta0 must lie in (0,1)");
    if (!(T_star > t1)) throw DomainError("cover_slice: need T* > t1");
    const double h = T_star - t1;
    const double unit = (1.0 - delta0) / 4.0; // spacing in units of h
    const long m = static_cast<long>(std::floor(1.0 / unit + 1e-12));
    Cover<D> c;
    c.spacing = unit * h;
    std::array<long, D> idx;
    idx.fill(-m);
    while (true) {
        double n2 = 0.0;
        for (std::size_t i = 0; i < D; ++i) n2 += static_cast<double>(idx[i] * idx[i]);
        if (std::sqrt(n2) * unit <= 1.0 + 1e-12) {
            SliceDescriptor<D> s;
            for (std::size_t i = 0; i < D; ++i) s.x[i] = x_star[i] + c.spacing * static_cast<double>(idx[i]);
            s.T = T_star - delta0 * h * unit * std::sqrt(n2);
            s.t1 = t1;
            s.delta = (1.0 - delta0) / 2.0;
            c.slices.push_back(s);
        }
        std::size_t d = 0;
        while (d < D && ++idx[d] > m) idx[d++] = -m;
        if (d == D) break;
    }
    c.k = c.slices.size();
    return c;
}

/// Uniform space-time cell grid on [lo, hi]^D × [t_lo, t_hi].
template <std::size_t D>
struct SpaceTimeGrid {
    Vec<D> lo{}, hi{};
    double t_lo = 0.0, t_hi = 1.0;
    std::size_t nx = 64, nt = 64;

    [[nodiscard]] double hx(std::size_t i) const { return (hi[i] - lo[i]) / static_cast<double>(nx); }
    [[nodiscard]] double ht() const { return (t_hi - t_lo) / static_cast<double>(nt); }
    [[nodiscard]] std::size_t cells() const {
        std::size_t n = nt;
        for (std::size_t i = 0; i < D; ++i) n *= nx;
        return n;
    }
};

/// Grid on the bounding box of D_{x0,T0,t1,δ0}.
template <std::size_t D>
SpaceTimeGrid<D> domain_grid(const Vec<D>& x0, double T0, double t1, double delta0, std::size_t nx, std::size_t nt) {
    SpaceTimeGrid<D> g;
    const double R = (T0 - t1) / delta0;
    for (std::size_t i = 0; i < D; ++i) {
        g.lo[i] = x0[i] - R;
        g.hi[i] = x0[i] + R;
    }
    g.t_lo = t1;
    g.t_hi = T0;
    g.nx = nx;
    g.nt = nt;
    return g;
}

/// |f|^q sampled at the cell centres of a grid (time-major layout).
template <std::size_t D>
struct SampledField {
    SpaceTimeGrid<D> grid;
    std::vector<double> values;

    SampledField(const SpaceTimeGrid<D>& g, const std::function<double(const Vec<D>&, double)>& f, double q) : grid(g) {
        values.resize(g.cells());
        std::size_t n = 0;
        std::array<std::size_t, D> ix{};
        for (std::size_t it = 0; it < g.nt; ++it) {
            const double tau = g.t_lo + (static_cast<double>(it) + 0.5) * g.ht();
            ix.fill(0);
            while (true) {
                Vec<D> xi;
                for (std::size_t i = 0; i < D; ++i) xi[i] = g.lo[i] + (static_cast<double>(ix[i]) + 0.5) * g.hx(i);
                values[n++] = std::pow(std::abs(f(xi, tau)), q);
                std::size_t d = 0;
                while (d < D && ++ix[d] == g.nx) ix[d++] = 0;
                if (d == D) break;
            }
        }
    }
};

/// ∫ over {t_lo <= τ <= t_hi, |ξ - c| <= r(τ)} of (T - τ)^κ |f|^q by clipped
/// cells: each cell contributes the fraction of its vertices inside the
/// region times its volume, with the integrand sampled at the centre.
template <std::size_t D>
double region_integral(const SampledField<D>& F, const Vec<D>& c, double t_lo, double t_hi, double T, double kappa,
                       const std::function<double(double)>& radius) {
    const auto& g = F.grid;
    const double ht = g.ht();
    double vol = ht;
    for (std::size_t i = 0; i < D; ++i) vol *= g.hx(i);
    constexpr std::size_t nv = std::size_t{1} << (D + 1);
    auto inside = [&](const Vec<D>& xi, double tau) {
        return tau >= t_lo && tau <= t_hi && distance(xi, c) <= radius(tau);
    };
    double acc = 0.0;
    std::size_t stride_t = 1;
    for (std::size_t i = 0; i < D; ++i) stride_t *= g.nx;
    const long it0 = std::max(0L, static_cast<long>(std::floor((t_lo - g.t_lo) / ht)) - 1);
    const long it1 = std::min(static_cast<long>(g.nt) - 1, static_cast<long>(std::ceil((t_hi - g.t_lo) / ht)));
    for (long it = it0; it <= it1; ++it) {
        const double ta = g.t_lo + static_cast<double>(it) * ht;
        const double tb = ta + ht;
        if (tb < t_lo || ta > t_hi) continue;
        const double rmax = std::max(radius(std::max(ta, t_lo)), radius(std::min(tb, t_hi)));
        if (rmax < 0.0) continue;
        std::array<long, D> a{}, b{};
        bool empty = false;
        for (std::size_t i = 0; i < D; ++i) {
            a[i] = std::max(0L, static_cast<long>(std::floor((c[i] - rmax - g.lo[i]) / g.hx(i))));
            b[i] = std::min(static_cast<long>(g.nx) - 1, static_cast<long>(std::floor((c[i] + rmax - g.lo[i]) / g.hx(i))));
            empty = empty || a[i] > b[i];
        }
        if (!empty) {
            std::array<long, D> ix = a;
            while (true) {
                std::size_t hits = 0;
                for (std::size_t v = 0; v < nv; ++v) {
                    Vec<D> xi;
                    for (std::size_t i = 0; i < D; ++i)
                        xi[i] = g.lo[i] + static_cast<double>(ix[i] + static_cast<long>((v >> i) & 1U)) * g.hx(i);
                    const double tau = (v >> D) & 1U ? tb : ta;
                    hits += inside(xi, tau) ? 1 : 0;
                }
                if (hits > 0) {
                    std::size_t lin = 0, mul = 1;
                    for (std::size_t i = 0; i < D; ++i) {
                        lin += static_cast<std::size_t>(ix[i]) * mul;
                        mul *= g.nx;
                    }
                    const double tc = ta + 0.5 * ht;
                    const double wt = std::pow(std::max(T - tc, 0.0), kappa);
                    acc += static_cast<double>(hits) / nv * vol * wt * F.values[static_cast<std::size_t>(it) * stride_t + lin];
                }
                std::size_t d = 0;
                while (d < D && ++ix[d] > b[d]) ix[d] = a[d], ++d;
                if (d == D) break;
            }
        }
    }
    return acc;
}

/// Sample points of the basis |x - x0| <= (T0 - t1)/δ0 on a lattice with
/// `per_axis` points along each axis (points outside the ball dropped).
template <std::size_t D>
std::vector<Vec<D>> basis_samples(const Vec<D>& x0, double T0, double t1, double delta0, std::size_t per_axis) {
    const double R = (T0 - t1) / delta0;
    std::vector<Vec<D>> out;
    std::array<std::size_t, D> ix{};
    while (true) {
        Vec<D> x;
        for (std::size_t i = 0; i < D; ++i)
            x[i] = x0[i] - R + 2.0 * R * static_cast<double>(ix[i]) / static_cast<double>(per_axis - 1);
        if (distance(x, x0) <= R * (1.0 + 1e-12)) out.push_back(x);
        std::size_t d = 0;
        while (d < D && ++ix[d] == per_axis) ix[d++] = 0;
        if (d == D) break;
    }
    return out;
}

/// Explicit transfer constant k(δ0) e^{10κ} / (1-δ0)^κ.
template <std::size_t D>
double cover_constant(double delta0, double kappa_exp) {
    const auto c = cover_slice<D>(Vec<D>{}, 1.0, 0.0, delta0);
    return static_cast<double>(c.k) * std::exp(10.0 * kappa_exp) / std::pow(1.0 - delta0, kappa_exp);
}

struct CoverSettings {
    std::size_t nx = 64;
    std::size_t nt = 64;
    std::size_t basis_per_axis = 21;
};

/// Brute-force check of
///   sup_x ∫_{S_{x,T*(x),t1,1}} (T*(x)-t)^κ |f|^q
///     <= k(δ0) e^{10κ}/(1-δ0)^κ · sup_x ∫_{t1}^{t2(x)} (T*(x)-t)^κ ∫_{B(x,(T*(x)-t)/2)} |f|^q
/// with both suprema over the same sample of the basis.
template <std::size_t D>
CheckReport verify_cover_inequality(const std::function<double(const Vec<D>&, double)>& f, double kappa_exp, double q_exp,
                                    const Vec<D>& x0, double T0, double t1, double delta0,
                                    const CoverSettings& set = {}, const SpaceTimeGrid<D>* grid = nullptr) {
    if (!(kappa_exp >= 0.0)) throw DomainError("kappa must be >= 0");
    if (!(q_exp >= 1.0)) throw DomainError("q must be >= 1");
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw DomainError("delta0 must lie in (0,1)");
    if (!(T0 > t1)) throw DomainError("need T0 > t1");
    const auto g = grid ? *grid : domain_grid<D>(x0, T0, t1, delta0, set.nx, set.nt);
    const double R = (T0 - t1) / delta0;
    for (std::size_t i = 0; i < D; ++i)
        if (g.lo[i] > x0[i] - R + 1e-12 || g.hi[i] < x0[i] + R - 1e-12) throw DomainError("grid does not cover the domain");
    if (g.t_lo > t1 + 1e-12 || g.t_hi < T0 - 1e-12) throw DomainError("grid does not cover the domain in time");
    SampledField<D> F(g, f, q_exp);
    const auto xs = basis_samples<D>(x0, T0, t1, delta0, set.basis_per_axis);
    double lhs = 0.0, rhs = 0.0;
    for (const auto& x : xs) {
        const double Ts = T0 - delta0 * distance(x, x0);
        const double t2 = Ts - slice_top_factor * (Ts - t1);
        lhs = std::max(lhs, region_integral<D>(F, x, t1, t2, Ts, kappa_exp, [Ts](double tau) { return Ts - tau; }));
        rhs = std::max(rhs, region_integral<D>(F, x, t1, t2, Ts, kappa_exp, [Ts](double tau) { return 0.5 * (Ts - tau); }));
    }
    const double C = cover_constant<D>(delta0, kappa_exp);
    CheckReport r;
    r.name = "cover_inequality";
    r.lhs = lhs;
    r.rhs = C * rhs;
    r.residual = lhs - C * rhs;
    r.tolerance = 1e-12 * std::max(1.0, lhs);
    r.metrics["k"] = static_cast<double>(cover_slice<D>(Vec<D>{}, 1.0, 0.0, delta0).k);
    r.metrics["C"] = C;
    r.metrics["kappa"] = kappa_exp;
    r.metrics["q"] = q_exp;
    r.metrics["delta0"] = delta0;
    r.metrics["basis_samples"] = static_cast<double>(xs.size());
    r.decide();
    return r;
}

/// Random membership test of S_{x,T*(x),t1,1} ⊂ S_{x0,T0,t1,δ0} plus the
/// scalar inclusions T*(x)-t1 <= T0-t1, t2(x) <= t2(x0) and
/// B(x, T*(x)-t1) ⊂ B(x0, (T0-t1)/δ0), for `n_basis` random basis points
/// with `n_points` random slice points each.
template <std::size_t D>
CheckReport check_inclusions(const Vec<D>& x0, double T0, double t1, double delta0, std::size_t n_basis,
                             std::size_t n_points, std::uint64_t seed, std::vector<Vec<D>> forced = {}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0), U01(0.0, 1.0);
    const double R = (T0 - t1) / delta0;
    SliceDescriptor<D> parent{x0, T0, t1, delta0};
    auto random_in_ball = [&](const Vec<D>& c, double rad) {
        while (true) {
            Vec<D> v;
            double n2 = 0.0;
            for (std::size_t i = 0; i < D; ++i) {
                v[i] = U(rng);
                n2 += v[i] * v[i];
            }
            if (n2 <= 1.0) {
                for (std::size_t i = 0; i < D; ++i) v[i] = c[i] + rad * v[i];
                return v;
            }
        }
    };
    std::vector<Vec<D>> xs = std::move(forced);
    while (xs.size() < n_basis) xs.push_back(random_in_ball(x0, R));
    std::size_t violations = 0, tested = 0;
    const double eps = 1e-12 * std::max(1.0, std::abs(T0));
    for (const auto& x : xs) {
        const double Ts = T0 - delta0 * distance(x, x0);
        SliceDescriptor<D> child{x, Ts, t1, 1.0};
        if (Ts - t1 > T0 - t1 + eps) ++violations;
        if (child.top() > parent.top() + eps) ++violations;
        if (distance(x, x0) + (Ts - t1) > R * (1.0 + 1e-12) + eps) ++violations;
        for (std::size_t k = 0; k < n_points; ++k) {
            const double tau = t1 + U01(rng) * (child.top() - t1);
            const auto xi = random_in_ball(x, child.radius_at(tau));
            if (!slice_contains(xi, tau, child)) continue;
            ++tested;
            if (!slice_contains(xi, tau, parent)) ++violations;
        }
    }
    CheckReport r;
    r.name = "cover_inclusions";
    r.lhs = static_cast<double>(violations);
    r.rhs = 0.0;
    r.residual = static_cast<double>(violations);
    r.tolerance = 0.0;
    r.metrics["points"] = static_cast<double>(tested);
    r.metrics["basis_points"] = static_cast<double>(xs.size());
    r.decide();
    return r;
}

} // namespace blowup::covering
