#pragma once

// Four-point Lagrange interpolation on uniform grids. Radial samples are
// continued evenly through the origin, which keeps the stencil centred near
// r = 0 and preserves fourth-order accuracy for smooth radial fields.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "blowup/core.hpp"

namespace blowup {

namespace detail {

inline std::array<double, 4> lagrange4_weights(double x) {
    // nodes -1, 0, 1, 2
    const double xm1 = x + 1.0, x0 = x, x1 = x - 1.0, x2 = x - 2.0;
    return {-x0 * x1 * x2 / 6.0, xm1 * x1 * x2 / 2.0, -xm1 * x0 * x2 / 2.0, xm1 * x0 * x1 / 6.0};
}

} // namespace detail

/// Sample index access with even continuation through the origin.
/// The origin sits either on the first node (origin == 0) or half a cell
/// below it (origin == h/2); both layouts are handled.
class EvenSampler {
public:
    EvenSampler(const UniformGrid& g, std::span<const double> v, bool even) : g_(g), v_(v), even_(even) {
        half_shift_ = even && std::abs(g.origin - 0.5 * g.spacing) < 1e-12 * g.spacing;
        if (even && !half_shift_ && std::abs(g.origin) > 1e-12 * g.spacing)
            throw DomainError("even continuation needs the origin on a node or half a cell below the first one");
    }

    [[nodiscard]] double at(long i) const {
        const long n = static_cast<long>(v_.size());
        if (i < 0) {
            if (!even_) throw DomainError("interpolation stencil below grid start");
            i = half_shift_ ? (-i - 1) : -i;
        }
        if (i >= n) throw DomainError("interpolation stencil beyond grid end");
        return v_[static_cast<std::size_t>(i)];
    }

    /// Value at abscissa x.
    [[nodiscard]] double operator()(double x) const {
        const double xi = (x - g_.origin) / g_.spacing;
        const long n = static_cast<long>(v_.size());
        long i = static_cast<long>(std::floor(xi));
        if (!even_) i = std::clamp(i, 1L, n - 3);
        else i = std::min(i, n - 3);
        const double frac = xi - static_cast<double>(i);
        if (frac < -1.0 - 1e-9 || frac > 2.0 + 1e-9) throw DomainError("interpolation point outside grid");
        const auto w = detail::lagrange4_weights(frac);
        return w[0] * at(i - 1) + w[1] * at(i) + w[2] * at(i + 1) + w[3] * at(i + 2);
    }

private:
    UniformGrid g_;
    std::span<const double> v_;
    bool even_;
    bool half_shift_ = false;
};

/// Cubic Lagrange interpolation of (t_k, y_k) samples at time t, using the
/// four nearest samples. Samples need not be uniform in t.
inline double lagrange_in_time(std::span<const double> ts, std::span<const double> ys, double t) {
    const std::size_t n = ts.size();
    if (n == 0) throw DomainError("no samples");
    if (n == 1) return ys[0];
    std::size_t hi = 0;
    while (hi < n && ts[hi] < t) ++hi;
    std::size_t lo = hi >= 2 ? hi - 2 : 0;
    std::size_t cnt = std::min<std::size_t>(4, n);
    if (lo + cnt > n) lo = n - cnt;
    double acc = 0.0;
    for (std::size_t a = lo; a < lo + cnt; ++a) {
        double l = 1.0;
        for (std::size_t b = lo; b < lo + cnt; ++b)
            if (b != a) l *= (t - ts[b]) / (ts[a] - ts[b]);
        acc += l * ys[a];
    }
    return acc;
}

/// Centred first derivative on a uniform grid, second order everywhere.
/// With `even` the field is continued evenly through the origin (value at
/// a node at 0 gets derivative 0); otherwise one-sided three-point
/// formulas close both ends.
inline std::vector<double> centred_derivative(const UniformGrid& g, std::span<const double> v, bool even) {
    const std::size_t n = v.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) throw InsufficientData("derivative needs at least three samples");
    const double h = g.spacing;
    EvenSampler s(g, v, even);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    if (even) d[0] = (v[1] - s.at(-1)) / (2.0 * h);
    else d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    return d;
}

/// Quadratic extrapolation of the last three uniform samples to `x`.
inline double extrapolate_quadratic(const UniformGrid& g, std::span<const double> v, double x) {
    const std::size_t n = v.size();
    if (n < 3) throw InsufficientData("extrapolation needs three samples");
    const double x2 = g.at(n - 1);
    const double t = (x - x2) / g.spacing; // nodes at 0, -1, -2
    const double l0 = (t + 1.0) * (t + 2.0) / 2.0;
    const double l1 = -t * (t + 2.0);
    const double l2 = t * (t + 1.0) / 2.0;
    return l0 * v[n - 1] + l1 * v[n - 2] + l2 * v[n - 3];
}

} // namespace blowup
