#pragma once

// Product midpoint quadrature on the unit ball for radial integrands.
// A radial integrand f(|y|) (1 - |y|^2)^e is integrated as
//   sum_j f(y_j) W_j,  W_j = |S^{N-1}| ∫_cell_j (1 - r^2)^e r^(N-1) dr,
// with the cell moments W_j evaluated exactly (incomplete beta function).
// The smooth factor is sampled at cell centres, so the rule is second
// order for smooth f and stays accurate for weights singular at |y| = 1.

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "blowup/core.hpp"
#include "blowup/errors.hpp"

namespace blowup {

/// Exact cell moments for exponent e > -1 on a cell-centred grid of [0,1).
inline std::vector<double> ball_cell_weights(const UniformGrid& g, int N, double e) {
    if (!(e > -1.0)) throw DomainError("weight exponent must exceed -1");
    if (g.size == 0) return {};
    const double h = g.spacing;
    const double lo0 = g.origin - 0.5 * h;
    const double hi_end = g.back() + 0.5 * h;
    if (lo0 < -1e-12 || hi_end > 1.0 + 1e-12 || g.back() >= 1.0)
        throw DomainError("quadrature grid must be cell-centred inside [0,1)");
    const double a = 0.5 * N, b = e + 1.0;
    const double full = 0.5 * boost::math::beta(a, b) * sphere_area(N);
    std::vector<double> W(g.size);
    auto edge = [&](std::size_t j) { return std::clamp(lo0 + h * static_cast<double>(j), 0.0, 1.0); };
    for (std::size_t j = 0; j < g.size; ++j) {
        const double v0 = edge(j) * edge(j), v1 = edge(j + 1) * edge(j + 1);
        double m;
        if (v0 > 0.5) m = boost::math::ibetac(a, b, v0) - (v1 >= 1.0 ? 0.0 : boost::math::ibetac(a, b, v1));
        else m = boost::math::ibeta(a, b, v1) - boost::math::ibeta(a, b, v0);
        W[j] = full * m;
    }
    return W;
}

/// Process-wide cache of cell moments keyed by (cells, origin, spacing, N, e).
/// Thread-safe; entries are immutable once created.
inline const std::vector<double>& cached_ball_weights(const UniformGrid& g, int N, double e) {
    using Key = std::tuple<std::size_t, double, double, int, double>;
    static std::mutex mu;
    static std::map<Key, std::unique_ptr<const std::vector<double>>> cache;
    const Key k{g.size, g.origin, g.spacing, N, e};
    {
        std::lock_guard lock(mu);
        auto it = cache.find(k);
        if (it != cache.end()) return *it->second;
    }
    auto w = std::make_unique<const std::vector<double>>(ball_cell_weights(g, N, e));
    std::lock_guard lock(mu);
    auto [it, inserted] = cache.emplace(k, std::move(w));
    return *it->second;
}

/// ∫_B f(|y|) (1 - |y|^2)^e dy.
inline double ball_integral(const UniformGrid& g, std::span<const double> f, int N, double e) {
    if (f.size() != g.size) throw DomainError("field size does not match grid");
    const auto& W = cached_ball_weights(g, N, e);
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += f[j] * W[j];
    return acc;
}

/// ∫_B f ρ_η dy, or with the extra factor 1/(1 - |y|^2) when `singular`.
inline double ball_quadrature(const UniformGrid& g, std::span<const double> f, int N, double eta, bool singular = false) {
    return ball_integral(g, f, N, singular ? eta - 1.0 : eta);
}

/// Plain midpoint rule with the weight sampled at the centres, kept for
/// comparison against the product rule.
inline double ball_quadrature_plain(const UniformGrid& g, std::span<const double> f, int N, double eta, bool singular = false) {
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double y = g.at(j);
        if (!(y >= 0.0 && y < 1.0)) throw DomainError("grid point outside [0,1)");
        double wgt = std::pow(1.0 - y * y, eta) * std::pow(y, N - 1);
        if (singular) wgt /= 1.0 - y * y;
        acc += f[j] * wgt;
    }
    return acc * g.spacing * sphere_area(N);
}

} // namespace blowup
