#pragma once

// Model parameters, derived exponents, perturbation shapes and the field
// containers shared by the solver, the similarity transform and the
// functionals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "blowup/errors.hpp"

namespace blowup {

// ---------------------------------------------------------------------------
// Exponents
// ---------------------------------------------------------------------------

/// Conformal-critical power 1 + 4/(N-1).
inline double critical_exponent(int N) {
    if (N < 2) throw DomainError("critical_exponent: N must be >= 2, got " + std::to_string(N));
    return 1.0 + 4.0 / static_cast<double>(N - 1);
}

/// Decay exponent of the perturbation terms, min(1/2, (p-q)/(p-1)).
inline double gamma_exponent(double p, double q) {
    if (!(p > 1.0)) throw DomainError("gamma_exponent: p must exceed 1");
    if (!(q < p)) throw DomainError("gamma_exponent: need q < p (|f(x)| <= M(1+|x|^q) with q < p)");
    if (q < 0.0) throw DomainError("gamma_exponent: q must be nonnegative");
    return std::min(0.5, (p - q) / (p - 1.0));
}

/// Weight exponent 2/(p-1) - (N-1)/2 of the similarity-variable energy.
/// Vanishes at the critical power.
inline double alpha_exponent(int N, double p) {
    if (!(p > 1.0)) throw DomainError("alpha_exponent: p must exceed 1");
    if (N < 2) throw DomainError("alpha_exponent: N must be >= 2");
    if (p == critical_exponent(N)) return 0.0; // exact, free of rounding in 2/(p-1)
    const double a = 2.0 / (p - 1.0);
    const double b = 0.5 * static_cast<double>(N - 1);
    return a - b;
}

/// Positive constant solution of the similarity equation:
/// kappa^(p-1) = 2(p+1)/(p-1)^2.
inline double equilibrium_kappa(double p) {
    if (!(p > 1.0)) throw DomainError("equilibrium_kappa: p must exceed 1");
    return std::pow(2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0)), 1.0 / (p - 1.0));
}

/// (1 - |y|^2)^eta, defined strictly inside the unit ball.
inline double rho_weight(double y_abs, double eta) {
    if (!(y_abs >= 0.0 && y_abs < 1.0)) throw DomainError("rho_weight: need 0 <= |y| < 1");
    return std::pow(1.0 - y_abs * y_abs, eta);
}

/// Surface area of the unit sphere S^{N-1}.
inline double sphere_area(int N) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

/// Volume of the unit ball in R^N.
inline double ball_volume(int N) { return sphere_area(N) / N; }

// ---------------------------------------------------------------------------
// Perturbations
// ---------------------------------------------------------------------------

/// Built-in shapes for the source term f(u). Each satisfies
/// |f(x)| <= M (1 + |x|^q).
enum class SourceShape {
    none,  ///< f = 0
    power, ///< f(u) = M |u|^(q-1) u, bound with equality on the |x|^q part
};

/// Built-in shapes for the damping term g(du/dt). Each satisfies
/// |g(x)| <= M (1 + |x|).
enum class DampingShape {
    none,   ///< g = 0
    linear, ///< g(v) = M v / (1 + eps)
    sine,   ///< g(v) = M sin(v), bounded by M
};

inline std::string_view to_string(SourceShape s) {
    switch (s) {
    case SourceShape::none: return "none";
    case SourceShape::power: return "power";
    }
    return "?";
}

inline std::string_view to_string(DampingShape s) {
    switch (s) {
    case DampingShape::none: return "none";
    case DampingShape::linear: return "linear";
    case DampingShape::sine: return "sine";
    }
    return "?";
}

inline SourceShape parse_source_shape(std::string_view s) {
    if (s == "none" || s == "zero") return SourceShape::none;
    if (s == "power") return SourceShape::power;
    throw ConfigError("unknown f_kind '" + std::string(s) + "' (expected none|power)");
}

inline DampingShape parse_damping_shape(std::string_view s) {
    if (s == "none" || s == "zero") return DampingShape::none;
    if (s == "linear") return DampingShape::linear;
    if (s == "sine") return DampingShape::sine;
    throw ConfigError("unknown g_kind '" + std::string(s) + "' (expected none|linear|sine)");
}

struct Perturbation {
    SourceShape f_kind = SourceShape::none;
    DampingShape g_kind = DampingShape::none;
    double M = 0.0;
    double q = 1.0;
    double g_eps = 1e-3;

    [[nodiscard]] bool trivial() const {
        return M == 0.0 || (f_kind == SourceShape::none && g_kind == DampingShape::none);
    }
    [[nodiscard]] bool has_source() const { return M != 0.0 && f_kind != SourceShape::none; }
    [[nodiscard]] bool has_damping() const { return M != 0.0 && g_kind != DampingShape::none; }

    [[nodiscard]] double f(double u) const {
        if (f_kind == SourceShape::none) return 0.0;
        const double mag = M * std::pow(std::abs(u), q);
        return u < 0.0 ? -mag : mag;
    }

    /// Exact antiderivative of f with F(0) = 0.
    [[nodiscard]] double F(double u) const {
        if (f_kind == SourceShape::none) return 0.0;
        return M * std::pow(std::abs(u), q + 1.0) / (q + 1.0);
    }

    [[nodiscard]] double g(double v) const {
        switch (g_kind) {
        case DampingShape::none: return 0.0;
        case DampingShape::linear: return M * v / (1.0 + g_eps);
        case DampingShape::sine: return M * std::sin(v);
        }
        return 0.0;
    }

    /// Lipschitz constant of g, used to bound the implicit velocity solve.
    [[nodiscard]] double g_lipschitz() const {
        switch (g_kind) {
        case DampingShape::none: return 0.0;
        case DampingShape::linear: return std::abs(M) / (1.0 + g_eps);
        case DampingShape::sine: return std::abs(M);
        }
        return 0.0;
    }
};

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

struct ModelSpec {
    int N = 3;
    double p = 0.0;       ///< ignored when critical is set
    bool critical = true; ///< p := 1 + 4/(N-1)
    Perturbation perturbation{};
    double eta = 0.5;
    double sigma = 0.0;
    double theta = 0.0;
};

/// Validated model parameters with the derived constants frozen at
/// construction. Build through make_model().
struct ModelParams {
    int N = 3;
    double p = 3.0;
    bool critical = true;
    Perturbation perturbation{};
    double eta = 0.5;
    double sigma = 0.0;
    double theta = 0.0;

    double gamma = 0.5;
    double kappa = 0.0;
    double alpha = 0.0;
    double scaling = 1.0; ///< 2/(p-1), the self-similar exponent of u

    [[nodiscard]] double q() const { return perturbation.q; }
    [[nodiscard]] double M() const { return perturbation.M; }
    [[nodiscard]] double nonlinearity(double u) const {
        if (p == 3.0) return u * u * u;
        const double mag = std::pow(std::abs(u), p);
        return u < 0.0 ? -mag : mag;
    }
    /// |u|^(p+1)
    [[nodiscard]] double power_p1(double u) const {
        if (p == 3.0) {
            const double u2 = u * u;
            return u2 * u2;
        }
        return std::pow(std::abs(u), p + 1.0);
    }
};

inline ModelParams make_model(const ModelSpec& ms) {
    if (ms.N < 2) throw ConfigError("N must be >= 2");
    ModelParams m;
    m.N = ms.N;
    m.critical = ms.critical;
    if (ms.critical) {
        const double pc = critical_exponent(ms.N);
        if (ms.p != 0.0 && std::abs(ms.p - pc) > 1e-12 * pc)
            throw ConfigError("p = " + std::to_string(ms.p) + " contradicts critical flag (p_c = " +
                              std::to_string(pc) + ")");
        m.p = pc;
    } else {
        if (!(ms.p > 1.0)) throw ConfigError("p must exceed 1");
        m.p = ms.p;
    }
    const auto& pert = ms.perturbation;
    if (pert.M < 0.0) throw ConfigError("perturbation magnitude M must be >= 0");
    if (!(pert.q < m.p))
        throw ConfigError("hypothesis (H_f) violated: need q < p, got q = " + std::to_string(pert.q) +
                          ", p = " + std::to_string(m.p));
    if (pert.q < 0.0) throw ConfigError("q must be >= 0");
    if (pert.g_kind == DampingShape::linear && !(pert.g_eps > -1.0 && pert.g_eps >= 0.0))
        throw ConfigError("g_eps must be >= 0");
    if (!(ms.eta > 0.0 && ms.eta < 1.0)) throw ConfigError("eta must lie in (0,1)");
    if (ms.sigma < 0.0 || ms.theta < 0.0) throw ConfigError("sigma, theta must be >= 0");
    m.perturbation = pert;
    m.eta = ms.eta;
    m.sigma = ms.sigma;
    m.theta = ms.theta;
    m.gamma = gamma_exponent(m.p, pert.q);
    m.kappa = equilibrium_kappa(m.p);
    m.alpha = alpha_exponent(m.N, m.p);
    m.scaling = 2.0 / (m.p - 1.0);
    return m;
}

// ---------------------------------------------------------------------------
// Grids and fields
// ---------------------------------------------------------------------------

/// Uniform abscissas origin + i*spacing, i = 0..size-1.
struct UniformGrid {
    double origin = 0.0;
    double spacing = 1.0;
    std::size_t size = 0;

    [[nodiscard]] double at(std::size_t i) const { return origin + spacing * static_cast<double>(i); }
    [[nodiscard]] double back() const { return at(size - 1); }
    [[nodiscard]] std::vector<double> points() const {
        std::vector<double> out(size);
        for (std::size_t i = 0; i < size; ++i) out[i] = at(i);
        return out;
    }

    /// Cell-centred grid on [0, length]: (i + 1/2) * length / cells.
    static UniformGrid cell_centred(std::size_t cells, double length = 1.0) {
        const double h = length / static_cast<double>(cells);
        return {0.5 * h, h, cells};
    }

    /// Vertex grid on [a, b] with `cells` intervals.
    static UniformGrid vertices(double a, double b, std::size_t cells) {
        return {a, (b - a) / static_cast<double>(cells), cells + 1};
    }

    /// Accepts explicit abscissas only when they are uniform to round-off.
    static UniformGrid from_points(const std::vector<double>& xs) {
        if (xs.size() < 2) throw ConfigError("grid needs at least two points");
        const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
        if (!(h > 0.0)) throw ConfigError("grid must be strictly increasing");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double expect = xs.front() + h * static_cast<double>(i);
            if (std::abs(xs[i] - expect) > 1e-9 * h) throw ConfigError("non-uniform grids are not supported");
        }
        return {xs.front(), h, xs.size()};
    }
};

/// (u, du/dt) at one physical time. For radial problems the abscissas are
/// radii; for the line geometry they are signed positions.
struct RadialSnapshot {
    UniformGrid grid;
    std::vector<double> u;
    std::vector<double> ut;
    double t = 0.0;

    [[nodiscard]] bool finite() const {
        auto ok = [](double v) { return std::isfinite(v); };
        return std::all_of(u.begin(), u.end(), ok) && std::all_of(ut.begin(), ut.end(), ok);
    }
    [[nodiscard]] double max_abs_u() const {
        double m = 0.0;
        for (double v : u) m = std::max(m, std::abs(v));
        return m;
    }
};

/// Similarity-variable state on a cell-centred radial grid in [0,1).
struct WState {
    UniformGrid ygrid;
    std::vector<double> w;
    std::vector<double> ws; ///< d/ds w
    std::vector<double> wy; ///< radial derivative d/d|y| w
    double s = 0.0;
    double x0 = 0.0;
    double T0 = 1.0;
    double p = 3.0;

    [[nodiscard]] std::size_t size() const { return w.size(); }
    [[nodiscard]] double tau() const { return std::exp(-s); }
    [[nodiscard]] double time() const { return T0 - std::exp(-s); }
};

/// Cell-centred y-grid constant fields, handy for closed-form checks.
inline WState constant_wstate(std::size_t cells, double w, double ws, double p, double s = 0.0) {
    WState st;
    st.ygrid = UniformGrid::cell_centred(cells);
    st.w.assign(cells, w);
    st.ws.assign(cells, ws);
    st.wy.assign(cells, 0.0);
    st.s = s;
    st.p = p;
    return st;
}

} // namespace blowup
