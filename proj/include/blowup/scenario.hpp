#pragma once

// Scenario description, run orchestration and the on-disk bundle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "blowup/core.hpp"
#include "blowup/covering.hpp"
#include "blowup/errors.hpp"
#include "blowup/functionals.hpp"
#include "blowup/io.hpp"
#include "blowup/parallel.hpp"
#include "blowup/similarity.hpp"
#include "blowup/solver.hpp"
#include "blowup/verifier.hpp"

namespace blowup {

enum class DataFamily { constant, gaussian, ode_profile, random_smooth };

inline std::string_view to_string(DataFamily d) {
    switch (d) {
    case DataFamily::constant: return "constant";
    case DataFamily::gaussian: return "gaussian";
    case DataFamily::ode_profile: return "ode-profile";
    case DataFamily::random_smooth: return "random-smooth";
    }
    return "?";
}

inline DataFamily parse_data_family(std::string_view s) {
    if (s == "constant") return DataFamily::constant;
    if (s == "gaussian") return DataFamily::gaussian;
    if (s == "ode-profile") return DataFamily::ode_profile;
    if (s == "random-smooth") return DataFamily::random_smooth;
    throw ConfigError("unknown data family '" + std::string(s) + "'");
}

struct InitialData {
    DataFamily family = DataFamily::gaussian;
    double amplitude = 1.0; ///< constant value, bump height or random scale
    double width = 0.5;     ///< u0 = A exp(-r²/(2 width²))
    double velocity = 0.0;  ///< constant u_t, or u_t = velocity · u0 for bumps
    double ode_T = 1.0;     ///< blow-up time of the ODE profile
    int modes = 6;          ///< random-smooth: number of cosine modes
};

/// u(0), u_t(0) on the solver grid. The random family draws from `seed`.
inline RadialSnapshot make_initial(const InitialData& d, const ModelParams& m, const UniformGrid& g, std::uint64_t seed) {
    RadialSnapshot s;
    s.grid = g;
    s.t = 0.0;
    s.u.assign(g.size, 0.0);
    s.ut.assign(g.size, 0.0);
    std::vector<double> coef;
    if (d.family == DataFamily::random_smooth) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        for (int k = 0; k < d.modes; ++k) coef.push_back(U(rng));
    }
    for (std::size_t j = 0; j < g.size; ++j) {
        const double r = g.at(j);
        switch (d.family) {
        case DataFamily::constant:
            s.u[j] = d.amplitude;
            s.ut[j] = d.velocity;
            break;
        case DataFamily::gaussian:
            s.u[j] = d.amplitude * std::exp(-r * r / (2.0 * d.width * d.width));
            s.ut[j] = d.velocity * s.u[j];
            break;
        case DataFamily::ode_profile:
            s.u[j] = ode_reference(m.p, d.ode_T, 0.0);
            s.ut[j] = ode_reference_rate(m.p, d.ode_T, 0.0);
            break;
        case DataFamily::random_smooth: {
            double mod = 1.0;
            for (int k = 0; k < d.modes; ++k)
                mod += 0.5 * coef[static_cast<std::size_t>(k)] * std::cos((k + 1) * std::numbers::pi * r / d.width) / (k + 1);
            s.u[j] = d.amplitude * std::exp(-r * r / (2.0 * d.width * d.width)) * mod;
            s.ut[j] = d.velocity * s.u[j];
            break;
        }
        }
    }
    return s;
}

struct FrameSpec {
    double x0 = 0.0;
    bool fitted_T0 = true;
    double T0 = 1.0;       ///< used when not fitted
    double s_offset = 0.0; ///< first frame at s = -log T0 + s_offset
    double s_span = 3.0;
    double ds = 0.01;
    std::size_t y_cells = default_y_cells;
    double window = 0.0; ///< 0 picks 10 when the trace is long enough, else 2
};

struct Scenario {
    std::string name = "scenario";
    ModelSpec model;
    bool sigma_auto = false, theta_auto = false;
    SolverConfig solver;
    double R = 1.25;
    double dr = 1e-3;
    double t_max = 2.0;
    std::size_t max_steps = 50'000'000;
    InitialData data;
    FrameSpec frames;
    std::vector<std::string> checks;
    std::vector<double> rough_etas{0.2, 0.5};
    double lp1_eps = 0.5;
    double rate_tau_cells = 8.0;  ///< rate window starts at this many dr before T
    double rate_decade = 10.0;
    std::size_t rate_samples = 11;
    std::vector<double> graph_centers;
    std::vector<double> criterion_amplitudes;
    double criterion_T0 = 1.0;
    double criterion_dr = 0.0; ///< 0 uses dr
    double cover_delta0 = 0.0; ///< 0 disables the covering block
    double cover_kappa = 1.0, cover_q = 2.0;
    std::uint64_t seed = 1;
    double resolution_scale = 1.0;

    [[nodiscard]] bool wants(std::string_view check) const {
        return std::find(checks.begin(), checks.end(), check) != checks.end();
    }
};

struct CheckInfo {
    std::string name;
    std::string summary;
};

inline const std::vector<CheckInfo>& check_catalog() {
    static const std::vector<CheckInfo> cat{
        {"dissipation", "d/ds(E0+I0) equals minus the boundary flux plus the perturbation sources, frame by frame"},
        {"e0_monotone", "E0 is non-increasing along unperturbed runs"},
        {"lyapunov", "H(s+W) - H(s) <= -boundary flux over every window, with tuned sigma"},
        {"negative_control", "the reversed Lyapunov inequality must fail on the same trace"},
        {"g_eta", "weighted dissipation inequality for G_eta with tuned theta"},
        {"rough_bound", "growth slope of windowed space-time integrals below eta(p+3)/2"},
        {"pohozaev", "integral identity from multiplying the similarity equation by w"},
        {"lp1", "space-time L^{p+1} control with a fitted K3"},
        {"rate", "log-log slope of the amplitude and band of the scaled norms near T"},
        {"criterion", "negative H at the first frame implies blow-up before T0 over an amplitude sweep"},
        {"covering", "slice inclusions and the covering inequality with its explicit constant"},
    };
    return cat;
}

inline void validate_check_names(const std::vector<std::string>& names) {
    for (const auto& n : names) {
        const auto& cat = check_catalog();
        if (std::none_of(cat.begin(), cat.end(), [&](const CheckInfo& c) { return c.name == n; }))
            throw ConfigError("unknown check '" + n + "'");
    }
}

inline Scenario scenario_from_config(const io::Config& c) {
    Scenario sc;
    sc.name = c.str("name", "scenario");
    sc.model.N = static_cast<int>(c.integer("N", 3));
    sc.model.critical = c.flag("critical", !c.has("p"));
    sc.model.p = c.num("p", 0.0);
    auto& pert = sc.model.perturbation;
    pert.f_kind = parse_source_shape(c.str("f", "none"));
    pert.g_kind = parse_damping_shape(c.str("g", "none"));
    pert.M = c.num("M", 0.0);
    pert.q = c.num("q", 1.0);
    pert.g_eps = c.num("g_eps", 1e-3);
    sc.model.eta = c.num("eta", 0.5);
    const auto sig = c.str("sigma", "0");
    sc.sigma_auto = sig == "auto";
    sc.model.sigma = sc.sigma_auto ? 0.0 : c.num("sigma", 0.0);
    const auto th = c.str("theta", "0");
    sc.theta_auto = th == "auto";
    sc.model.theta = sc.theta_auto ? 0.0 : c.num("theta", 0.0);

    const auto geo = c.str("geometry", "radial");
    if (geo != "radial" && geo != "line") throw ConfigError("geometry must be radial or line");
    sc.solver.geometry = geo == "radial" ? Geometry::radial : Geometry::line;
    const auto bnd = c.str("boundary", "outgoing");
    if (bnd != "outgoing" && bnd != "periodic") throw ConfigError("boundary must be outgoing or periodic");
    sc.solver.boundary = bnd == "outgoing" ? Boundary::outgoing : Boundary::periodic;
    sc.solver.cfl = c.num("cfl", 0.5);
    sc.solver.amp_step = c.num("amp_step", 0.02);
    sc.solver.cap = c.num("cap", 0.0);
    sc.R = c.num("R", 1.25);
    sc.dr = c.num("dr", 1e-3);
    sc.t_max = c.num("t_max", 2.0);
    sc.max_steps = static_cast<std::size_t>(c.integer("max_steps", 50'000'000));

    sc.data.family = parse_data_family(c.str("data", "gaussian"));
    sc.data.amplitude = c.num("amplitude", 1.0);
    sc.data.width = c.num("width", 0.5);
    sc.data.velocity = c.num("velocity", 0.0);
    sc.data.ode_T = c.num("ode_T", 1.0);
    sc.data.modes = static_cast<int>(c.integer("modes", 6));

    sc.frames.x0 = c.num("x0", 0.0);
    const auto T0 = c.str("T0", "fitted");
    sc.frames.fitted_T0 = T0 == "fitted";
    if (!sc.frames.fitted_T0) sc.frames.T0 = c.num("T0");
    sc.frames.s_offset = c.num("s_offset", 0.0);
    sc.frames.s_span = c.num("s_span", 3.0);
    sc.frames.ds = c.num("ds", 0.01);
    sc.frames.y_cells = static_cast<std::size_t>(c.integer("y_cells", static_cast<long>(default_y_cells)));
    const auto win = c.str("window", "auto");
    sc.frames.window = win == "auto" ? 0.0 : c.num("window");

    sc.checks = c.list("checks");
    validate_check_names(sc.checks);
    if (c.has("rough_etas")) sc.rough_etas = c.nums("rough_etas");
    sc.lp1_eps = c.num("lp1_eps", 0.5);
    sc.rate_tau_cells = c.num("rate_tau_cells", 8.0);
    sc.rate_decade = c.num("rate_decade", 10.0);
    sc.rate_samples = static_cast<std::size_t>(c.integer("rate_samples", 11));
    sc.graph_centers = c.nums("graph_centers");
    sc.criterion_amplitudes = c.nums("criterion_amplitudes");
    sc.criterion_T0 = c.num("criterion_T0", 1.0);
    sc.criterion_dr = c.num("criterion_dr", 0.0);
    sc.cover_delta0 = c.num("cover_delta0", 0.0);
    sc.cover_kappa = c.num("cover_kappa", 1.0);
    sc.cover_q = c.num("cover_q", 2.0);
    sc.seed = static_cast<std::uint64_t>(c.integer("seed", 1));
    sc.resolution_scale = c.num("resolution_scale", 1.0);
    if (auto extra = c.unused(); !extra.empty()) throw ConfigError(c.origin() + ": unknown key '" + extra.front() + "'");
    return sc;
}

inline Scenario load_scenario(const std::filesystem::path& p) { return scenario_from_config(io::Config::load(p)); }

/// Refine every resolution knob by `scale` (dr, ds, amp_step divided; y cells multiplied).
inline Scenario refined(Scenario sc, double scale) {
    if (!(scale > 0.0)) throw ConfigError("resolution scale must be positive");
    sc.resolution_scale *= scale;
    sc.dr /= scale;
    sc.criterion_dr /= scale;
    sc.frames.ds /= scale;
    sc.solver.amp_step /= scale;
    sc.frames.y_cells = static_cast<std::size_t>(std::llround(static_cast<double>(sc.frames.y_cells) * scale));
    return sc;
}

inline ModelParams validate(const Scenario& sc) {
    auto m = make_model(sc.model);
    if (!(sc.dr > 0.0 && sc.frames.ds > 0.0 && sc.frames.s_span > 0.0 && sc.t_max > 0.0 && sc.R > 0.0))
        throw ConfigError("resolutions and extents must be positive");
    if (sc.frames.y_cells < 8) throw ConfigError("y_cells must be at least 8");
    if (sc.frames.s_offset < 0.0) throw ConfigError("s_offset must be >= 0");
    if (!sc.frames.fitted_T0 && !(sc.frames.T0 > 0.0)) throw ConfigError("T0 must be positive");
    if (sc.data.family == DataFamily::ode_profile && !(sc.data.ode_T > 0.0)) throw ConfigError("ode_T must be positive");
    if (sc.cover_delta0 != 0.0 && !(sc.cover_delta0 > 0.0 && sc.cover_delta0 < 1.0))
        throw ConfigError("cover_delta0 must lie in (0,1)");
    if (sc.wants("criterion") && sc.criterion_amplitudes.empty()) throw ConfigError("criterion check needs criterion_amplitudes");
    if (sc.wants("covering") && sc.cover_delta0 == 0.0) throw ConfigError("covering check needs cover_delta0");
    if (sc.wants("rate") && sc.rate_samples < 2) throw ConfigError("rate_samples must be at least 2");
    if (sc.frames.x0 != 0.0) throw ConfigError("frames are centred at x0 = 0 (radial data)");
    return m;
}

inline UniformGrid solver_grid(const Scenario& sc, double dr) {
    const auto n = static_cast<std::size_t>(std::llround(sc.R / dr));
    if (sc.solver.geometry == Geometry::line && sc.solver.boundary == Boundary::periodic)
        return {0.0, 2.0 * sc.R / static_cast<double>(2 * n), 2 * n};
    return {0.0, sc.R / static_cast<double>(n), n + 1};
}

/// Smallest power of two (or zero) passing `passes`, searched by doubling
/// from 2^-20 up to 2^64.
template <class Fn>
double doubling_search(Fn&& passes, const char* what) {
    if (passes(0.0)) return 0.0;
    for (int k = -20; k <= 64; ++k) {
        const double v = std::ldexp(1.0, k);
        if (passes(v)) return v;
    }
    throw std::runtime_error(std::string("tuning failure: no ") + what + " below 2^64 passes");
}

struct Tuned {
    double sigma = 0.0, theta = 0.0;
};

/// Tune σ against the windowed Lyapunov inequality and θ against the G_η
/// inequality on a calibration trace. Leaves `m` and `tr` retuned.
inline Tuned tune_constants(EnergyTrace& tr, ModelParams& m, double W, const Resolution& res, bool sigma, bool theta) {
    if (sigma) {
        m.sigma = doubling_search(
            [&](double v) {
                auto mm = m;
                mm.sigma = v;
                retune(tr, mm);
                return check_lyapunov_window(tr, W, res).passed();
            },
            "sigma");
    }
    if (theta) {
        m.theta = doubling_search(
            [&](double v) {
                auto mm = m;
                mm.theta = v;
                retune(tr, mm);
                return check_g_eta_decrease(tr, mm, res).passed();
            },
            "theta");
    }
    retune(tr, m);
    return {m.sigma, m.theta};
}

struct RunResult {
    Scenario scenario;
    ModelParams model;
    UniformGrid grid;
    Trajectory traj;
    std::optional<BlowupEstimate> blowup;
    double T0 = 0.0;
    std::vector<double> s_list;
    std::vector<WState> frames;
    EnergyTrace trace;
    Resolution resolution;
    double window = 2.0;
    std::vector<CheckReport> checks;
    std::vector<RateSample> rate;
    std::vector<CriterionRow> criterion;
    std::optional<BlowupGraph> graph;
    bool complete = false;
    std::string error;

    [[nodiscard]] bool any_failed() const {
        return std::any_of(checks.begin(), checks.end(), [](const CheckReport& r) { return r.failed(); });
    }
};

inline double pick_window(const FrameSpec& f) {
    if (f.window > 0.0) return f.window;
    return f.s_span >= 10.0 + 5.0 * f.ds ? 10.0 : 2.0;
}

inline EnergyTrace build_trace(const std::vector<WState>& frames, const ModelParams& m) {
    EnergyTrace tr;
    tr.eta = m.eta;
    tr.sigma = m.sigma;
    tr.theta = m.theta;
    tr.gamma = m.gamma;
    tr.frames = parallel_map<FrameIntegrals>(frames.size(), [&](std::size_t k) { return frame_integrals(frames[k], m); });
    return tr;
}

/// The trace-only checks, shared by run_scenario and the `check` verb.
inline std::vector<CheckReport> trace_checks(const Scenario& sc, const EnergyTrace& tr, const ModelParams& m,
                                             const Resolution& res, double W) {
    std::vector<CheckReport> out;
    if (sc.wants("dissipation")) out.push_back(check_dissipation_identity(tr, res));
    if (sc.wants("e0_monotone")) {
        auto r = check_energy_monotone(tr, res);
        if (!m.perturbation.trivial()) {
            r.status = CheckStatus::not_applicable;
            r.notes.push_back("perturbed run; E0 alone need not decrease");
        }
        out.push_back(r);
    }
    if (sc.wants("lyapunov")) out.push_back(check_lyapunov_window(tr, W, res));
    if (sc.wants("negative_control")) {
        auto r = check_lyapunov_window(tr, W, res, true);
        r.name = "negative_control";
        // the reversed inequality is expected to fail
        r.status = r.failed() ? CheckStatus::pass : CheckStatus::fail;
        r.notes.push_back("passes when the reversed inequality is violated");
        out.push_back(r);
    }
    if (sc.wants("g_eta")) out.push_back(check_g_eta_decrease(tr, m, res));
    if (sc.wants("rough_bound"))
        for (double eta : sc.rough_etas) {
            auto r = check_rough_bound(tr, eta, m.p, W);
            r.name = "rough_bound_eta_" + detail::short_num(eta);
            out.push_back(r);
        }
    if (sc.wants("pohozaev")) out.push_back(check_pohozaev_identity(tr, W, m, res));
    if (sc.wants("lp1")) {
        const double C = (m.p + 1.0) / (m.p - 1.0);
        const double K3 = fit_K3(tr, sc.lp1_eps, W, C);
        auto r = check_lp1_control({&tr}, sc.lp1_eps, W, m.p, K3);
        r.notes.push_back("K3 calibrated on this run");
        out.push_back(r);
    }
    return out;
}

inline std::vector<CriterionRow> criterion_sweep(const Scenario& sc, const ModelParams& m) {
    const double dr = sc.criterion_dr > 0.0 ? sc.criterion_dr : sc.dr;
    const double T0 = sc.criterion_T0;
    const auto g = solver_grid(sc, dr);
    if (g.back() < T0 + 3.0 * g.spacing) throw ConfigError("criterion sweep needs R > criterion_T0");
    return parallel_map<CriterionRow>(sc.criterion_amplitudes.size(), [&](std::size_t i) {
        auto d = sc.data;
        d.amplitude = sc.criterion_amplitudes[i];
        const auto init = make_initial(d, m, g, sc.seed);
        CriterionRow row;
        row.amplitude = d.amplitude;
        const auto st = to_similarity(init, 0.0, T0, m.p, sc.frames.y_cells);
        row.H_first = frame_integrals(st, m).H;
        Solver solver(m, sc.solver, g);
        IntegrateOptions opt;
        opt.t_max = T0;
        opt.max_steps = sc.max_steps;
        const auto tr = integrate(solver, init, opt);
        row.blew_up = tr.reached_cap;
        row.t_cap = tr.t.back();
        return row;
    });
}

inline std::vector<CheckReport> covering_checks(const Scenario& sc) {
    using namespace covering;
    const double d0 = sc.cover_delta0;
    std::vector<CheckReport> out;
    out.push_back(check_inclusions<1>({0.0}, 1.0, 0.0, d0, 100, 100, sc.seed));
    auto f = [](const Vec<1>& x, double t) {
        const double c = 0.3 * t;
        return std::exp(-(x[0] - c) * (x[0] - c) / 0.1);
    };
    out.push_back(verify_cover_inequality<1>(f, sc.cover_kappa, sc.cover_q, {0.0}, 1.0, 0.0, d0, {128, 128, 21}));
    return out;
}

/// Run a scenario end to end. Nothing is written here; see write_bundle.
inline RunResult run_scenario(const Scenario& sc) {
    RunResult res;
    res.scenario = sc;
    res.model = validate(sc);
    auto& m = res.model;
    res.grid = solver_grid(sc, sc.dr);
    const Solver solver(m, sc.solver, res.grid);
    const auto init = make_initial(sc.data, m, res.grid, sc.seed);

    std::vector<std::size_t> probes;
    for (double x : sc.graph_centers) {
        const double pos = sc.solver.geometry == Geometry::radial ? std::abs(x) : x;
        const auto k = static_cast<long>(std::llround((pos - res.grid.origin) / res.grid.spacing));
        if (k < 0 || static_cast<std::size_t>(k) >= res.grid.size) throw ConfigError("graph center outside the grid");
        probes.push_back(static_cast<std::size_t>(k));
    }

    const bool need_T = sc.frames.fitted_T0 || sc.wants("rate");
    std::optional<BlowupEstimate> first;
    if (need_T) {
        IntegrateOptions opt;
        opt.t_max = sc.t_max;
        opt.max_steps = sc.max_steps;
        auto pass1 = integrate(solver, init, opt);
        if (pass1.reached_cap) first = detect_blowup(pass1);
        else if (sc.frames.fitted_T0) throw NoBlowupDetected("scenario '" + sc.name + "' did not blow up before t_max");
    }
    res.T0 = sc.frames.fitted_T0 ? first->T : sc.frames.T0;
    if (res.grid.back() < res.T0 + 3.0 * res.grid.spacing)
        throw FrameError("domain radius R must exceed T0 so the backward cone stays inside the grid");

    const double s0 = -std::log(res.T0) + sc.frames.s_offset;
    const auto nframes = static_cast<std::size_t>(std::llround(sc.frames.s_span / sc.frames.ds));
    std::vector<double> out_times;
    for (std::size_t k = 0; k <= nframes; ++k) {
        res.s_list.push_back(s0 + sc.frames.ds * static_cast<double>(k));
        out_times.push_back(time_of_s(res.s_list.back(), res.T0));
    }
    out_times.front() = std::max(out_times.front(), 0.0);
    if (!sc.frames.fitted_T0 && out_times.back() > sc.t_max) throw ConfigError("last frame lies beyond t_max");
    double tau_lo = 0.0, tau_hi = 0.0;
    if (sc.wants("rate") && first) {
        tau_lo = sc.rate_tau_cells * sc.dr;
        tau_hi = tau_lo * sc.rate_decade;
        for (std::size_t i = 0; i < sc.rate_samples; ++i) {
            const double f = static_cast<double>(i) / static_cast<double>(sc.rate_samples - 1);
            const double t = first->T - tau_hi * std::pow(tau_lo / tau_hi, f);
            if (t > 0.0) out_times.push_back(t);
        }
    }
    std::sort(out_times.begin(), out_times.end());
    out_times.erase(std::unique(out_times.begin(), out_times.end(),
                                [](double a, double b) { return std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a)); }),
                    out_times.end());

    IntegrateOptions opt;
    opt.t_max = sc.t_max;
    opt.output_times = out_times;
    opt.probe_index = probes;
    opt.max_steps = sc.max_steps;
    res.traj = integrate(solver, init, opt);
    if (res.traj.reached_cap) res.blowup = detect_blowup(res.traj);

    res.frames = sample_frames(res.traj, sc.frames.x0, res.T0, res.s_list, sc.frames.y_cells);
    res.trace = build_trace(res.frames, m);
    res.resolution.dy = 1.0 / static_cast<double>(sc.frames.y_cells);
    res.resolution.ds = sc.frames.ds;
    res.resolution.dr = res.grid.spacing;
    res.resolution.tau_min = std::exp(-res.s_list.back());
    res.window = pick_window(sc.frames);

    tune_constants(res.trace, m, res.window, res.resolution, sc.sigma_auto, sc.theta_auto);

    res.checks = trace_checks(sc, res.trace, m, res.resolution, res.window);
    if (sc.wants("rate")) {
        if (!res.blowup) {
            CheckReport r;
            r.name = "blowup_rate";
            r.status = CheckStatus::not_applicable;
            r.notes.push_back("trajectory does not blow up");
            res.checks.push_back(r);
        } else {
            res.checks.push_back(fit_blowup_rate(res.traj, res.blowup->T, tau_lo, tau_hi, sc.frames.y_cells, &res.rate));
        }
    }
    if (sc.wants("criterion")) {
        res.criterion = criterion_sweep(sc, m);
        res.checks.push_back(blowup_criterion_report(res.criterion));
    }
    if (!sc.graph_centers.empty()) res.graph = blowup_graph(res.traj, sc.graph_centers);
    if (sc.wants("covering"))
        for (auto& r : covering_checks(sc)) res.checks.push_back(std::move(r));
    res.complete = true;
    return res;
}

// ---------------------------------------------------------------------------
// Bundle output
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::size_t> spread_indices(std::size_t n, std::size_t keep) {
    std::vector<std::size_t> out;
    if (n == 0) return out;
    if (n <= keep) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(i);
        return out;
    }
    for (std::size_t i = 0; i < keep; ++i) out.push_back(i * (n - 1) / (keep - 1));
    return out;
}

struct TraceColumn {
    const char* name;
    double FrameIntegrals::*field;
};

inline const std::vector<TraceColumn>& trace_columns() {
    static const std::vector<TraceColumn> cols{
        {"s", &FrameIntegrals::s},
        {"E0", &FrameIntegrals::E0},
        {"I0", &FrameIntegrals::I0},
        {"E_eta", &FrameIntegrals::E_eta},
        {"I_eta", &FrameIntegrals::I_eta},
        {"J_eta", &FrameIntegrals::J_eta},
        {"H_eta", &FrameIntegrals::H_eta},
        {"G_eta", &FrameIntegrals::G_eta},
        {"H_lyap", &FrameIntegrals::H},
        {"boundary_dissipation", &FrameIntegrals::boundary},
        {"h1l2_norm", &FrameIntegrals::h1l2},
        {"I1", &FrameIntegrals::I1},
        {"I2", &FrameIntegrals::I2},
        {"I3", &FrameIntegrals::I3},
        {"ws2", &FrameIntegrals::ws2},
        {"grad2", &FrameIntegrals::grad2},
        {"grad_tan", &FrameIntegrals::grad_tan},
        {"w2", &FrameIntegrals::w2},
        {"wp1", &FrameIntegrals::wp1},
        {"ws_ydw", &FrameIntegrals::ws_ydw},
        {"bracket", &FrameIntegrals::bracket},
        {"w_ws_bdry", &FrameIntegrals::w_ws_bdry},
        {"pert_f", &FrameIntegrals::pert_f},
        {"pert_g", &FrameIntegrals::pert_g},
        {"le_ws", &FrameIntegrals::le_ws},
        {"le_wp1", &FrameIntegrals::le_wp1},
        {"le_grad", &FrameIntegrals::le_grad},
    };
    return cols;
}

} // namespace detail

inline std::string energy_trace_csv(const EnergyTrace& tr) {
    std::vector<std::string> head;
    for (const auto& c : detail::trace_columns()) head.emplace_back(c.name);
    io::CsvWriter w(head);
    for (const auto& f : tr.frames) {
        std::vector<double> row;
        for (const auto& c : detail::trace_columns()) row.push_back(f.*c.field);
        w.row(row);
    }
    return w.str();
}

inline EnergyTrace energy_trace_from_csv(const io::CsvTable& t) {
    EnergyTrace tr;
    tr.frames.resize(t.rows.size());
    for (const auto& c : detail::trace_columns()) {
        const auto col = t.numbers(c.name);
        for (std::size_t k = 0; k < col.size(); ++k) tr.frames[k].*c.field = col[k];
    }
    return tr;
}

inline io::json model_json(const ModelParams& m) {
    io::json j;
    j["N"] = m.N;
    j["p"] = m.p;
    j["critical"] = m.critical;
    j["f"] = std::string(to_string(m.perturbation.f_kind));
    j["g"] = std::string(to_string(m.perturbation.g_kind));
    j["M"] = m.perturbation.M;
    j["q"] = m.perturbation.q;
    j["g_eps"] = m.perturbation.g_eps;
    j["eta"] = m.eta;
    j["sigma"] = m.sigma;
    j["theta"] = m.theta;
    j["gamma"] = m.gamma;
    j["kappa"] = m.kappa;
    j["alpha"] = m.alpha;
    j["scaling"] = m.scaling;
    return j;
}

inline io::json manifest_json(const RunResult& r) {
    const auto& sc = r.scenario;
    io::json j;
    j["name"] = sc.name;
    j["complete"] = r.complete;
    if (!r.error.empty()) j["error"] = r.error;
    j["seed"] = sc.seed;
    j["resolution_scale"] = sc.resolution_scale;
    j["model"] = model_json(r.model);
    j["tuning"] = {{"sigma_auto", sc.sigma_auto}, {"theta_auto", sc.theta_auto}};
    j["data"] = {{"family", std::string(to_string(sc.data.family))},
                 {"amplitude", sc.data.amplitude},
                 {"width", sc.data.width},
                 {"velocity", sc.data.velocity},
                 {"ode_T", sc.data.ode_T},
                 {"modes", sc.data.modes}};
    io::json solver;
    solver["geometry"] = std::string(to_string(sc.solver.geometry));
    solver["boundary"] = std::string(to_string(sc.solver.boundary));
    solver["cfl"] = sc.solver.cfl;
    solver["amp_step"] = sc.solver.amp_step;
    solver["R"] = sc.R;
    solver["dr"] = r.grid.spacing;
    solver["nodes"] = r.grid.size;
    solver["t_max"] = sc.t_max;
    if (r.complete) {
        solver["cap"] = r.traj.cap;
        solver["steps"] = r.traj.steps;
        solver["last_dt"] = r.traj.dt;
        solver["max_residual"] = r.traj.max_residual;
        solver["reached_cap"] = r.traj.reached_cap;
        solver["nonfinite"] = r.traj.nonfinite;
        solver["t_end"] = r.traj.t.empty() ? 0.0 : r.traj.t.back();
    }
    j["solver"] = solver;
    if (r.complete) {
        io::json fr;
        fr["x0"] = sc.frames.x0;
        fr["T0"] = r.T0;
        fr["T0_policy"] = sc.frames.fitted_T0 ? "fitted" : "fixed";
        fr["s_start"] = r.s_list.front();
        fr["s_end"] = r.s_list.back();
        fr["ds"] = sc.frames.ds;
        fr["count"] = r.s_list.size();
        fr["y_cells"] = sc.frames.y_cells;
        fr["window"] = r.window;
        fr["hy_effective"] = r.resolution.hy();
        fr["tau_min"] = r.resolution.tau_min;
        j["frames"] = fr;
        if (r.blowup)
            j["blowup"] = {{"T_est", r.blowup->T}, {"ci", r.blowup->ci}, {"fallback", r.blowup->fallback},
                           {"samples", r.blowup->samples}};
        else
            j["blowup"] = nullptr;
        std::map<std::string, int> counts;
        for (const auto& c : r.checks) ++counts[std::string(to_string(c.status))];
        j["check_counts"] = counts;
    }
    j["checks"] = sc.checks;
    j["check_options"] = {{"rough_etas", sc.rough_etas}, {"lp1_eps", sc.lp1_eps}};
    return j;
}

/// Write the bundle files into `dir`. Only files with content are written.
inline std::vector<std::string> write_bundle(const RunResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    auto put = [&](const std::string& name, const std::string& data) {
        io::write_file(dir / name, data);
        files.push_back(name);
    };
    if (r.complete) {
        const auto& snaps = r.traj.snapshots;
        {
            io::CsvWriter w({"t", "r", "u", "ut"});
            for (auto k : detail::spread_indices(snaps.size(), 16)) {
                const auto& s = snaps[k];
                const std::size_t stride = std::max<std::size_t>(1, (s.u.size() + 1023) / 1024);
                for (std::size_t j = 0; j < s.u.size(); j += stride) w.row(std::vector<double>{s.t, s.grid.at(j), s.u[j], s.ut[j]});
            }
            put("trajectory.csv", w.str());
        }
        {
            io::CsvWriter w({"t", "umax"});
            for (std::size_t k = 0; k < r.traj.t.size(); ++k) w.row(std::vector<double>{r.traj.t[k], r.traj.umax[k]});
            put("amplitude.csv", w.str());
        }
        {
            io::CsvWriter w({"x0", "T0", "s", "y", "w", "ws", "wy"});
            for (auto k : detail::spread_indices(r.frames.size(), 16)) {
                const auto& f = r.frames[k];
                for (std::size_t j = 0; j < f.size(); ++j)
                    w.row(std::vector<double>{f.x0, f.T0, f.s, f.ygrid.at(j), f.w[j], f.ws[j], f.wy[j]});
            }
            put("frames.csv", w.str());
        }
        put("energy_trace.csv", energy_trace_csv(r.trace));
        if (!r.rate.empty()) {
            io::CsvWriter w({"t", "tau", "q_u", "q_ut", "q_grad", "sum"});
            for (const auto& q : r.rate) w.row(std::vector<double>{q.t, q.tau, q.q_u, q.q_ut, q.q_grad, q.sum()});
            put("rate.csv", w.str());
        }
        if (!r.criterion.empty()) {
            io::CsvWriter w({"amplitude", "H_first", "blew_up", "t_end"});
            for (const auto& c : r.criterion)
                w.row(std::vector<double>{c.amplitude, c.H_first, c.blew_up ? 1.0 : 0.0, c.t_cap});
            put("criterion.csv", w.str());
        }
        if (r.graph) {
            io::CsvWriter w({"x", "T", "ci", "ok"});
            for (std::size_t i = 0; i < r.graph->size(); ++i)
                w.row(std::vector<double>{r.graph->centers[i], r.graph->T[i], r.graph->ci[i], r.graph->ok[i] ? 1.0 : 0.0});
            put("graph.csv", w.str());
        }
        if (r.scenario.cover_delta0 > 0.0) {
            using namespace covering;
            const double T = r.T0, d0 = r.scenario.cover_delta0;
            const auto cov = cover_slice<1>({0.0}, T, 0.0, d0);
            io::CsvWriter w({"slice", "role", "x_center", "T", "t1", "delta", "vertex", "x", "t"});
            auto poly = [&](std::size_t id, const std::string& role, const SliceDescriptor<1>& s) {
                const double top = s.top();
                const double rb = s.radius_at(s.t1), rt = s.radius_at(top);
                const double xs[4] = {s.x[0] - rb, s.x[0] + rb, s.x[0] + rt, s.x[0] - rt};
                const double ts[4] = {s.t1, s.t1, top, top};
                for (int v = 0; v < 4; ++v)
                    w.row(std::vector<std::string>{std::to_string(id), role, io::fmt_double(s.x[0]), io::fmt_double(s.T),
                                                   io::fmt_double(s.t1), io::fmt_double(s.delta), std::to_string(v),
                                                   io::fmt_double(xs[v]), io::fmt_double(ts[v])});
            };
            poly(0, "parent", SliceDescriptor<1>{{0.0}, T, 0.0, 1.0});
            for (std::size_t i = 0; i < cov.slices.size(); ++i) poly(i + 1, "sub", cov.slices[i]);
            put("covering.csv", w.str());
        }
        io::json arr = io::json::array();
        for (const auto& c : r.checks) arr.push_back(io::to_json(c));
        put("checks.json", io::dump(arr));
    }
    auto man = manifest_json(r);
    auto listed = files;
    listed.push_back("manifest.json");
    std::sort(listed.begin(), listed.end());
    man["files"] = listed;
    put("manifest.json", io::dump(man));
    return files;
}

/// Recompute the trace checks of a written bundle from its energy trace and
/// manifest. Checks that need the trajectory (rate, criterion, covering)
/// are taken from checks.json as recorded.
inline std::vector<CheckReport> recheck_bundle(const std::filesystem::path& dir) {
    const auto man = io::json::parse(io::read_file(dir / "manifest.json"));
    if (!man.value("complete", false)) throw std::runtime_error("bundle " + dir.string() + " is marked incomplete");
    const auto& mj = man.at("model");
    Scenario sc;
    sc.model.N = mj.at("N").get<int>();
    sc.model.critical = mj.at("critical").get<bool>();
    sc.model.p = mj.at("p").get<double>();
    sc.model.perturbation.f_kind = parse_source_shape(mj.at("f").get<std::string>());
    sc.model.perturbation.g_kind = parse_damping_shape(mj.at("g").get<std::string>());
    sc.model.perturbation.M = mj.at("M").get<double>();
    sc.model.perturbation.q = mj.at("q").get<double>();
    sc.model.perturbation.g_eps = mj.at("g_eps").get<double>();
    sc.model.eta = mj.at("eta").get<double>();
    sc.model.sigma = mj.at("sigma").get<double>();
    sc.model.theta = mj.at("theta").get<double>();
    const auto m = make_model(sc.model);
    sc.checks = man.at("checks").get<std::vector<std::string>>();
    sc.rough_etas = man.at("check_options").at("rough_etas").get<std::vector<double>>();
    sc.lp1_eps = man.at("check_options").at("lp1_eps").get<double>();
    const auto& fr = man.at("frames");
    Resolution res;
    res.dy = 1.0 / fr.at("y_cells").get<double>();
    res.ds = fr.at("ds").get<double>();
    res.dr = man.at("solver").at("dr").get<double>();
    res.tau_min = fr.at("tau_min").get<double>();
    auto tr = energy_trace_from_csv(io::parse_csv(io::read_file(dir / "energy_trace.csv")));
    tr.eta = m.eta;
    tr.sigma = m.sigma;
    tr.theta = m.theta;
    tr.gamma = m.gamma;
    auto out = trace_checks(sc, tr, m, res, fr.at("window").get<double>());
    const auto recorded = io::json::parse(io::read_file(dir / "checks.json"));
    for (const auto& rj : recorded) {
        const auto name = rj.at("name").get<std::string>();
        if (name != "blowup_rate" && name != "blowup_criterion" && name != "cover_inclusions" && name != "cover_inequality")
            continue;
        CheckReport r;
        r.name = name;
        const auto st = rj.at("status").get<std::string>();
        r.status = st == "pass" ? CheckStatus::pass
                   : st == "fail" ? CheckStatus::fail
                   : st == "not_applicable" ? CheckStatus::not_applicable
                                            : CheckStatus::inconclusive;
        auto num = [](const io::json& v) { return v.is_number() ? v.get<double>() : std::nan(""); };
        r.lhs = num(rj.at("lhs"));
        r.rhs = num(rj.at("rhs"));
        r.residual = num(rj.at("residual"));
        r.tolerance = num(rj.at("tolerance"));
        r.notes = rj.at("notes").get<std::vector<std::string>>();
        r.notes.push_back("recorded at run time");
        out.push_back(r);
    }
    return out;
}

} // namespace blowup
