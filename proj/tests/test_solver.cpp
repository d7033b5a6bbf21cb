#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "blowup/solver.hpp"

using namespace blowup;
using Catch::Approx;

namespace {

ModelParams cubic_model(int N = 3) {
    ModelSpec s;
    s.N = N;
    s.critical = false;
    s.p = 3.0;
    return make_model(s);
}

RadialSnapshot constant_state(const UniformGrid& g, double u, double ut) {
    RadialSnapshot s;
    s.grid = g;
    s.u.assign(g.size, u);
    s.ut.assign(g.size, ut);
    return s;
}

RadialSnapshot gaussian_state(const UniformGrid& g, double A, double c, double w2) {
    RadialSnapshot s;
    s.grid = g;
    s.u.resize(g.size);
    s.ut.assign(g.size, 0.0);
    for (std::size_t i = 0; i < g.size; ++i) s.u[i] = A * std::exp(-(g.at(i) - c) * (g.at(i) - c) / w2);
    return s;
}

} // namespace

TEST_CASE("zero data stays zero") {
    const UniformGrid g{0.0, 0.01, 101};
    Solver solver(cubic_model(), {}, g);
    auto s = constant_state(g, 0.0, 0.0);
    for (int k = 0; k < 50; ++k) s = solver.step(s, 0.005);
    CHECK(s.max_abs_u() == 0.0);
    CHECK(s.t == Approx(0.25));
}

TEST_CASE("spatially constant data follows the ODE profile") {
    for (double p : {2.0, 3.0, 5.0}) {
        ModelSpec ms;
        ms.critical = false;
        ms.p = p;
        SolverConfig cfg;
        cfg.geometry = Geometry::line;
        cfg.boundary = Boundary::periodic;
        cfg.amp_step = 2e-4;
        const UniformGrid g{0.0, 0.125, 8};
        Solver solver(make_model(ms), cfg, g);
        IntegrateOptions opt;
        opt.t_max = 0.9;
        const auto tr =
            integrate(solver, constant_state(g, ode_reference(p, 1, 0), ode_reference_rate(p, 1, 0)), opt);
        double worst = 0.0;
        for (std::size_t k = 0; k < tr.t.size(); ++k)
            worst = std::max(worst, std::abs(tr.umax[k] / ode_reference(p, 1, tr.t[k]) - 1.0));
        CHECK(worst < 1e-6);
        CHECK(tr.t.back() == 0.9);
    }
}

TEST_CASE("linear wave: Verlet conserves the shadow energy") {
    SolverConfig cfg;
    cfg.nonlinear = false;
    SECTION("periodic line") {
        cfg.geometry = Geometry::line;
        cfg.boundary = Boundary::periodic;
        const UniformGrid g{-5.0, 0.02, 500};
        Solver solver(cubic_model(), cfg, g);
        auto s = gaussian_state(g, 1.0, 0.0, 0.1);
        const double dt = 0.5 * g.spacing;
        const double e0 = solver.shadow_energy(s, dt);
        auto acc = solver.acceleration(s);
        for (int k = 0; k < 200; ++k) solver.step_inplace(s, acc, dt);
        CHECK(std::abs(solver.shadow_energy(s, dt) / e0 - 1.0) < 1e-10);
        CHECK(std::abs(solver.linear_energy(s) / e0 - 1.0) < 1e-3);
    }
    SECTION("radial, pulse away from the boundary") {
        const UniformGrid g{0.0, 0.01, 401};
        Solver solver(cubic_model(), cfg, g);
        auto s = gaussian_state(g, 1.0, 0.0, 0.05);
        const double dt = 0.5 * g.spacing;
        const double e0 = solver.shadow_energy(s, dt);
        auto acc = solver.acceleration(s);
        for (int k = 0; k < 200; ++k) solver.step_inplace(s, acc, dt);
        // per unit time
        CHECK(std::abs(solver.shadow_energy(s, dt) / e0 - 1.0) < 1e-6);
    }
}

TEST_CASE("outgoing boundary lets a pulse leave") {
    SolverConfig cfg;
    cfg.nonlinear = false;
    const UniformGrid g{0.0, 0.01, 101};
    Solver solver(cubic_model(), cfg, g);
    IntegrateOptions opt;
    opt.t_max = 3.0;
    opt.output_times = {3.0};
    const auto tr = integrate(solver, gaussian_state(g, 1.0, 0.0, 0.02), opt);
    REQUIRE(tr.snapshots.size() == 1);
    CHECK(tr.snapshots[0].max_abs_u() < 0.03);
}

TEST_CASE("step preconditions") {
    const UniformGrid g{0.0, 0.01, 11};
    Solver solver(cubic_model(), {}, g);
    CHECK_THROWS_AS(solver.step(constant_state(g, 0, 0), 0.1), DomainError);
    CHECK_THROWS_AS(solver.step(constant_state(g, 1e9, 0), 1e-4), DomainError);
    SolverConfig periodic;
    periodic.boundary = Boundary::periodic;
    CHECK_THROWS_AS(Solver(cubic_model(), periodic, g), ConfigError);
    CHECK_THROWS_AS(Solver(cubic_model(), {}, UniformGrid{0.1, 0.01, 11}), ConfigError);
}

TEST_CASE("output times are hit exactly") {
    const UniformGrid g{0.0, 0.01, 101};
    Solver solver(cubic_model(), {}, g);
    IntegrateOptions opt;
    opt.t_max = 0.3;
    opt.output_times = {0.0, 0.1, 0.123456789, 0.3};
    const auto tr = integrate(solver, gaussian_state(g, 0.5, 0.0, 0.1), opt);
    REQUIRE(tr.snapshots.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(tr.snapshots[k].t == opt.output_times[k]);
    opt.output_times = {0.2, 0.1};
    CHECK_THROWS_AS(integrate(solver, gaussian_state(g, 0.5, 0.0, 0.1), opt), ConfigError);
}

TEST_CASE("ODE reference") {
    CHECK(ode_reference(3, 1, 0) == Approx(std::sqrt(2.0)));
    CHECK(ode_reference(3, 1, 1 - std::exp(-1.0)) == Approx(std::sqrt(2.0) * std::exp(1.0)));
    double prev = 0.0;
    for (double t = 0.0; t < 0.999; t += 0.01) {
        const double u = ode_reference(2.5, 1, t);
        CHECK(u > prev);
        prev = u;
    }
    CHECK_THROWS_AS(ode_reference(3, 1, 1), DomainError);
}

TEST_CASE("blow-up time from amplitude samples") {
    std::vector<double> t, a;
    for (int k = 0; k < 400; ++k) {
        t.push_back(k * 0.0025);
        a.push_back(ode_reference(3, 1, t.back()));
    }
    const auto exact = estimate_blowup_time(t, a, 3);
    CHECK(exact.T == Approx(1.0).margin(1e-6));
    CHECK_FALSE(exact.fallback);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.01);
    auto noisy = a;
    for (auto& v : noisy) v *= 1.0 + noise(rng);
    CHECK(estimate_blowup_time(t, noisy, 3).T == Approx(1.0).margin(1e-2));

    Trajectory bounded;
    bounded.t = t;
    bounded.umax.assign(t.size(), 1.0);
    CHECK_THROWS_AS(detect_blowup(bounded), NoBlowupDetected);
}

TEST_CASE("blow-up graph from probe series") {
    SolverConfig cfg;
    cfg.geometry = Geometry::line;
    cfg.boundary = Boundary::periodic;
    const UniformGrid g{-1.0, 0.02, 100};
    Solver solver(cubic_model(), cfg, g);
    IntegrateOptions opt;
    opt.t_max = 10.0;
    std::vector<double> centers;
    for (std::size_t i = 40; i <= 60; i += 5) {
        opt.probe_index.push_back(i);
        centers.push_back(g.at(i));
    }
    SECTION("constant data gives a flat graph") {
        const auto tr = integrate(solver, constant_state(g, 2.0, 0.0), opt);
        const auto bg = blowup_graph(tr, centers);
        for (std::size_t k = 0; k < bg.size(); ++k) {
            REQUIRE(bg.ok[k]);
            CHECK(bg.T[k] == Approx(bg.T[0]).margin(1e-12));
        }
        CHECK(non_characteristic_check(bg, centers[2], 0.5, 1e-9, 1.0));
    }
    SECTION("a bump blows up first at its centre") {
        auto init = gaussian_state(g, 3.0, 0.0, 0.05);
        for (auto& u : init.u) u += 1.0;
        const auto tr = integrate(solver, init, opt);
        const auto bg = blowup_graph(tr, centers);
        std::size_t arg = 0;
        for (std::size_t k = 0; k < bg.size(); ++k)
            if (bg.ok[k] && bg.T[k] < bg.T[arg]) arg = k;
        CHECK(arg == 2);
        CHECK(bg.lipschitz_excess() <= 1e-6);
        const auto d = fit_delta0(bg, centers[2], 1e-6, 0.2);
        CHECK(d.has_value());
    }
}

TEST_CASE("non-characteristic cone check on synthetic graphs") {
    BlowupGraph flat, charac;
    for (double x : {-0.2, -0.1, 0.0, 0.1, 0.2}) {
        for (auto* g : {&flat, &charac}) {
            g->centers.push_back(x);
            g->ok.push_back(true);
            g->ci.push_back(0.0);
            g->error.emplace_back();
            g->delta0.push_back(NAN);
        }
        flat.T.push_back(1.0);
        charac.T.push_back(1.0 - std::abs(x));
    }
    for (double d : {0.1, 0.5, 0.9}) {
        CHECK(non_characteristic_check(flat, 0.0, d, 1e-9, 1.0));
        CHECK_FALSE(non_characteristic_check(charac, 0.0, d, 1e-9, 1.0));
    }
    CHECK_THROWS_AS(non_characteristic_check(flat, 0.0, 1.0, 1e-9, 1.0), DomainError);
    CHECK_THROWS_AS(non_characteristic_check(flat, 0.2, 0.5, 1e-9, 1.0), InsufficientData);
    CHECK(charac.lipschitz_excess() == Approx(0.0).margin(1e-15));
}
