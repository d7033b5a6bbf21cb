#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "blowup/core.hpp"

using namespace blowup;
using Catch::Approx;

constexpr double pi = std::numbers::pi;

TEST_CASE("critical exponent") {
    CHECK(critical_exponent(2) == 5.0);
    CHECK(critical_exponent(3) == 3.0);
    CHECK(critical_exponent(5) == 2.0);
    CHECK_THROWS_AS(critical_exponent(1), DomainError);
}

TEST_CASE("gamma exponent") {
    CHECK(gamma_exponent(3, 2) == 0.5);
    CHECK(gamma_exponent(5, 1.5) == 0.5);
    CHECK(gamma_exponent(3, 2.5) == Approx(0.25));
    CHECK_THROWS_AS(gamma_exponent(3, 3), DomainError);
    CHECK_THROWS_AS(gamma_exponent(3, 4), DomainError);
}

TEST_CASE("alpha exponent vanishes at the critical power") {
    CHECK(alpha_exponent(3, 3) == 0.0);
    CHECK(alpha_exponent(2, 5) == 0.0);
    CHECK(alpha_exponent(3, 2) == Approx(1.0));
    for (int N = 2; N <= 10; ++N) CHECK(alpha_exponent(N, critical_exponent(N)) == 0.0);
    CHECK_THROWS_AS(alpha_exponent(3, 1.0), DomainError);
}

TEST_CASE("equilibrium kappa solves the constant similarity equation") {
    CHECK(equilibrium_kappa(3) == Approx(std::sqrt(2.0)));
    CHECK(equilibrium_kappa(5) == Approx(std::pow(0.75, 0.25)));
    CHECK(equilibrium_kappa(2) == Approx(6.0));
    // κ^{p-1} = 2(p+1)/(p-1)², checked for non-integer powers too
    for (double p : {1.5, 2.2, 3.0, 4.7, 7.0}) {
        const double k = equilibrium_kappa(p);
        CHECK(std::pow(k, p - 1.0) == Approx(2.0 * (p + 1.0) / ((p - 1.0) * (p - 1.0))));
    }
    CHECK_THROWS_AS(equilibrium_kappa(1.0), DomainError);
}

TEST_CASE("rho weight") {
    CHECK(rho_weight(0.0, 0.7) == 1.0);
    CHECK(rho_weight(0.9, 0.0) == 1.0);
    CHECK(rho_weight(0.6, 0.5) == Approx(0.8));
    CHECK_THROWS_AS(rho_weight(1.0, 0.5), DomainError);
    CHECK_THROWS_AS(rho_weight(-0.1, 0.5), DomainError);
}

TEST_CASE("sphere area and ball volume") {
    CHECK(sphere_area(2) == Approx(2 * pi));
    CHECK(sphere_area(3) == Approx(4 * pi));
    CHECK(ball_volume(3) == Approx(4 * pi / 3));
    CHECK(ball_volume(4) == Approx(pi * pi / 2));
}

TEST_CASE("perturbation shapes") {
    Perturbation none;
    CHECK(none.f(7) == 0.0);
    CHECK(none.F(7) == 0.0);
    CHECK(none.trivial());

    Perturbation pw{SourceShape::power, DampingShape::none, 1.0, 2.0};
    CHECK(pw.F(3) == Approx(9.0));
    CHECK(pw.f(-2) == Approx(-4.0));
    CHECK(pw.F(-3) == Approx(9.0));

    Perturbation sn{SourceShape::none, DampingShape::sine, 2.0};
    for (double v : {-100.0, -1.0, 0.3, 5.0}) CHECK(std::abs(sn.g(v)) <= 2.0 * (1.0 + std::abs(v)));
}

TEST_CASE("perturbation growth bounds hold on random samples") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> X(-1e6, 1e6);
    for (auto fs : {SourceShape::none, SourceShape::power})
        for (auto gs : {DampingShape::none, DampingShape::linear, DampingShape::sine}) {
            Perturbation p{fs, gs, 0.3, 1.7};
            for (int i = 0; i < 10000; ++i) {
                const double x = X(rng);
                REQUIRE(std::abs(p.f(x)) <= p.M * (1.0 + std::pow(std::abs(x), p.q)));
                REQUIRE(std::abs(p.g(x)) <= p.M * (1.0 + std::abs(x)));
            }
        }
}

TEST_CASE("F is the antiderivative of f") {
    Perturbation p{SourceShape::power, DampingShape::none, 0.7, 2.3};
    for (double u : {-100.0, -3.5, -0.2, 0.0, 1.0, 42.0, 100.0}) {
        // trapezoid on a fine grid from 0 to u
        const int n = 200000;
        const double h = u / n;
        double acc = 0.5 * (p.f(0.0) + p.f(u));
        for (int i = 1; i < n; ++i) acc += p.f(i * h);
        acc *= h;
        CHECK(p.F(u) == Approx(acc).epsilon(1e-8).margin(1e-12));
    }
}

TEST_CASE("make_model freezes derived constants and validates hypotheses") {
    ModelSpec s;
    s.N = 3;
    s.perturbation = {SourceShape::power, DampingShape::sine, 0.1, 2.5};
    const auto m = make_model(s);
    CHECK(m.p == 3.0);
    CHECK(m.gamma == Approx(0.25));
    CHECK(m.kappa == Approx(std::sqrt(2.0)));
    CHECK(m.alpha == 0.0);
    CHECK(m.scaling == Approx(1.0));

    auto bad = s;
    bad.perturbation.q = 3.0;
    CHECK_THROWS_AS(make_model(bad), ConfigError);
    bad = s;
    bad.p = 4.0;
    CHECK_THROWS_AS(make_model(bad), ConfigError);
    bad = s;
    bad.eta = 1.0;
    CHECK_THROWS_AS(make_model(bad), ConfigError);
    bad = s;
    bad.sigma = -1;
    CHECK_THROWS_AS(make_model(bad), ConfigError);
    bad = s;
    bad.perturbation.M = -0.1;
    CHECK_THROWS_AS(make_model(bad), ConfigError);
}

TEST_CASE("nonlinearity helpers match the generic power") {
    ModelSpec s;
    const auto m3 = make_model(s);
    s.critical = false;
    s.p = 2.5;
    const auto m25 = make_model(s);
    for (double u : {-2.0, -0.5, 0.0, 1.5}) {
        CHECK(m3.nonlinearity(u) == Approx(u * u * u));
        CHECK(m3.power_p1(u) == Approx(std::pow(std::abs(u), 4.0)));
        CHECK(m25.nonlinearity(u) == Approx(std::copysign(std::pow(std::abs(u), 2.5), u)));
    }
}

TEST_CASE("uniform grids") {
    const auto g = UniformGrid::cell_centred(4);
    CHECK(g.at(0) == Approx(0.125));
    CHECK(g.back() == Approx(0.875));
    const auto v = UniformGrid::vertices(-1, 1, 4);
    CHECK(v.size == 5);
    CHECK(v.spacing == Approx(0.5));
    CHECK(UniformGrid::from_points({0.0, 0.1, 0.2, 0.3}).spacing == Approx(0.1));
    CHECK_THROWS_AS(UniformGrid::from_points({0.0, 0.1, 0.25}), ConfigError);
    CHECK_THROWS_AS(UniformGrid::from_points({0.0}), ConfigError);
}
