#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "blowup/quadrature.hpp"

using namespace blowup;
using Catch::Approx;

constexpr double pi = std::numbers::pi;

namespace {

std::vector<double> field(const UniformGrid& g, double (*f)(double)) {
    std::vector<double> v(g.size);
    for (std::size_t i = 0; i < g.size; ++i) v[i] = f(g.at(i));
    return v;
}

double one(double) { return 1.0; }
double r2(double r) { return r * r; }
double smooth(double r) { return std::cos(2.0 * r); }

} // namespace

TEST_CASE("closed-form ball integrals") {
    const auto g = UniformGrid::cell_centred(1024);
    CHECK(ball_quadrature(g, field(g, one), 3, 0.0) == Approx(4 * pi / 3).margin(1e-4));
    CHECK(ball_quadrature(g, field(g, one), 2, 1.0) == Approx(pi / 2).margin(1e-4));
    CHECK(ball_quadrature(g, field(g, r2), 2, 0.0) == Approx(pi / 2).margin(1e-4));
    // singular weight: ∫ (1-r²)^{-1/2} 2πr dr = 2π
    CHECK(ball_quadrature(g, field(g, one), 2, 0.5, true) == Approx(2 * pi).margin(1e-10));
}

TEST_CASE("cell moments sum to the Beta-function total") {
    for (int N : {2, 3, 5})
        for (double e : {-0.5, 0.0, 0.5, 1.5}) {
            const auto W = ball_cell_weights(UniformGrid::cell_centred(37), N, e);
            double sum = 0.0;
            for (double w : W) sum += w;
            const double total = 0.5 * sphere_area(N) * std::tgamma(0.5 * N) * std::tgamma(e + 1) / std::tgamma(0.5 * N + e + 1);
            CHECK(sum == Approx(total).epsilon(1e-12));
        }
}

TEST_CASE("second-order convergence on smooth integrands") {
    // exact: 2π ∫_0^1 cos(2r)(1-r²)^{1/2} r dr by a fine midpoint rule after r = sin φ
    const int n = 200000;
    double ref = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ph = (i + 0.5) * (pi / 2) / n;
        ref += std::cos(2 * std::sin(ph)) * std::cos(ph) * std::cos(ph) * std::sin(ph);
    }
    ref *= 2 * pi * (pi / 2) / n;
    auto err = [&](std::size_t cells) {
        const auto g = UniformGrid::cell_centred(cells);
        return std::abs(ball_quadrature(g, field(g, smooth), 2, 0.5) - ref);
    };
    // the (1-r²)^{1/2} edge adds an h^{5/2} term, so measure on fine grids
    const double e1 = err(256), e2 = err(512), e3 = err(1024);
    CHECK(std::log2(e1 / e2) == Approx(2.0).margin(0.2));
    CHECK(std::log2(e2 / e3) == Approx(2.0).margin(0.2));
}

TEST_CASE("product rule beats the plain midpoint rule on singular weights") {
    const auto g = UniformGrid::cell_centred(256);
    const auto f = field(g, one);
    const double exact = 2 * pi;
    CHECK(std::abs(ball_quadrature(g, f, 2, 0.5, true) - exact) <
          0.01 * std::abs(ball_quadrature_plain(g, f, 2, 0.5, true) - exact));
}

TEST_CASE("quadrature preconditions") {
    const auto g = UniformGrid::cell_centred(8);
    CHECK_THROWS_AS(ball_cell_weights(g, 3, -1.0), DomainError);
    CHECK_THROWS_AS(ball_cell_weights(UniformGrid{0.5, 0.25, 4}, 3, 0.0), DomainError);
    std::vector<double> short_field(3, 1.0);
    CHECK_THROWS_AS(ball_integral(g, short_field, 3, 0.0), DomainError);
}
