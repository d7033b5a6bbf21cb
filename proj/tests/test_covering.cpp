#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "blowup/covering.hpp"

using namespace blowup;
using namespace blowup::covering;
using Catch::Approx;

TEST_CASE("slanted surface") {
    CHECK(t_star<1>({0.3}, {0.3}, 2.0, 0.0, 0.5) == 2.0);
    CHECK(t_star<1>({1.0}, {0.0}, 3.0, 0.0, 0.5) == Approx(2.5));
    CHECK(t_star<1>({4.0}, {0.0}, 3.0, 1.0, 0.5) == Approx(1.0));
    CHECK(t_star<2>({0.6, 0.8}, {0.0, 0.0}, 3.0, 0.0, 0.5) == Approx(2.5));
    CHECK_THROWS_AS(t_star<1>({5.0}, {0.0}, 3.0, 1.0, 0.5), DomainError);
    CHECK_THROWS_AS(t_star<1>({0.0}, {0.0}, 3.0, 1.0, 1.0), DomainError);
}

TEST_CASE("slice membership") {
    const SliceDescriptor<1> s{{0.0}, 1.0, 0.0, 0.5};
    CHECK(slice_contains<1>({0.0}, 0.0, s));
    CHECK_FALSE(slice_contains<1>({0.0}, 1.0 - 0.5 * std::exp(-10.0), s));
    CHECK(slice_contains<1>({2.0}, 0.0, s)); // lateral boundary, closed
    CHECK_FALSE(slice_contains<1>({2.0 + 1e-9}, 0.0, s));
    CHECK_FALSE(slice_contains<1>({0.0}, -1e-12, s));
}

TEST_CASE("cones and truncated domains") {
    const ConeDescriptor<1> c{{0.0}, 1.0, 0.5};
    CHECK_FALSE(c.contains({0.0}, 1.0));
    CHECK(c.contains({1.0}, 0.5));
    CHECK_FALSE(c.contains({1.0}, 0.6));
    CHECK(domain_contains<1>({0.5}, 0.5, {0.0}, 1.0, 0.2, 0.5));
    CHECK_FALSE(domain_contains<1>({0.0}, 1.0, {0.0}, 1.0, 0.2, 0.5));
    CHECK_FALSE(domain_contains<1>({0.5}, 0.1, {0.0}, 1.0, 0.2, 0.5));
}

TEST_CASE("cover count is scale invariant") {
    for (double d0 : {0.2, 0.5, 0.8}) {
        const auto k1 = cover_slice<1>({0.0}, 1.0, 0.0, d0).k;
        const auto k2 = cover_slice<2>({0.0, 0.0}, 1.0, 0.0, d0).k;
        for (double h : {0.25, 2.0, 4.0}) {
            CHECK(cover_slice<1>({3.0}, 1.0 + h, 1.0, d0).k == k1);
            CHECK(cover_slice<2>({3.0, -2.0}, 1.0 + h, 1.0, d0).k == k2);
        }
    }
    CHECK_THROWS_AS(cover_slice<1>({0.0}, 1.0, 1.0, 0.5), DomainError);
}

TEST_CASE("sub-slices cover the parent slice") {
    const double d0 = 0.5, T = 2.0, t1 = 0.5;
    const auto c = cover_slice<1>({0.0}, T, t1, d0);
    const SliceDescriptor<1> parent{{0.0}, T, t1, 1.0};
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::size_t tested = 0, missed = 0;
    while (tested < 100000) {
        const double tau = t1 + U(rng) * (parent.top() - t1);
        const double x = (2 * U(rng) - 1) * parent.radius_at(tau);
        if (!slice_contains<1>({x}, tau, parent)) continue;
        ++tested;
        bool hit = false;
        for (const auto& s : c.slices) hit = hit || slice_contains<1>({x}, tau, s);
        missed += hit ? 0 : 1;
    }
    CHECK(missed == 0);
}

TEST_CASE("sub-slice tops satisfy the time sandwich") {
    for (double d0 : {0.2, 0.5, 0.8}) {
        const double T = 3.0, t1 = 1.0, h = T - t1;
        const auto c = cover_slice<2>({0.0, 0.0}, T, t1, d0);
        for (const auto& s : c.slices) {
            CHECK(s.T - t1 >= (1 - d0) * h - 1e-12);
            CHECK(s.T - t1 <= (1 + d0) * h + 1e-12);
            for (double t = t1; t <= s.top(); t += 0.05 * (s.T - t1)) {
                CHECK(s.T - t >= std::exp(-10.0) * (1 - d0) * (T - t) - 1e-12);
                CHECK(s.T - t <= std::exp(10.0) * (1 + d0) * (T - t) + 1e-12);
            }
        }
    }
}

TEST_CASE("inclusion checks") {
    const auto c1 = check_inclusions<1>({0.0}, 1.0, 0.0, 0.5, 100, 100, 7, {{0.0}, {2.0}, {-2.0}});
    CHECK(c1.passed());
    CHECK(c1.metrics.at("points") >= 10000);
    const auto c2 = check_inclusions<2>({0.1, 0.2}, 2.0, 0.5, 0.3, 100, 100, 8);
    CHECK(c2.passed());
}

TEST_CASE("cover inequality") {
    const Vec<1> x0{0.0};
    auto zero = [](const Vec<1>&, double) { return 0.0; };
    const auto z = verify_cover_inequality<1>(zero, 1.0, 2.0, x0, 1.0, 0.0, 0.5, {48, 48, 9});
    CHECK(z.passed());
    CHECK(z.lhs == 0.0);

    // f ≡ 1, κ = 0, q = 1: both sides are areas of triangles; the slope-1 slice
    // has area (T-t1)² (1 - e^{-20}), the half-width one half of it
    auto one = [](const Vec<1>&, double) { return 1.0; };
    const auto a = verify_cover_inequality<1>(one, 0.0, 1.0, x0, 1.0, 0.0, 0.5, {400, 400, 3});
    CHECK(a.passed());
    CHECK(a.metrics.at("C") == a.metrics.at("k"));
    CHECK(a.lhs == Approx(1.0).epsilon(0.02));
    CHECK(a.rhs / a.metrics.at("C") == Approx(0.5).epsilon(0.02));

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double c = U(rng) - 0.5, v = 2 * U(rng) - 1;
        auto gauss = [=](const Vec<1>& x, double t) { return std::exp(-(x[0] - c - v * t) * (x[0] - c - v * t) / 0.1); };
        const auto r = verify_cover_inequality<1>(gauss, 1.0, 2.0, {U(rng) - 0.5}, 0.5 + U(rng), 0.0, 0.15 + 0.7 * U(rng),
                                                  {64, 64, 11});
        CHECK(r.passed());
    }
    CHECK_THROWS_AS(verify_cover_inequality<1>(one, -1.0, 1.0, x0, 1.0, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(verify_cover_inequality<1>(one, 1.0, 0.5, x0, 1.0, 0.0, 0.5), DomainError);
}

TEST_CASE("cover constant") {
    const double k = static_cast<double>(cover_slice<1>({0.0}, 1.0, 0.0, 0.5).k);
    CHECK(cover_constant<1>(0.5, 0.0) == k);
    CHECK(cover_constant<1>(0.5, 1.0) == Approx(k * std::exp(10.0) / 0.5));
}
