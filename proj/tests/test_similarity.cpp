#include "catch_amalgamated.hpp"

#include <cmath>

#include "blowup/similarity.hpp"

using namespace blowup;
using Catch::Approx;

namespace {

RadialSnapshot ode_snapshot(const UniformGrid& g, double p, double T, double t) {
    RadialSnapshot s;
    s.grid = g;
    s.t = t;
    s.u.assign(g.size, ode_reference(p, T, t));
    s.ut.assign(g.size, ode_reference_rate(p, T, t));
    return s;
}

double max_dev(const std::vector<double>& v, double target) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x - target));
    return m;
}

} // namespace

TEST_CASE("s and t correspondence") {
    CHECK(time_of_s(-std::log(2.0), 2.0) == 0.0);
    CHECK(s_of_time(0.5, 1.0) == Approx(std::log(2.0)));
    CHECK_THROWS_AS(s_of_time(1.0, 1.0), DomainError);
}

TEST_CASE("exact ODE profile is stationary") {
    const UniformGrid g{0.0, 0.01, 111};
    const auto st = to_similarity(ode_snapshot(g, 3, 1, 0.7), 0.0, 1.0, 3.0, 256);
    CHECK(max_dev(st.w, std::sqrt(2.0)) < 1e-12);
    CHECK(max_dev(st.ws, 0.0) < 1e-12);
    CHECK(max_dev(st.wy, 0.0) < 1e-12);
    CHECK(st.s == Approx(-std::log(0.3)));
}

TEST_CASE("zero field maps to zero") {
    const UniformGrid g{0.0, 0.01, 111};
    RadialSnapshot z;
    z.grid = g;
    z.t = 0.5;
    z.u.assign(g.size, 0.0);
    z.ut.assign(g.size, 0.0);
    const auto st = to_similarity(z, 0.0, 1.0, 3.0, 64);
    CHECK(max_dev(st.w, 0.0) == 0.0);
    CHECK(max_dev(st.ws, 0.0) == 0.0);
}

TEST_CASE("frame preconditions") {
    const UniformGrid g{0.0, 0.01, 111};
    CHECK_THROWS_AS(to_similarity(ode_snapshot(g, 3, 2, 1.0), 0.0, 1.0, 3.0, 64), DomainError);
    CHECK_THROWS_AS(to_similarity(ode_snapshot(g, 3, 2, 0.5), 0.3, 1.0, 3.0, 64), FrameError);
    // cone radius 1 needs r up to 0.5 at tau = 0.5; grid only reaches 0.3
    CHECK_THROWS(to_similarity(ode_snapshot(UniformGrid{0.0, 0.01, 31}, 3, 2, 0.5), 0.0, 1.0, 3.0, 64));
}

TEST_CASE("round trip through similarity variables") {
    const double p = 3.0, T0 = 1.0;
    const UniformGrid g{0.0, 1e-3, 1101};
    RadialSnapshot snap;
    snap.grid = g;
    snap.t = 0.4;
    for (std::size_t i = 0; i < g.size; ++i) {
        const double r = g.at(i);
        snap.u.push_back(std::exp(-r * r) + 0.5);
        snap.ut.push_back(std::cos(2.0 * r));
    }
    const auto st = to_similarity(snap, 0.0, T0, p, 128);
    const auto back = from_similarity(st);
    CHECK(back.t == Approx(0.4));
    CHECK(back.grid.spacing == Approx(0.6 / 128));
    for (std::size_t j = 0; j < back.u.size(); ++j) {
        const double r = back.grid.at(j);
        CHECK(back.u[j] == Approx(std::exp(-r * r) + 0.5).epsilon(1e-10));
        CHECK(back.ut[j] == Approx(std::cos(2.0 * r)).epsilon(1e-10));
    }
    // a cell-centred physical grid is accepted as well
    const auto again = to_similarity(back, 0.0, 0.7, p, 64);
    CHECK(again.size() == 64);

    WState k = constant_wstate(16, std::sqrt(2.0), 0.0, p, 1.0);
    k.T0 = T0;
    const auto ode = from_similarity(k);
    for (double u : ode.u) CHECK(u == Approx(ode_reference(p, T0, ode.t)));
}

TEST_CASE("y scales inversely with T0 - t") {
    WState a = constant_wstate(8, 1.0, 0.0, 3.0, 0.0);
    WState b = a;
    b.s = -std::log(2.0);
    const auto sa = from_similarity(a), sb = from_similarity(b);
    CHECK(sb.grid.spacing == Approx(2.0 * sa.grid.spacing));
}

TEST_CASE("wrong blow-up time drifts w away from kappa") {
    const UniformGrid g{0.0, 0.01, 200};
    const double k = std::sqrt(2.0);
    // frame placed before the true blow-up time: w decays
    auto early = to_similarity(ode_snapshot(g, 3, 1.0, 0.9), 0.0, 0.95, 3.0, 64);
    CHECK(early.w[0] < k);
    // frame placed after it: w grows
    auto late = to_similarity(ode_snapshot(g, 3, 1.0, 0.9), 0.0, 1.2, 3.0, 64);
    CHECK(late.w[0] > k);
}

TEST_CASE("sample_frames") {
    const UniformGrid g{0.0, 0.01, 111};
    Trajectory tr;
    tr.meta.p = 3.0;
    for (int k = 0; k <= 16; ++k) tr.snapshots.push_back(ode_snapshot(g, 3, 1.0, k / 20.0));
    SECTION("stored times need no interpolation") {
        std::vector<double> s{-std::log(0.8), -std::log(0.4)};
        const auto fr = sample_frames(tr, 0.0, 1.0, s, 64);
        REQUIRE(fr.size() == 2);
        CHECK(max_dev(fr[0].w, std::sqrt(2.0)) < 1e-12);
        CHECK(fr[1].time() == Approx(0.6));
    }
    SECTION("a window apart") {
        std::vector<double> s{0.1, 1.1};
        const auto fr = sample_frames(tr, 0.0, 1.0, s, 64);
        CHECK(fr[0].time() == Approx(1.0 - std::exp(-0.1)));
        CHECK(fr[1].time() == Approx(1.0 - std::exp(-1.1)));
        // cubic interpolation in time of a non-polynomial profile
        CHECK(max_dev(fr[0].w, std::sqrt(2.0)) < 1e-4);
    }
    SECTION("outside the stored range") {
        std::vector<double> s{3.0};
        CHECK_THROWS_AS(sample_frames(tr, 0.0, 1.0, s, 64), FrameError);
    }
}
