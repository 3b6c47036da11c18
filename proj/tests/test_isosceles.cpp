#include <doctest.h>

#include <cmath>
#include <numbers>

#include "brakelab/error.hpp"
#include "brakelab/isosceles.hpp"

using namespace brakelab;
using std::numbers::pi;

namespace {

// follows the branch with the full 4D field restricted to r = 0
std::pair<double, double> field_oracle(Branch which, double m3) {
    double ts = iso_theta_star(m3);
    double th0 = which == Branch::gamma ? ts - pi : -ts;
    double vs = std::sqrt(2 * iso_V(th0, m3)), d = 1e-5;
    double th = th0 + d, v = -vs + branch_start_beta(which, m3) * d * d;
    double S = std::sin(th), C = std::cos(th), A = 1 + S * S;
    double w = 2 * std::sqrt(std::max(0.0, 2 * iso_W(th, m3) - v * v * C * C)) / A;
    std::vector<EventSpec<4>> ev(2);
    ev[0].name = "binary line";
    ev[0].g = [](double, const Vec<4>& y) { return y[2] + pi / 2; };
    ev[0].direction = Crossing::rising;
    ev[1].name = "Euler line";
    ev[1].g = [](double, const Vec<4>& y) { return y[2]; };
    ev[1].direction = Crossing::rising;
    ev[1].terminal = true;
    IntegrateOptions<4> io;
    io.tol.rtol = 1e-12;
    io.tol.atol = 1e-14;
    auto tr = integrate<4>([&](double, const Vec<4>& y) { return iso_field(y, m3); }, 0.0, {0, v, th, w}, 1e4, io, ev);
    EventHit<4> a, b;
    double v1 = tr.hit(0, &a) ? a.y[1] : NAN;
    double v2 = tr.hit(1, &b) ? b.y[1] : NAN;
    return {v1, v2};
}

} // namespace

TEST_CASE("branches agree with the full field on the collision manifold") {
    for (double m3 : {0.5, 1.0, 2.0, 3.0}) {
        CAPTURE(m3);
        auto g = trace_branch(Branch::gamma, m3);
        auto gp = trace_branch(Branch::gamma_prime, m3);
        auto [v1, v2] = field_oracle(Branch::gamma, m3);
        auto [unused, v3] = field_oracle(Branch::gamma_prime, m3);
        (void)unused;
        CHECK(std::abs(g.v1 - v1) < 1e-6);
        CHECK(std::abs(g.v2 - v2) < 1e-6);
        CHECK(std::abs(gp.v3 - v3) < 1e-6);
    }
}

TEST_CASE("branch traces at m3 = 1") {
    auto g = trace_branch(Branch::gamma, 1.0);
    auto gp = trace_branch(Branch::gamma_prime, 1.0);
    CHECK_FALSE(g.terminated);
    CHECK_FALSE(gp.terminated);
    CHECK(gp.v3 <= -1.3);
    CHECK(g.v1 < 0);
    CHECK(g.v1 >= -std::sqrt(3.0));
    CHECK(g.v2 > 0);
    CHECK(g.v_3pi4 <= -1.6);
    CHECK(g.v1 - g.v_3pi4 <= 1.56);
    for (const auto* b : {&g, &gp}) {
        CHECK(b->monotone);
        CHECK(b->max_domain_excess < 1e-9);
        for (std::size_t i = 1; i < b->curve.size(); ++i) {
            CHECK(b->curve[i].first > b->curve[i - 1].first);
            CHECK(b->curve[i].second > b->curve[i - 1].second);
        }
    }
    CHECK(g.v_start == doctest::Approx(-std::sqrt(6.0)).epsilon(1e-9));
}

TEST_CASE("branch values are converged in the tolerance") {
    BranchOptions a, b;
    a.tol.rtol = 1e-10;
    b.tol.rtol = 5e-11;
    b.tol.atol = 5e-13;
    auto ga = trace_branch(Branch::gamma, 1.0, a), gb = trace_branch(Branch::gamma, 1.0, b);
    CHECK(std::abs(ga.v1 - gb.v1) < 1e-8);
    CHECK(std::abs(ga.v2 - gb.v2) < 1e-8);
}

TEST_CASE("admissibility flags") {
    CHECK(admissible(1.0).admissible);
    CHECK(admissible(0.3).admissible);
    auto three = admissible(3.0);
    CHECK_FALSE(three.admissible);
    CHECK_FALSE(three.reason.empty());
    auto scan = admissibility_scan({0.5, 1.0, 2.0, 3.0, 4.0});
    CHECK(scan.size() == 5);
    CHECK(scan[0].admissible);
    CHECK(scan[2].admissible);
    CHECK_FALSE(scan[4].admissible);
    CHECK_THROWS_AS(admissibility_threshold(1.0, 2.0), Error);
}

TEST_CASE("reflections") {
    IsoSegment seg;
    for (int i = 0; i < 20; ++i) {
        double s = 0.1 * i;
        seg.s.push_back(s);
        seg.y.push_back({1 + s, -0.5 + 0.3 * s, -1.7 + 0.05 * s, 0.8 - 0.1 * s, 0.2 * s});
    }
    for (auto kind : {Reflection::spatial, Reflection::reversing}) {
        auto twice = reflect_orbit(reflect_orbit(seg, -pi / 2, kind, 1.0), -pi / 2, kind, 1.0);
        REQUIRE(twice.s.size() == seg.s.size());
        for (std::size_t i = 0; i < seg.s.size(); ++i) {
            CHECK(std::abs(twice.s[i] - seg.s[i]) < 1e-14);
            for (int c = 0; c < 5; ++c) CHECK(std::abs(twice.y[i][c] - seg.y[i][c]) < 1e-14);
        }
    }
    auto sp = reflect_orbit(seg, -pi / 2, Reflection::spatial);
    for (std::size_t i = 0; i < seg.s.size(); ++i) {
        CHECK(sp.y[i][1] == seg.y[i][1]);
        CHECK(sp.y[i][2] + seg.y[i][2] == doctest::Approx(-pi));
    }
}

TEST_CASE("periodic brake orbit at m3 = 1") {
    auto ps = find_periodic_brake(1.0, 60);
    REQUIRE_FALSE(ps.orbits.empty());
    double ts = iso_theta_star(1.0);
    for (const auto& o : ps.orbits) {
        CHECK(o.theta0 > ts - pi);
        CHECK(o.theta0 < -pi / 2);
        CHECK(std::abs(o.v_second) < 1e-10);
        CHECK(o.v_first < 0);
        CHECK(o.closure_error < 1e-6);
        CHECK(o.assembled_closure < 1e-6);
        CHECK(o.junction_error < 1e-8);
        CHECK(newtonian_quarter_check(o) < 1e-5);
        CHECK(segment_residual(o.quarter, 1.0) < 1e-4);
    }
    auto period = assemble_period(ps.orbits.front());
    CHECK(period.s.back() == doctest::Approx(4 * ps.orbits.front().T2).epsilon(1e-9));
}
