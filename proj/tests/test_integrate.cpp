#include <doctest.h>

#include <cmath>
#include <numbers>

#include "brakelab/error.hpp"
#include "brakelab/dynamics.hpp"
#include "brakelab/syzygy_map.hpp"
#include "brakelab/trajectory.hpp"

using namespace brakelab;
using std::numbers::pi;

namespace {

Vec<2> harmonic(double, const Vec<2>& y) { return {y[1], -y[0]}; }

Vec<4> kepler(double, const Vec<4>& y) {
    double r3 = std::pow(y[0] * y[0] + y[1] * y[1], 1.5);
    return {y[2], y[3], -y[0] / r3, -y[1] / r3};
}

double harmonic_error(double rtol) {
    IntegrateOptions<2> io;
    io.tol.rtol = rtol;
    io.tol.atol = rtol * 1e-2;
    auto tr = integrate<2>(harmonic, 0.0, {1.0, 0.0}, 2 * pi, io);
    return std::hypot(tr.y_end()[0] - 1, tr.y_end()[1]);
}

// eccentricity 0.5, period 2 pi
double kepler_error(double rtol) {
    IntegrateOptions<4> io;
    io.tol.rtol = rtol;
    io.tol.atol = rtol * 1e-2;
    double e = 0.5;
    Vec<4> y0{1 - e, 0, 0, std::sqrt((1 + e) / (1 - e))};
    auto tr = integrate<4>(kepler, 0.0, y0, 2 * pi, io);
    double d = 0;
    for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(tr.y_end()[i] - y0[i]));
    return d;
}

} // namespace

TEST_CASE("harmonic period endpoint") {
    CHECK(harmonic_error(1e-10) < 1e-9);
}

TEST_CASE("error tracks the tolerance") {
    // a 5(4) pair with local error control gives global error roughly proportional to the tolerance
    for (auto f : {harmonic_error, kepler_error}) {
        double e1 = f(1e-6), e2 = f(1e-9);
        CHECK(e2 < e1);
        double slope = std::log10(e1 / e2) / 3;
        CHECK(slope > 0.7);
        CHECK(slope < 1.3);
    }
}

TEST_CASE("dense output is accurate between steps") {
    IntegrateOptions<2> io;
    io.keep_dense = true;
    auto tr = integrate<2>(harmonic, 0.0, {1.0, 0.0}, 10.0, io);
    double worst = 0;
    for (int k = 0; k <= 1000; ++k) {
        double t = 10.0 * k / 1000;
        auto y = tr.at(t);
        worst = std::max({worst, std::abs(y[0] - std::cos(t)), std::abs(y[1] + std::sin(t))});
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("events are located and terminal events stop") {
    IntegrateOptions<2> io;
    std::vector<EventSpec<2>> ev(2);
    ev[0].name = "y0 falls through 0";
    ev[0].g = [](double, const Vec<2>& y) { return y[0]; };
    ev[0].direction = Crossing::falling;
    ev[1].name = "y1 rises through 0";
    ev[1].g = [](double, const Vec<2>& y) { return y[1]; };
    ev[1].direction = Crossing::rising;
    ev[1].terminal = true;
    auto tr = integrate<2>(harmonic, 0.0, {1.0, 0.0}, 100.0, io, ev);
    EventHit<2> a, b;
    REQUIRE(tr.hit(0, &a));
    REQUIRE(tr.hit(1, &b));
    CHECK(a.t == doctest::Approx(pi / 2).epsilon(1e-10));
    CHECK(b.t == doctest::Approx(pi).epsilon(1e-10));
    CHECK(tr.reason == StopReason::terminal_event);
    CHECK(tr.t_end() == doctest::Approx(pi).epsilon(1e-10));
}

TEST_CASE("syzygy event is refined onto the collinear circle") {
    auto mp = derive_mass_params(1, 1, 1);
    for (auto p : {std::array<double, 2>{0.3, 0.2}, std::array<double, 2>{-0.4, 0.3}, std::array<double, 2>{0.5, -0.1}}) {
        auto rec = first_syzygy(p[0], p[1], mp, 1.0);
        REQUIRE_FALSE(rec.collision);
        CHECK(std::abs(1 - rec.state.x * rec.state.x - rec.state.y * rec.state.y) < 1e-12);
    }
}

TEST_CASE("backward integration from an event recovers the start") {
    auto mp = derive_mass_params(1, 1, 1);
    auto rec = first_syzygy(0.3, 0.2, mp, 1.0);
    auto start = brake_lift(0.3, 0.2, mp, 1.0).arr();
    IntegrateOptions<6> io;
    auto tr = integrate<6>([&](double, const Vec<6>& y) { return blowup_field(y, mp, 1.0); }, rec.s0,
                           rec.state.arr(), 0.0, io);
    double d = 0;
    for (int i = 0; i < 6; ++i) d = std::max(d, std::abs(tr.y_end()[i] - start[i]));
    CHECK(d < 1e-8);
}

TEST_CASE("energy along blow-up trajectories") {
    auto mp = derive_mass_params(1, 2, 10);
    auto tr = integrate_brake(-0.3, 0.4, mp, 1.0, 1.0, 101);
    CHECK(tr.max_energy_residual < 1e-9);
    CHECK(tr.samples.size() == 101);
    CHECK(tr.samples.back().t == doctest::Approx(1.0).epsilon(1e-12));
}
