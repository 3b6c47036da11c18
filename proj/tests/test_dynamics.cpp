#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "brakelab/error.hpp"
#include "brakelab/dynamics.hpp"
#include "brakelab/trajectory.hpp"

using namespace brakelab;
using std::numbers::pi;

namespace {

double vnorm(const Vec<6>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// v from the energy relation, negative root
std::optional<double> solve_v(double r, double x, double y, double xp, double yp, const MassParams& mp, double h) {
    auto e = shape_potential(x, y, mp);
    double rad = 2 * (e.V - r * h - 0.5 * e.kappa * (xp * xp + yp * yp));
    if (rad < 0) return std::nullopt;
    return -std::sqrt(rad);
}

} // namespace

TEST_CASE("restpoint and brake examples") {
    auto mp = derive_mass_params(1, 1, 1);
    Vec<6> L{0, -std::sqrt(2 * 3.0), 0, 0, 0, 0};
    CHECK(vnorm(blowup_field(L, mp, 1)) < 1e-14);

    for (auto p : {std::array<double, 2>{0.3, 0.2}, std::array<double, 2>{-0.5, 0.1}}) {
        auto s = brake_lift(p[0], p[1], mp, 1.0);
        auto e = shape_potential(p[0], p[1], mp);
        CHECK(s.r == doctest::Approx(e.V).epsilon(1e-15));
        CHECK(energy_residual(s, mp, 1.0) == 0);
        CHECK(blowup_field(s.arr(), mp, 1.0)[1] == doctest::Approx(-e.V).epsilon(1e-15));
    }
    CHECK(brake_lift(0, 0, mp, 1.0).r == doctest::Approx(3).epsilon(1e-15));
    CHECK(brake_lift(0, 0, mp, 2.0).r == doctest::Approx(1.5).epsilon(1e-15));
    for (double a : {pi / 3, pi, -pi / 3}) {
        double rho = 0.999999;
        auto s = brake_lift(rho * std::cos(a), rho * std::sin(a), mp, 1.0);
        CHECK(s.r == doctest::Approx(shape_potential(std::cos(a), std::sin(a), mp).V).epsilon(1e-5));
    }
    CHECK_THROWS_AS(brake_lift(0.3, 0.2, mp, -1), Error);
    CHECK_THROWS_AS(brake_lift(1.2, 0, mp, 1), Error);
}

TEST_CASE("energy residual is first order in a perturbation") {
    auto mp = derive_mass_params(1, 2, 10);
    auto s = brake_lift(0.2, -0.3, mp, 1.0);
    for (double eps : {1e-4, 1e-6}) {
        auto t = s;
        t.r += eps;
        CHECK(energy_residual(t, mp, 1.0) == doctest::Approx(eps).epsilon(1e-8));
    }
}

TEST_CASE("syzygy diagnostics") {
    auto mp = derive_mass_params(1, 1, 1);
    ReducedState col{2.0, -1.0, std::cos(0.7), std::sin(0.7), 0.1, -0.2};
    CHECK(std::abs(syzygy_diagnostic(col, mp, 1).z) < 1e-15);

    auto b = brake_lift(0.3, 0.2, mp, 1.0);
    auto d = syzygy_diagnostic(b, mp, 1.0);
    CHECK(d.p1 == 0);
    CHECK(d.Idot == 0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int i = 0; i < 200; ++i) {
        ReducedState s{0.5, -1.0, u(rng) * 0.7, u(rng) * 0.7, u(rng), u(rng)};
        CHECK(syzygy_diagnostic(s, mp, 1.0).F1 > 0);
    }
}

TEST_CASE("z is concave at critical points") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        int tested = 0;
        while (tested < 500) {
            double x = u(rng), y = u(rng);
            double z = 1 - x * x - y * y;
            if (z <= 0.01 || z >= 0.99) continue;
            double k = u(rng);
            double xp = -y * k, yp = x * k; // x x' + y y' = 0
            auto e = shape_potential(x, y, mp);
            double r = std::abs(u(rng)) * e.V;
            auto v = solve_v(r, x, y, xp, yp, mp, 1.0);
            if (!v) continue;
            ReducedState s{r, *v, x, y, xp, yp};
            CHECK(z_second_derivative(s, mp, 1.0) < 0);
            ++tested;
        }
    }
}

TEST_CASE("triple collision manifold is invariant") {
    auto mp = derive_mass_params(1, 2, 10);
    auto v = solve_v(0, 0.3, 0.1, 0.2, -0.1, mp, 1.0);
    REQUIRE(v);
    Vec<6> y0{0, *v, 0.3, 0.1, 0.2, -0.1};
    IntegrateOptions<6> io;
    auto tr = integrate<6>([&](double, const Vec<6>& y) { return blowup_field(y, mp, 1.0); }, 0.0, y0, 3.0, io);
    for (const auto& y : tr.y) CHECK(y[0] == 0.0);
}

TEST_CASE("energy drift along blow-up arcs") {
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        auto tr = integrate_brake(0.3, 0.2, mp, 1.0, 0.5, 51);
        CHECK(tr.max_energy_residual < 1e-9);
        double worst = 0;
        for (std::size_t i = 1; i < tr.samples.size(); ++i) {
            double ds = std::max(1.0, tr.samples[i].s);
            worst = std::max(worst, std::abs(tr.samples[i].energy_residual) / ds);
        }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("equilateral brake start collapses homothetically") {
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        ShapePoint p{3.0, 0, 0, std::nullopt};
        auto j = shape_to_jacobi(p, mp);
        auto f = newtonian_field(pack(j), mp);
        cplx a1{f[4], f[5]}, a2{f[6], f[7]};
        cplx c1 = a1 / j.xi1, c2 = a2 / j.xi2;
        CHECK(std::abs(c1.imag()) < 1e-12 * std::abs(c1));
        CHECK(c1.real() < 0);
        CHECK(std::abs(c1 - c2) < 1e-12 * std::abs(c1));
    }
}

TEST_CASE("reduced flow matches the unreduced problem") {
    auto mp = derive_mass_params(1, 1, 1);
    for (auto p : {std::array<double, 2>{0.3, 0.2}, std::array<double, 2>{-0.4, -0.5}, std::array<double, 2>{0.1, 0.7}}) {
        auto oc = compare_with_newtonian(p[0], p[1], mp, 1.0, 1.0, 21);
        CHECK(oc.max_dev < 1e-6);
        CHECK(std::abs(oc.angular_momentum) < 1e-12);
        CHECK(std::abs(oc.newtonian_energy_drift) < 1e-9);
    }
}

TEST_CASE("isosceles potential") {
    for (double m3 : {0.2, 1.0, 3.0, 50.0}) {
        CHECK(iso_W(pi / 2, m3) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
        CHECK(iso_W(-pi / 2, m3) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
        double th = 0.37, d = 1e-6;
        CHECK(iso_Wp(th, m3) == doctest::Approx((iso_W(th + d, m3) - iso_W(th - d, m3)) / (2 * d)).epsilon(1e-8));
    }
    double ts = iso_theta_star(1.0);
    CHECK(ts == doctest::Approx(std::asin(std::sqrt(2.0) - 1)).epsilon(1e-14));
    CHECK(std::sqrt(2 * iso_V(ts, 1.0)) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-13));
    CHECK(iso_V(0, 1.0) == doctest::Approx(5 / std::sqrt(2.0)).epsilon(1e-14));
    // theta* is a critical point of V
    for (double m3 : {0.3, 1.0, 4.0}) {
        double t = iso_theta_star(m3), d = 1e-5;
        CHECK(std::abs(iso_V(t + d, m3) - iso_V(t - d, m3)) / (2 * d) < 1e-6);
    }
}

TEST_CASE("collision-manifold slope") {
    double m3 = 1.0;
    for (double th : {-2.5, -1.0, 0.0, 0.4}) {
        double vmax = std::sqrt(2 * iso_V(th, m3));
        CHECK(collision_slope(th, vmax, m3) == doctest::Approx(0).epsilon(1e-6));
        CHECK(collision_slope(th, -0.3 * vmax, m3) >= 0);
        CHECK_THROWS_AS(collision_slope(th, 1.01 * vmax, m3), Error);
    }
    CHECK(collision_slope(0, 0, m3) == doctest::Approx(std::sqrt(5 * std::sqrt(2.0))).epsilon(1e-14));

    // slope equals v'/theta' of the field restricted to r = 0
    for (double m3b : {0.5, 1.0, 3.0})
        for (double th : {-2.0, -1.2, -0.3, 0.2}) {
            double v = -0.4 * std::sqrt(2 * iso_V(th, m3b));
            double S = std::sin(th), C = std::cos(th), A = 1 + S * S;
            double w = 2 * std::sqrt(2 * iso_W(th, m3b) - v * v * C * C) / A;
            auto f = iso_field({0, v, th, w}, m3b);
            CHECK(std::abs(iso_energy({0, v, th, w}, m3b)) < 1e-12);
            CHECK(collision_slope(th, v, m3b) == doctest::Approx(f[1] / f[2]).epsilon(1e-12));
        }
}

TEST_CASE("isosceles lift agrees with the planar Jacobi map") {
    double m3 = 1.0;
    auto mp = derive_mass_params(1, 1, m3);
    Vec<4> s{2.0, -0.3, -0.8, 0.0};
    double C = std::cos(s[2]);
    s[3] = 0; // brake point: r = V
    s[0] = iso_V(s[2], m3);
    s[1] = 0;
    CHECK(std::abs(iso_energy(s, m3)) < 1e-12 * s[0]);
    auto j = iso_to_jacobi(s, m3);
    CHECK(std::sqrt(mass_norm2(j.xi1, j.xi2, mp)) == doctest::Approx(s[0]).epsilon(1e-12));
    (void)C;
    CHECK(std::abs(j.xi1.imag()) < 1e-15);
    CHECK(std::abs(j.xi2.real()) < 1e-15);
}

TEST_CASE("tau star") {
    for (double h : {0.5, 1.0, 3.0}) {
        CHECK(tau_star(derive_mass_params(1, 1, 1), h) == doctest::Approx(std::pow(4 * h, -1.5)).epsilon(1e-14));
        auto mp = derive_mass_params(1, 2, 10);
        CHECK(tau_star(mp, h) == doctest::Approx(tau_star(mp, 1.0) * std::pow(h, -1.5)).epsilon(1e-14));
        CHECK(tau_star(derive_mass_params(10, 2, 1), h) == tau_star(derive_mass_params(1, 10, 2), h));
    }
}

TEST_CASE("p1 evolves as -F1 z along the flow") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        for (int i = 0; i < 20; ++i) {
            ReducedState s{0.4, 0.3, u(rng), u(rng), u(rng), u(rng)};
            auto a = s.arr();
            auto f = blowup_field(a, mp, 1.0);
            const double eps = 1e-6;
            Vec<6> ap, am;
            for (int k = 0; k < 6; ++k) {
                ap[k] = a[k] + eps * f[k];
                am[k] = a[k] - eps * f[k];
            }
            double dp = (syzygy_diagnostic(ReducedState::from(ap), mp, 1.0).p1 -
                         syzygy_diagnostic(ReducedState::from(am), mp, 1.0).p1) /
                        (2 * eps) / std::pow(s.r, 1.5);
            auto d = syzygy_diagnostic(s, mp, 1.0);
            CHECK(dp == doctest::Approx(-d.F1 * d.z).epsilon(1e-7));
        }
    }
}
