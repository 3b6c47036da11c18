#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "brakelab/error.hpp"
#include "brakelab/potential.hpp"

using namespace brakelab;
using std::numbers::pi;

namespace {

const double s3 = std::sqrt(3.0);

std::vector<std::array<double, 2>> disk_points(std::size_t n, unsigned seed, double rmin = 1e-3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<std::array<double, 2>> pts;
    while (pts.size() < n) {
        double x = u(rng), y = u(rng), r2 = x * x + y * y;
        if (r2 >= 1 || r2 < rmin * rmin) continue;
        bool near = false;
        for (double a : {collision_angle12, collision_angle13, collision_angle23})
            near = near || std::hypot(x - std::cos(a), y - std::sin(a)) < 1e-3;
        if (!near) pts.push_back({x, y});
    }
    return pts;
}

} // namespace

TEST_CASE("mass parameters by hand") {
    auto e = derive_mass_params(1, 1, 1);
    CHECK(e.mu1 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e.mu2 == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(e.nu1 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e.nu2 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(e.lplus - cplx(0, s3 / 2)) < 1e-15);
    CHECK(std::abs(e.lminus - cplx(0, -s3 / 2)) < 1e-15);

    auto u = derive_mass_params(1, 2, 10);
    CHECK(u.nu1 == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(u.nu2 == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(std::abs(u.lplus - cplx(-1.0 / 6, s3 / 2)) < 1e-15);
    CHECK(u.lminus == std::conj(u.lplus));
    CHECK(u.mu1 == doctest::Approx(2.0 / 3));
    CHECK(u.mu2 == doctest::Approx(3.0 * 10 / 13));

    for (double m3 : {0.1, 1.0, 7.0}) CHECK(derive_mass_params(1, 1, m3).mu1 == 0.5);
    CHECK_THROWS_AS(derive_mass_params(1, -1, 1), Error);
    CHECK_THROWS_AS(derive_mass_params(0, 1, 1), Error);
}

TEST_CASE("shape projection examples") {
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        auto w = shape_of(1.0, mp.lplus, mp);
        CHECK(std::abs(w) < 1e-14);
        w = shape_of(0.0, cplx(0.3, -0.2), mp);
        CHECK(std::abs(w - 1.0) < 1e-14);
    }
    auto a = shape_to_sphere(0, 0);
    CHECK(a[0] == 0);
    CHECK(a[1] == 0);
    CHECK(a[2] == doctest::Approx(1));
    auto b = shape_to_sphere(1, 0);
    CHECK(b[0] == doctest::Approx(1));
    CHECK(std::abs(b[2]) < 1e-15);
    for (double t : {0.3, 2.0, -1.2}) CHECK(std::abs(shape_to_sphere(std::cos(t), std::sin(t))[2]) < 1e-15);
}

TEST_CASE("collision shapes sit at the cube roots of unity") {
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}, std::array<double, 3>{5, 0.2, 1}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        // Jacobi pairs with r12 = 0, r13 = 0, r23 = 0
        double M12 = m[0] + m[1];
        cplx q12[3] = {0, 0, 1}, q13[3] = {0, 1, 0}, q23[3] = {1, 0, 0};
        for (auto [q, ang] : {std::pair{q12, collision_angle12}, std::pair{q13, collision_angle13},
                              std::pair{q23, collision_angle23}}) {
            cplx xi1 = q[1] - q[0];
            cplx xi2 = q[2] - (m[0] * q[0] + m[1] * q[1]) / M12;
            auto w = shape_of(xi1, xi2, mp);
            CHECK(std::abs(w - std::polar(1.0, ang)) < 1e-12);
        }
    }
}

TEST_CASE("jacobi round trip, rotation invariance and scaling") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        double worst = 0, worst_inv = 0;
        for (int i = 0; i < 10000; ++i) {
            JacobiState s{{g(rng), g(rng)}, {g(rng), g(rng)}, {}, {}};
            auto p = jacobi_to_shape(s, mp);
            auto back = jacobi_to_shape(shape_to_jacobi(p, mp), mp);
            double sc = std::max(1.0, std::hypot(p.x, p.y));
            worst = std::max({worst, std::abs(back.r - p.r) / p.r, std::abs(back.x - p.x) / sc, std::abs(back.y - p.y) / sc});

            cplx rot = std::polar(1.7, g(rng));
            JacobiState t{s.xi1 * rot, s.xi2 * rot, {}, {}};
            auto q = jacobi_to_shape(t, mp);
            worst_inv = std::max({worst_inv, std::abs(q.r - 1.7 * p.r) / p.r, std::abs(q.x - p.x) / sc, std::abs(q.y - p.y) / sc});

            auto j = shape_to_jacobi(p, mp);
            CHECK(std::sqrt(mass_norm2(j.xi1, j.xi2, mp)) == doctest::Approx(p.r).epsilon(1e-12));
        }
        CHECK(worst < 1e-12);
        CHECK(worst_inv < 1e-12);
    }
}

TEST_CASE("angular momentum examples") {
    auto mp = derive_mass_params(1, 2, 10);
    JacobiState s{{0.4, -0.3}, {1.1, 0.2}, {}, {}};
    CHECK(angular_momentum(s, mp) == 0);
    s.xidot1 = 2.5 * s.xi1;
    s.xidot2 = 2.5 * s.xi2;
    CHECK(std::abs(angular_momentum(s, mp)) < 1e-15);
    s.xidot1 = cplx(0, 1) * s.xi1;
    s.xidot2 = cplx(0, 1) * s.xi2;
    CHECK(angular_momentum(s, mp) == doctest::Approx(mass_norm2(s.xi1, s.xi2, mp)).epsilon(1e-14));
}

TEST_CASE("mutual distances by hand") {
    auto a = mutual_distances(0, 0);
    for (double d : a) CHECK(d == doctest::Approx(1).epsilon(1e-15));
    auto b = mutual_distances(1, 0);
    CHECK(std::abs(b[0]) < 1e-15);
    CHECK(b[1] == doctest::Approx(s3));
    CHECK(b[2] == doctest::Approx(s3));
    auto c = mutual_distances(-0.5, s3 / 2);
    CHECK(std::abs(c[1]) < 1e-15);
    CHECK(c[0] == doctest::Approx(s3));
    CHECK(c[2] == doctest::Approx(s3));
}

TEST_CASE("potential values for equal masses") {
    auto mp = derive_mass_params(1, 1, 1);
    auto o = shape_potential(0, 0, mp);
    CHECK(o.V == doctest::Approx(3).epsilon(1e-14));
    CHECK(o.kappa == doctest::Approx(1).epsilon(1e-15));
    CHECK(shape_potential(-1, 0, mp).V == doctest::Approx(5 / std::sqrt(2.0)).epsilon(1e-14));
    auto c = shape_potential(1, 0, mp);
    CHECK(c.at_collision);
    CHECK(std::isinf(c.V));
}

TEST_CASE("gradient matches central differences") {
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        for (auto p : disk_points(200, 3, 0.05)) {
            const double d = 1e-6;
            auto e = shape_potential(p[0], p[1], mp);
            double fx = (shape_potential(p[0] + d, p[1], mp).V - shape_potential(p[0] - d, p[1], mp).V) / (2 * d);
            double fy = (shape_potential(p[0], p[1] + d, mp).V - shape_potential(p[0], p[1] - d, mp).V) / (2 * d);
            double sc = std::max(1.0, std::hypot(e.Vx, e.Vy));
            CHECK(std::abs(fx - e.Vx) / sc < 1e-6);
            CHECK(std::abs(fy - e.Vy) / sc < 1e-6);
        }
    }
}

TEST_CASE("radial factor") {
    auto mp = derive_mass_params(1, 1, 1);
    CHECK(std::abs(radial_factor(0, 0, mp)) < 1e-14);
    double x = 0.3, y = 0.2, d = 1e-6;
    double g = (shape_potential(x * (1 + d), y * (1 + d), mp).V - shape_potential(x * (1 - d), y * (1 - d), mp).V) /
               (2 * d);
    CHECK(radial_factor(x, y, mp) == doctest::Approx(g / (1 - x * x - y * y)).epsilon(1e-7));

    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mq = derive_mass_params(m[0], m[1], m[2]);
        double worst = 0, phimin = INFINITY;
        for (auto p : disk_points(10000, 11)) {
            auto e = shape_potential(p[0], p[1], mq);
            double phi = radial_factor(p[0], p[1], mq);
            double lhs = p[0] * e.Vx + p[1] * e.Vy, rhs = phi * (1 - p[0] * p[0] - p[1] * p[1]);
            worst = std::max(worst, std::abs(lhs - rhs) / (std::abs(p[0] * e.Vx) + std::abs(p[1] * e.Vy) + 1e-300));
            phimin = std::min(phimin, phi);
        }
        CHECK(worst < 1e-8);
        CHECK(phimin > 0);
    }
}

TEST_CASE("inversion in the collinear circle") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> um(0.1, 10);
    for (int k = 0; k < 5; ++k) {
        auto mp = derive_mass_params(um(rng), um(rng), um(rng));
        for (auto p : disk_points(500, 20 + k, 0.05)) {
            double r2 = p[0] * p[0] + p[1] * p[1];
            double a = shape_potential(p[0], p[1], mp).V, b = shape_potential(p[0] / r2, p[1] / r2, mp).V;
            CHECK(std::abs(a - b) / a < 1e-10);
        }
    }
}

TEST_CASE("mirror symmetry needs m1 = m2") {
    auto eq = derive_mass_params(2, 2, 0.5);
    for (auto p : disk_points(500, 9)) {
        double a = shape_potential(p[0], p[1], eq).V, b = shape_potential(p[0], -p[1], eq).V;
        CHECK(std::abs(a - b) <= 1e-14 * a);
    }
    auto ne = derive_mass_params(1, 2, 0.5);
    double a = shape_potential(0.3, 0.4, ne).V, b = shape_potential(0.3, -0.4, ne).V;
    CHECK(std::abs(a - b) > 1e-3);
}

TEST_CASE("disk minimum at the Lagrange point") {
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        double v0 = shape_potential(0, 0, mp).V;
        int bad = 0;
        for (auto p : disk_points(10000, 13)) bad += !(shape_potential(p[0], p[1], mp).V > v0);
        CHECK(bad == 0);
    }
}

TEST_CASE("collinear central configurations") {
    auto eq = derive_mass_params(1, 1, 1);
    auto cc = collinear_central_configs(eq);
    REQUIRE(cc.size() == 3);
    std::vector<double> want = {pi / 3, pi, -pi / 3};
    for (int i = 0; i < 3; ++i) {
        bool found = false;
        for (double a : want) found = found || std::abs(std::remainder(cc[i].angle - a, 2 * pi)) < 1e-10;
        CHECK(found);
        CHECK(cc[i].V == doctest::Approx(5 / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(std::abs(circle_derivative(cc[i].angle, eq)) < 1e-9);
    }

    auto un = derive_mass_params(1, 2, 10);
    auto cu = collinear_central_configs(un);
    REQUIRE(cu.size() == 3);
    double coll[3] = {collision_angle12, collision_angle13, collision_angle23};
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(circle_derivative(cu[i].angle, un)) < 1e-8);
        for (double c : coll) CHECK(std::abs(std::remainder(cu[i].angle - c, 2 * pi)) > 1e-3);
        for (int j = 0; j < i; ++j) CHECK(std::abs(cu[i].V - cu[j].V) > 1e-6);
    }
    // grid oracle: the unit-circle restriction has its maximum at one of the three points
    double best = -INFINITY;
    for (int k = 0; k < 20000; ++k) {
        double a = -pi + 2 * pi * (k + 0.5) / 20000;
        auto e = shape_potential(std::cos(a), std::sin(a), un);
        if (!e.at_collision && std::isfinite(e.V)) best = std::max(best, -e.V);
    }
    double vmin = std::min({cu[0].V, cu[1].V, cu[2].V});
    CHECK(-best >= vmin - 1e-9);
}

TEST_CASE("slice in squared-length coordinates") {
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> uc(0.3, 1.5), ut(0.02, 0.98);
        int tested = 0;
        while (tested < 100) {
            double c = uc(rng);
            std::array<double, 2> iv;
            try {
                iv = slice_interval(c, mp);
            } catch (const Error&) {
                continue;
            }
            double u = iv[0] + ut(rng) * (iv[1] - iv[0]);
            double d = 1e-6 * (iv[1] - iv[0]);
            double fd = (slice_value(u + d, c, mp) - slice_value(u - d, c, mp)) / (2 * d);
            double an = slice_derivative(u, c, mp);
            CHECK(std::abs(fd - an) < 1e-6 * std::max(1.0, std::abs(an)));
            double d2 = 1e-4 * (iv[1] - iv[0]);
            double sec = (slice_value(u + d2, c, mp) - 2 * slice_value(u, c, mp) + slice_value(u - d2, c, mp)) / (d2 * d2);
            CHECK(sec > 0);
            ++tested;
        }
    }
    // s1 = s2 for equal masses: u = (1 - a3 c) / (a1 + a2)
    auto eq = derive_mass_params(1, 1, 1);
    double c = 1.0, u = (1 - eq.a3 * c) / (eq.a1 + eq.a2);
    CHECK(std::abs(slice_derivative(u, c, eq)) < 1e-12);
}
