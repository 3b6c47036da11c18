#include <doctest.h>

#include <cmath>

#include "brakelab/error.hpp"
#include "brakelab/restpoints.hpp"

using namespace brakelab;

namespace {

double vnorm(const Vec<6>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

const Restpoint& pick(const std::vector<Restpoint>& rps, RestKind kind, int sign, int interior = 0) {
    for (const auto& p : rps)
        if (p.kind == kind && p.sign == sign && (interior == 0 || p.interior_mass == interior)) return p;
    throw std::runtime_error("restpoint not found");
}

} // namespace

TEST_CASE("equal-mass restpoint speeds") {
    auto mp = derive_mass_params(1, 1, 1);
    auto rps = find_restpoints(mp, 1.0);
    CHECK(rps.size() == 8);
    CHECK(pick(rps, RestKind::lagrange, 1).v == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
    CHECK(pick(rps, RestKind::lagrange, -1).v == doctest::Approx(-std::sqrt(6.0)).epsilon(1e-12));
    CHECK(std::abs(pick(rps, RestKind::lagrange, -1).v + std::sqrt(6.0)) < 1e-10);
    for (int k : {1, 2, 3})
        for (int sg : {-1, 1})
            CHECK(pick(rps, RestKind::euler, sg, k).v ==
                  doctest::Approx(sg * std::sqrt(5 * std::sqrt(2.0))).epsilon(1e-12));
    for (const auto& p : rps) CHECK(vnorm(blowup_field(p.state, mp, 1.0)) < 1e-12);
}

TEST_CASE("stable and unstable dimensions") {
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}, std::array<double, 3>{0.3, 1, 4},
                   std::array<double, 3>{5, 1, 1}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        for (const auto& p : find_restpoints(mp, 1.0)) {
            CAPTURE(p.name());
            int s = p.lin.n_stable, u = p.lin.n_unstable;
            if (p.kind == RestKind::lagrange) {
                CHECK(s == (p.sign < 0 ? 3 : 2));
                CHECK(u == (p.sign < 0 ? 2 : 3));
            } else {
                CHECK(s == (p.sign < 0 ? 2 : 3));
                CHECK(u == (p.sign < 0 ? 3 : 2));
            }
            CHECK(p.lin.invariance_residual < 1e-8);
            CHECK(p.lin.fd_rel_error < 1e-6);
            REQUIRE(p.lin.homothety_index >= 0);
            CHECK(p.lin.eigenvalues[p.lin.homothety_index].real() == doctest::Approx(p.v).epsilon(1e-8));
            CHECK(std::abs(p.lin.eigenvalues[p.lin.homothety_index].imag()) < 1e-8);
            CHECK(std::abs(p.lin.eigenvectors[p.lin.homothety_index](0)) > 1e-3);
        }
    }
}

TEST_CASE("eigenvalues flip sign between the pair") {
    auto mp = derive_mass_params(1, 2, 10);
    auto rps = find_restpoints(mp, 1.0);
    for (const auto& p : rps) {
        if (p.sign > 0) continue;
        const auto& q = pick(rps, p.kind, 1, p.interior_mass);
        for (const auto& ev : p.lin.eigenvalues) {
            double best = INFINITY;
            for (const auto& ew : q.lin.eigenvalues) best = std::min(best, std::abs(ew + ev));
            CHECK(best < 1e-8 * std::max(1.0, std::abs(ev)));
        }
    }
}

TEST_CASE("spiraling of the Euler plus points") {
    auto eq = spiraling_test(derive_mass_params(1, 1, 1));
    CHECK(eq.count() == 3);

    auto big = spiraling_test(derive_mass_params(1, 1, 500));
    CHECK(big.count() < 3);
    CHECK(big.count() >= 2);
    for (int a = 0; a < 3; ++a)
        if (!big.spiraling[a]) CHECK(big.interior_mass[a] == 3);

    auto rows = spiraling_scan(12);
    CHECK(rows.size() == 55);
    for (const auto& r : rows) {
        REQUIRE(r.ok);
        CHECK(r.res.count() >= 2);
        CHECK(r.m1 + r.m2 + r.m3 == doctest::Approx(1));
    }
}

TEST_CASE("restpoint names and the chart note") {
    auto rps = find_restpoints(derive_mass_params(1, 1, 1), 1.0);
    CHECK(rps.front().name().front() == 'L');
    int lag = 0;
    for (const auto& p : rps) lag += p.kind == RestKind::lagrange;
    CHECK(lag == 2);
}
