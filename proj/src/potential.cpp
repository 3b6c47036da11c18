#include "brakelab/potential.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "brakelab/error.hpp"

namespace brakelab {

namespace {

constexpr double h3 = 0.86602540378443864676; // sqrt(3)/2
constexpr double inf = std::numeric_limits<double>::infinity();

struct Sides {
    double R[3];  // squared distances 12, 13, 23
    double Rx[3], Ry[3];
};

Sides sides(double x, double y) {
    Sides s;
    s.Rx[0] = 2 * (x - 1);
    s.Ry[0] = 2 * y;
    s.Rx[1] = 2 * (x + 0.5);
    s.Ry[1] = 2 * (y - h3);
    s.Rx[2] = 2 * (x + 0.5);
    s.Ry[2] = 2 * (y + h3);
    s.R[0] = (x - 1) * (x - 1) + y * y;
    s.R[1] = (x + 0.5) * (x + 0.5) + (y - h3) * (y - h3);
    s.R[2] = (x + 0.5) * (x + 0.5) + (y + h3) * (y + h3);
    return s;
}

struct Weights {
    double a[3]; // multiplies R12, R13, R23 in ||xi||^2
    double b[3]; // m_i m_j for 12, 13, 23
};

Weights weights(const MassParams& mp) {
    return {{mp.a3, mp.a2, mp.a1}, {mp.m1 * mp.m2, mp.m1 * mp.m3, mp.m2 * mp.m3}};
}

} // namespace

std::array<double, 3> mutual_distances(double x, double y) {
    Sides s = sides(x, y);
    return {std::sqrt(s.R[0]), std::sqrt(s.R[1]), std::sqrt(s.R[2])};
}

double chart_norm2(double x, double y, const MassParams& mp) {
    Sides s = sides(x, y);
    Weights w = weights(mp);
    return w.a[0] * s.R[0] + w.a[1] * s.R[1] + w.a[2] * s.R[2];
}

PotentialEval shape_potential(double x, double y, const MassParams& mp) {
    Sides s = sides(x, y);
    Weights w = weights(mp);
    PotentialEval e;
    double P = 0, Px = 0, Py = 0;
    for (int k = 0; k < 3; ++k) {
        P += w.a[k] * s.R[k];
        Px += w.a[k] * s.Rx[k];
        Py += w.a[k] * s.Ry[k];
    }
    double N = std::sqrt(P);
    e.norm = N;
    e.kappa = 3 * mp.mu1 * mp.mu2 / (P * P);
    e.kappa_x = -2 * e.kappa * Px / P;
    e.kappa_y = -2 * e.kappa * Py / P;
    e.rho12 = std::sqrt(s.R[0]) / N;
    e.rho13 = std::sqrt(s.R[1]) / N;
    e.rho23 = std::sqrt(s.R[2]) / N;
    if (s.R[0] == 0 || s.R[1] == 0 || s.R[2] == 0) {
        e.at_collision = true;
        e.V = e.Vx = e.Vy = inf;
        return e;
    }
    double S = 0, Sx = 0, Sy = 0;
    for (int k = 0; k < 3; ++k) {
        double ir = 1 / std::sqrt(s.R[k]);
        S += w.b[k] * ir;
        double c = -0.5 * w.b[k] * ir * ir * ir;
        Sx += c * s.Rx[k];
        Sy += c * s.Ry[k];
    }
    e.V = N * S;
    e.Vx = Px / (2 * N) * S + N * Sx;
    e.Vy = Py / (2 * N) * S + N * Sy;
    return e;
}

Hessian2 potential_hessian(double x, double y, const MassParams& mp) {
    Sides s = sides(x, y);
    Weights w = weights(mp);
    double P = 0, Px = 0, Py = 0, asum = 0;
    for (int k = 0; k < 3; ++k) {
        P += w.a[k] * s.R[k];
        Px += w.a[k] * s.Rx[k];
        Py += w.a[k] * s.Ry[k];
        asum += w.a[k];
    }
    double N = std::sqrt(P), N3 = N * P;
    double Nx = Px / (2 * N), Ny = Py / (2 * N);
    double Nxx = asum / N - Px * Px / (4 * N3);
    double Nyy = asum / N - Py * Py / (4 * N3);
    double Nxy = -Px * Py / (4 * N3);
    double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0, Syy = 0;
    for (int k = 0; k < 3; ++k) {
        double R = s.R[k];
        double i1 = 1 / std::sqrt(R), i3 = i1 / R, i5 = i3 / R;
        S += w.b[k] * i1;
        Sx += -0.5 * w.b[k] * i3 * s.Rx[k];
        Sy += -0.5 * w.b[k] * i3 * s.Ry[k];
        Sxx += w.b[k] * (0.75 * i5 * s.Rx[k] * s.Rx[k] - i3);
        Syy += w.b[k] * (0.75 * i5 * s.Ry[k] * s.Ry[k] - i3);
        Sxy += w.b[k] * 0.75 * i5 * s.Rx[k] * s.Ry[k];
    }
    Hessian2 H;
    H.xx = Nxx * S + 2 * Nx * Sx + N * Sxx;
    H.yy = Nyy * S + 2 * Ny * Sy + N * Syy;
    H.xy = Nxy * S + Nx * Sy + Ny * Sx + N * Sxy;
    return H;
}

double radial_factor(double x, double y, const MassParams& mp) {
    Sides s = sides(x, y);
    if (s.R[0] == 0 || s.R[1] == 0 || s.R[2] == 0) return inf;
    double N = std::sqrt(chart_norm2(x, y, mp));
    double c12 = std::pow(s.R[0], -1.5), c13 = std::pow(s.R[1], -1.5), c23 = std::pow(s.R[2], -1.5);
    double g1 = (s.R[1] - s.R[0]) * (c12 - c13);
    double g2 = (s.R[2] - s.R[0]) * (c12 - c23);
    double g3 = (s.R[2] - s.R[1]) * (c13 - c23);
    return mp.m1 * mp.m2 * mp.m3 / (2 * mp.m * N) * (mp.m1 * g1 + mp.m2 * g2 + mp.m3 * g3);
}

double circle_derivative(double angle, const MassParams& mp) {
    double c = std::cos(angle), s = std::sin(angle);
    PotentialEval e = shape_potential(c, s, mp);
    return -s * e.Vx + c * e.Vy;
}

std::vector<CentralConfig> collinear_central_configs(const MassParams& mp) {
    constexpr double pi = std::numbers::pi;
    const double arcs[3][2] = {{0, 2 * pi / 3}, {2 * pi / 3, 4 * pi / 3}, {4 * pi / 3, 2 * pi}};
    const int interior[3] = {1, 3, 2};
    std::vector<CentralConfig> out;
    for (int k = 0; k < 3; ++k) {
        double lo = arcs[k][0] + 1e-7, hi = arcs[k][1] - 1e-7;
        auto f = [&](double a) { return circle_derivative(a, mp); };
        double flo = f(lo), fhi = f(hi);
        if (!(flo < 0 && fhi > 0)) {
            std::ostringstream os;
            os << "no derivative sign change on arc " << k << ": f(" << lo << ")=" << flo << ", f(" << hi << ")=" << fhi;
            fail(Errc::no_bracket, os.str());
        }
        std::uintmax_t it = 200;
        auto tol = [](double a, double b) { return std::abs(b - a) < 1e-13; };
        auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
        if (it >= 200) fail(Errc::not_converged, "critical angle search did not converge");
        double ang = 0.5 * (a + b);
        CentralConfig cc;
        cc.angle = std::remainder(ang, 2 * pi);
        cc.V = shape_potential(std::cos(ang), std::sin(ang), mp).V;
        cc.interior_mass = interior[k];
        out.push_back(cc);
    }
    return out;
}

namespace {
std::array<double, 3> slice_point(double u, double c, const MassParams& mp) {
    return {(1 - mp.a2 * u - mp.a3 * c) / mp.a1, u, c};
}
double heron(const std::array<double, 3>& s) {
    return 2 * (s[0] * s[1] + s[1] * s[2] + s[2] * s[0]) - (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
}
void check_cone(const std::array<double, 3>& s) {
    if (!(s[0] > 0 && s[1] > 0 && s[2] > 0 && heron(s) > 0))
        fail(Errc::domain, "slice point outside the Heron cone");
}
} // namespace

double slice_value(double u, double c, const MassParams& mp) {
    auto s = slice_point(u, c, mp);
    check_cone(s);
    return mp.m2 * mp.m3 / std::sqrt(s[0]) + mp.m1 * mp.m3 / std::sqrt(s[1]) + mp.m1 * mp.m2 / std::sqrt(s[2]);
}

double slice_derivative(double u, double c, const MassParams& mp) {
    auto s = slice_point(u, c, mp);
    check_cone(s);
    return mp.m * mp.a2 / 2 * (std::pow(s[0], -1.5) - std::pow(s[1], -1.5));
}

std::array<double, 2> slice_interval(double c, const MassParams& mp) {
    // heron() is quadratic in u; recover its coefficients from three samples
    auto q = [&](double u) { return heron(slice_point(u, c, mp)); };
    double f0 = q(0), f1 = q(1), fm = q(-1);
    double A = (f1 + fm) / 2 - f0, B = (f1 - fm) / 2, C = f0;
    double disc = B * B - 4 * A * C;
    if (!(A < 0 && disc > 0) || !(c > 0)) fail(Errc::domain, "slice misses the Heron cone");
    double sq = std::sqrt(disc);
    double u1 = (-B + sq) / (2 * A), u2 = (-B - sq) / (2 * A);
    return {std::min(u1, u2), std::max(u1, u2)};
}

} // namespace brakelab
