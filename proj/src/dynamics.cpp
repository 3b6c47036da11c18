#include "brakelab/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "brakelab/error.hpp"

namespace brakelab {

Vec<6> blowup_field(const Vec<6>& s, const MassParams& mp, double h) {
    (void)h; // h enters only through the energy relation
    const double r = s[0], v = s[1], x = s[2], y = s[3], xp = s[4], yp = s[5];
    PotentialEval e = shape_potential(x, y, mp);
    if (e.at_collision || !std::isfinite(e.V)) fail(Errc::singularity, "blow-up field at a collision shape");
    const double k = e.kappa;
    const double q2 = xp * xp + yp * yp;
    const double kd = e.kappa_x * xp + e.kappa_y * yp;
    Vec<6> d;
    d[0] = v * r;
    d[1] = 0.5 * v * v + k * q2 - e.V;
    d[2] = xp;
    d[3] = yp;
    d[4] = (e.Vx - 0.5 * k * v * xp + 0.5 * e.kappa_x * q2 - kd * xp) / k;
    d[5] = (e.Vy - 0.5 * k * v * yp + 0.5 * e.kappa_y * q2 - kd * yp) / k;
    return d;
}

Vec<7> blowup_field_t(const Vec<7>& s, const MassParams& mp, double h) {
    Vec<6> b = blowup_field({s[0], s[1], s[2], s[3], s[4], s[5]}, mp, h);
    double r = std::max(s[0], 0.0);
    return {b[0], b[1], b[2], b[3], b[4], b[5], r * std::sqrt(r)};
}

double energy_residual(const ReducedState& s, const MassParams& mp, double h) {
    PotentialEval e = shape_potential(s.x, s.y, mp);
    return 0.5 * s.v * s.v + 0.5 * e.kappa * (s.xp * s.xp + s.yp * s.yp) - e.V + s.r * h;
}

ReducedState brake_lift(double x, double y, const MassParams& mp, double h) {
    if (!(h > 0)) fail(Errc::invalid_argument, "energy parameter h must be positive");
    if (!(x * x + y * y < 1)) fail(Errc::domain, "brake lift needs a shape in the open unit disk");
    PotentialEval e = shape_potential(x, y, mp);
    if (e.at_collision || !std::isfinite(e.V)) fail(Errc::domain, "brake lift at a collision shape");
    ReducedState s;
    s.r = e.V / h;
    s.x = x;
    s.y = y;
    return s;
}

double syzygy_c(const MassParams& mp) {
    double m1 = mp.m1, m2 = mp.m2, m3 = mp.m3;
    return 3 * m1 * m2 * m3 * (m1 * m2 + m1 * m3 + m2 * m3) / (mp.m * mp.m);
}

SyzygyDiagnostic syzygy_diagnostic(const ReducedState& s, const MassParams& mp, double h) {
    (void)h;
    if (!(s.r > 0)) fail(Errc::domain, "syzygy diagnostic needs r > 0");
    PotentialEval e = shape_potential(s.x, s.y, mp);
    double r32 = s.r * std::sqrt(s.r);
    double xd = s.xp / r32, yd = s.yp / r32;
    SyzygyDiagnostic d;
    d.z = 1 - s.x * s.x - s.y * s.y;
    double zdot = -2 * (s.x * xd + s.y * yd);
    d.p1 = e.kappa * s.r * s.r * zdot / 2;
    double N6 = std::pow(e.norm, 6);
    d.F1 = radial_factor(s.x, s.y, mp) / s.r + syzygy_c(mp) * s.r * s.r * (xd * xd + yd * yd) / N6;
    d.I = s.r * s.r;
    d.Idot = 2 * std::sqrt(s.r) * s.v;
    return d;
}

double z_second_derivative(const ReducedState& s, const MassParams& mp, double h) {
    Vec<6> d = blowup_field(s.arr(), mp, h);
    return -2 * (s.xp * s.xp + s.yp * s.yp + s.x * d[4] + s.y * d[5]);
}

Vec<8> pack(const JacobiState& s) {
    return {s.xi1.real(), s.xi1.imag(), s.xi2.real(), s.xi2.imag(),
            s.xidot1.real(), s.xidot1.imag(), s.xidot2.real(), s.xidot2.imag()};
}

JacobiState unpack(const Vec<8>& a) {
    return {{a[0], a[1]}, {a[2], a[3]}, {a[4], a[5]}, {a[6], a[7]}};
}

Vec<8> newtonian_field(const Vec<8>& s, const MassParams& mp) {
    cplx x1{s[0], s[1]}, x2{s[2], s[3]};
    cplx d12 = x1, d13 = x2 + mp.nu2 * x1, d23 = x2 - mp.nu1 * x1;
    double r12 = std::abs(d12), r13 = std::abs(d13), r23 = std::abs(d23);
    if (r12 == 0 || r13 == 0 || r23 == 0) fail(Errc::singularity, "Newtonian field at a collision");
    double b12 = mp.m1 * mp.m2 / (r12 * r12 * r12);
    double b13 = mp.m1 * mp.m3 / (r13 * r13 * r13);
    double b23 = mp.m2 * mp.m3 / (r23 * r23 * r23);
    cplx g1 = -b12 * d12 - b13 * mp.nu2 * d13 + b23 * mp.nu1 * d23;
    cplx g2 = -b13 * d13 - b23 * d23;
    cplx a1 = g1 / mp.mu1, a2 = g2 / mp.mu2;
    return {s[4], s[5], s[6], s[7], a1.real(), a1.imag(), a2.real(), a2.imag()};
}

double newtonian_energy(const Vec<8>& s, const MassParams& mp) {
    JacobiState j = unpack(s);
    double K = 0.5 * (mp.mu1 * std::norm(j.xidot1) + mp.mu2 * std::norm(j.xidot2));
    double r12 = std::abs(j.xi1), r13 = std::abs(j.xi2 + mp.nu2 * j.xi1), r23 = std::abs(j.xi2 - mp.nu1 * j.xi1);
    double U = mp.m1 * mp.m2 / r12 + mp.m1 * mp.m3 / r13 + mp.m2 * mp.m3 / r23;
    return K - U;
}

namespace {
cplx mass_inner(cplx a1, cplx a2, cplx b1, cplx b2, const MassParams& mp) {
    return mp.mu1 * std::conj(a1) * b1 + mp.mu2 * std::conj(a2) * b2;
}
} // namespace

JacobiState reduced_to_jacobi(const ReducedState& s, const MassParams& mp) {
    if (!(s.r > 0)) fail(Errc::triple_collision, "no physical state at r = 0");
    cplx w{s.x, s.y};
    double r32 = s.r * std::sqrt(s.r);
    cplx wd = cplx{s.xp, s.yp} / r32;
    cplx u1 = 1.0 - w, u2 = mp.lplus - mp.lminus * w;
    cplx du1 = -wd, du2 = -mp.lminus * wd;
    double n = std::sqrt(mass_norm2(u1, u2, mp));
    double dn = mass_inner(u1, u2, du1, du2, mp).real() / n;
    cplx e1 = u1 / n, e2 = u2 / n;
    cplx de1 = du1 / n - u1 * dn / (n * n), de2 = du2 / n - u2 * dn / (n * n);
    double psid = -mass_inner(e1, e2, de1, de2, mp).imag();
    double rd = s.v / std::sqrt(s.r);
    const cplx I{0, 1};
    JacobiState j;
    j.xi1 = s.r * e1;
    j.xi2 = s.r * e2;
    j.xidot1 = rd * e1 + s.r * (de1 + I * psid * e1);
    j.xidot2 = rd * e2 + s.r * (de2 + I * psid * e2);
    cplx g = std::abs(j.xi1) > 0 ? std::conj(j.xi1) / std::abs(j.xi1) : std::conj(j.xi2) / std::abs(j.xi2);
    j.xi1 *= g;
    j.xi2 *= g;
    j.xidot1 *= g;
    j.xidot2 *= g;
    return j;
}

ReducedState jacobi_to_reduced(const JacobiState& j, const MassParams& mp) {
    double r = std::sqrt(mass_norm2(j.xi1, j.xi2, mp));
    if (!(r > 0)) fail(Errc::triple_collision, "triple collision: xi = 0");
    double rd = mass_inner(j.xi1, j.xi2, j.xidot1, j.xidot2, mp).real() / r;
    cplx A = j.xi2 - mp.lplus * j.xi1, B = j.xi2 - mp.lminus * j.xi1;
    cplx Ad = j.xidot2 - mp.lplus * j.xidot1, Bd = j.xidot2 - mp.lminus * j.xidot1;
    cplx w = A / B;
    cplx wd = (Ad * B - A * Bd) / (B * B);
    double r32 = r * std::sqrt(r);
    return {r, std::sqrt(r) * rd, w.real(), w.imag(), r32 * wd.real(), r32 * wd.imag()};
}

double iso_W(double th, double m3) {
    double S = std::sin(th), C = std::cos(th), A = 1 + S * S;
    double B = A * A + 8 / m3 * S * S;
    return A * (1 / std::sqrt(2.0) + 2 * std::sqrt(2.0) * m3 * C * C / std::sqrt(B));
}

double iso_Wp(double th, double m3) {
    double S = std::sin(th), C = std::cos(th), A = 1 + S * S;
    double B = A * A + 8 / m3 * S * S;
    double rB = 1 / std::sqrt(B);
    double s2 = std::sqrt(2.0);
    double inner = 1 / s2 + 2 * s2 * m3 * C * C * rB;
    double dinner = 2 * s2 * m3 * (-2 * S * C * rB - 0.5 * C * C * rB * rB * rB * 4 * S * C * (A + 4 / m3));
    return 2 * S * C * inner + A * dinner;
}

double iso_V(double th, double m3) {
    double C = std::cos(th);
    return iso_W(th, m3) / (C * C);
}

double iso_theta_star(double m3) {
    double mu1 = 0.5, mu2 = 2 * m3 / (2 + m3);
    double k = std::sqrt(3.0) / 4 * std::sqrt(mu2 / mu1);
    return std::asin((-1 + std::sqrt(1 + 4 * k * k)) / (2 * k));
}

Vec<4> iso_field(const Vec<4>& s, double m3) {
    const double r = s[0], v = s[1], th = s[2], w = s[3];
    double S = std::sin(th), C = std::cos(th), A = 1 + S * S;
    double C2 = C * C, A2 = A * A;
    Vec<4> d;
    d[0] = v * r * C2;
    d[1] = 0.5 * v * v * C2 + 0.25 * w * w * A2 - iso_W(th, m3);
    d[2] = 0.25 * w * A2;
    d[3] = iso_Wp(th, m3) - 0.5 * v * w * C2 + S * C * (2 * r + v * v - 0.5 * w * w * A);
    return d;
}

Vec<5> iso_field_t(const Vec<5>& s, double m3) {
    Vec<4> d = iso_field({s[0], s[1], s[2], s[3]}, m3);
    double r = std::max(s[0], 0.0), C = std::cos(s[2]);
    return {d[0], d[1], d[2], d[3], r * std::sqrt(r) * C * C};
}

double iso_energy(const Vec<4>& s, double m3) {
    double S = std::sin(s[2]), C = std::cos(s[2]), A = 1 + S * S;
    return 0.5 * s[1] * s[1] * C * C + 0.125 * s[3] * s[3] * A * A - iso_W(s[2], m3) + s[0] * C * C;
}

double collision_slope(double th, double v, double m3) {
    double C = std::cos(th), S = std::sin(th), A = 1 + S * S;
    double W2 = 2 * iso_W(th, m3);
    double rad = W2 - v * v * C * C;
    if (rad < -1e-13 * W2) fail(Errc::domain, "v^2 exceeds 2V(theta): outside the collision-manifold region");
    return std::sqrt(std::max(rad, 0.0)) / A;
}

JacobiState iso_to_jacobi(const Vec<4>& s, double m3) {
    const double r = s[0], v = s[1], th = s[2], w = s[3];
    if (!(r > 0)) fail(Errc::triple_collision, "no physical state at r = 0");
    double S = std::sin(th), C = std::cos(th), A = 1 + S * S;
    if (C == 0) fail(Errc::singularity, "binary collision: isosceles velocity is unbounded");
    double mu1 = 0.5, mu2 = 2 * m3 / (2 + m3);
    double sm1 = std::sqrt(mu1), sm2 = std::sqrt(mu2);
    double rd = v / std::sqrt(r);
    double thd = 0.25 * w * A * A / (r * std::sqrt(r) * C * C);
    JacobiState j;
    j.xi1 = {r * C * C / (A * sm1), 0};
    j.xi2 = {0, r * 2 * S / (A * sm2)};
    j.xidot1 = {rd * C * C / (A * sm1) + r * (-4 * S * C / (A * A * sm1)) * thd, 0};
    j.xidot2 = {0, rd * 2 * S / (A * sm2) + r * (2 * C * C * C / (A * A * sm2)) * thd};
    return j;
}

double tau_star(const MassParams& mp, double h) {
    if (!(h > 0)) fail(Errc::invalid_argument, "tau* needs h > 0");
    double m[3] = {mp.m1, mp.m2, mp.m3};
    std::sort(m, m + 3);
    double mi = m[2], mj = m[1];
    return std::pow(2 * h, -1.5) * std::pow(mi * mi * mj * mj / (mi + mj), 1.5);
}

} // namespace brakelab
