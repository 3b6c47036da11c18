#include "brakelab/masses.hpp"

#include <cmath>
#include <limits>

#include "brakelab/error.hpp"

namespace brakelab {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::ok: return "ok";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::domain: return "domain error";
    case Errc::singularity: return "singularity";
    case Errc::triple_collision: return "triple collision";
    case Errc::no_syzygy: return "no syzygy";
    case Errc::step_underflow: return "step underflow";
    case Errc::not_converged: return "not converged";
    case Errc::no_bracket: return "no bracket";
    case Errc::internal: return "internal error";
    }
    return "unknown";
}

MassParams derive_mass_params(double m1, double m2, double m3) {
    if (!(m1 > 0 && m2 > 0 && m3 > 0) || !std::isfinite(m1 + m2 + m3))
        fail(Errc::invalid_argument, "masses must be finite and strictly positive");
    MassParams p;
    p.m1 = m1;
    p.m2 = m2;
    p.m3 = m3;
    p.m = m1 + m2 + m3;
    p.mu1 = m1 * m2 / (m1 + m2);
    p.mu2 = (m1 + m2) * m3 / p.m;
    p.nu1 = m1 / (m1 + m2);
    p.nu2 = m2 / (m1 + m2);
    const double h = std::sqrt(3.0) / 2;
    p.lplus = {(p.nu1 - p.nu2) / 2, h};
    p.lminus = {(p.nu1 - p.nu2) / 2, -h};
    p.a1 = m2 * m3 / p.m;
    p.a2 = m1 * m3 / p.m;
    p.a3 = m1 * m2 / p.m;
    return p;
}

double mass_norm2(cplx xi1, cplx xi2, const MassParams& mp) {
    return mp.mu1 * std::norm(xi1) + mp.mu2 * std::norm(xi2);
}

cplx shape_of(cplx xi1, cplx xi2, const MassParams& mp) {
    if (xi1 == 0.0 && xi2 == 0.0) fail(Errc::triple_collision, "triple collision: xi = 0 has no shape");
    cplx den = xi2 - mp.lminus * xi1;
    if (den == 0.0) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    return (xi2 - mp.lplus * xi1) / den;
}

ShapePoint jacobi_to_shape(const JacobiState& s, const MassParams& mp) {
    cplx w = shape_of(s.xi1, s.xi2, mp);
    ShapePoint p;
    p.r = std::sqrt(mass_norm2(s.xi1, s.xi2, mp));
    p.x = w.real();
    p.y = w.imag();
    if (std::isfinite(p.x)) p.sphere = shape_to_sphere(p.x, p.y);
    return p;
}

JacobiState shape_to_jacobi(const ShapePoint& p, const MassParams& mp) {
    if (!(p.r >= 0)) fail(Errc::invalid_argument, "size r must be nonnegative");
    cplx w{p.x, p.y};
    cplx u1 = 1.0 - w;
    cplx u2 = mp.lplus - mp.lminus * w;
    double n = std::sqrt(mass_norm2(u1, u2, mp));
    cplx g = std::abs(u1) > 0 ? std::conj(u1) / std::abs(u1) : std::conj(u2) / std::abs(u2);
    JacobiState s;
    s.xi1 = p.r * g * u1 / n;
    s.xi2 = p.r * g * u2 / n;
    if (std::abs(u1) > 0) s.xi1 = {s.xi1.real(), 0.0};
    return s;
}

double angular_momentum(const JacobiState& s, const MassParams& mp) {
    return std::imag(mp.mu1 * std::conj(s.xi1) * s.xidot1 + mp.mu2 * std::conj(s.xi2) * s.xidot2);
}

std::array<double, 3> shape_to_sphere(double x, double y) {
    double q = x * x + y * y;
    double d = 1 + q;
    return {2 * x / d, 2 * y / d, (1 - q) / d};
}

} // namespace brakelab
