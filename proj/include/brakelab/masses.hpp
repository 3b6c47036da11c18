#pragma once
#include <array>
#include <complex>
#include <optional>

namespace brakelab {

using cplx = std::complex<double>;

struct MassParams {
    double m1 = 1, m2 = 1, m3 = 1;
    double m = 3;
    double mu1 = 0.5, mu2 = 2.0 / 3.0;
    double nu1 = 0.5, nu2 = 0.5;
    cplx lplus, lminus;
    // pairwise products m_j m_k / m; a1 pairs with r23, a2 with r13, a3 with r12
    double a1 = 1.0 / 3, a2 = 1.0 / 3, a3 = 1.0 / 3;
};

MassParams derive_mass_params(double m1, double m2, double m3);

struct JacobiState {
    cplx xi1, xi2;
    cplx xidot1, xidot2;
};

struct ShapePoint {
    double r = 0;
    double x = 0, y = 0;
    std::optional<std::array<double, 3>> sphere;
};

// mass norm squared of a Jacobi pair
double mass_norm2(cplx xi1, cplx xi2, const MassParams& mp);

// shape coordinate w = x + iy of the ray through (xi1, xi2); throws on xi = 0
cplx shape_of(cplx xi1, cplx xi2, const MassParams& mp);

ShapePoint jacobi_to_shape(const JacobiState& s, const MassParams& mp);

// Representative with ||xi|| = r, xi1 real-positive (or xi2 when xi1 = 0), zero velocity.
JacobiState shape_to_jacobi(const ShapePoint& p, const MassParams& mp);

double angular_momentum(const JacobiState& s, const MassParams& mp);

std::array<double, 3> shape_to_sphere(double x, double y);

// unit cube roots of unity where the binary collisions sit
inline constexpr double collision_angle12 = 0.0;
inline constexpr double collision_angle13 = 2.0943951023931957;
inline constexpr double collision_angle23 = -2.0943951023931957;

} // namespace brakelab
