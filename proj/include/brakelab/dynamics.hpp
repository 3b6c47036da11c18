#pragma once
#include "brakelab/integrate.hpp"
#include "brakelab/masses.hpp"
#include "brakelab/potential.hpp"

namespace brakelab {

// Blown-up reduced state; primes are derivatives in rescaled time s, dt = r^{3/2} ds.
struct ReducedState {
    double r = 0, v = 0, x = 0, y = 0, xp = 0, yp = 0;

    Vec<6> arr() const { return {r, v, x, y, xp, yp}; }
    template <std::size_t N>
    static ReducedState from(const Vec<N>& a) {
        static_assert(N >= 6);
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
};

Vec<6> blowup_field(const Vec<6>& s, const MassParams& mp, double h);
// blow-up field augmented with physical time t as the 7th component
Vec<7> blowup_field_t(const Vec<7>& s, const MassParams& mp, double h);

double energy_residual(const ReducedState& s, const MassParams& mp, double h);

// r = V/h, all velocities zero
ReducedState brake_lift(double x, double y, const MassParams& mp, double h);

struct SyzygyDiagnostic {
    double z = 0;
    double p1 = 0;
    double F1 = 0;
    double I = 0;
    double Idot = 0;
};

// the constant in F1
double syzygy_c(const MassParams& mp);
SyzygyDiagnostic syzygy_diagnostic(const ReducedState& s, const MassParams& mp, double h);
// d^2 z / ds^2 along the blow-up flow
double z_second_derivative(const ReducedState& s, const MassParams& mp, double h);

// Newtonian oracle on packed Jacobi states
// [Re xi1, Im xi1, Re xi2, Im xi2, Re xi1', Im xi1', Re xi2', Im xi2']
Vec<8> pack(const JacobiState& s);
JacobiState unpack(const Vec<8>& a);
Vec<8> newtonian_field(const Vec<8>& s, const MassParams& mp);
double newtonian_energy(const Vec<8>& s, const MassParams& mp);

// Physical Jacobi state of a blown-up state with r > 0, xi1 real-positive gauge, zero angular momentum.
JacobiState reduced_to_jacobi(const ReducedState& s, const MassParams& mp);
ReducedState jacobi_to_reduced(const JacobiState& s, const MassParams& mp);

// Isosceles subsystem, m1 = m2 = 1, energy -1. State (r, v, theta, w).
double iso_W(double theta, double m3);
double iso_Wp(double theta, double m3);
double iso_V(double theta, double m3);
double iso_theta_star(double m3);
Vec<4> iso_field(const Vec<4>& s, double m3);
// augmented with physical time, dt/ds = r^{3/2} cos^2(theta)
Vec<5> iso_field_t(const Vec<5>& s, double m3);
double iso_energy(const Vec<4>& s, double m3);
double collision_slope(double theta, double v, double m3);

// Jacobi state of an isosceles point, bodies 1,2 on the real axis, mass 3 on the imaginary axis
JacobiState iso_to_jacobi(const Vec<4>& s, double m3);

double tau_star(const MassParams& mp, double h);

} // namespace brakelab
