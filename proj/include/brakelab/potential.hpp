#pragma once
#include <array>
#include <vector>

#include "brakelab/masses.hpp"

namespace brakelab {

struct PotentialEval {
    double V = 0;
    double Vx = 0, Vy = 0;
    double kappa = 0;
    double kappa_x = 0, kappa_y = 0;
    double rho12 = 0, rho13 = 0, rho23 = 0;
    double norm = 0;           // ||xi|| of the chart representative M(1, w)
    bool at_collision = false; // V is +inf, gradients are not meaningful
};

struct Hessian2 {
    double xx = 0, xy = 0, yy = 0;
};

// (r12, r13, r23) of the chart representative; mass independent
std::array<double, 3> mutual_distances(double x, double y);

// ||xi||^2 of the chart representative via the Lagrange identity
double chart_norm2(double x, double y, const MassParams& mp);

PotentialEval shape_potential(double x, double y, const MassParams& mp);
Hessian2 potential_hessian(double x, double y, const MassParams& mp);

// phi with x Vx + y Vy = phi (1 - x^2 - y^2); +inf at collisions
double radial_factor(double x, double y, const MassParams& mp);

struct CentralConfig {
    double angle = 0;      // on the unit circle, in (-pi, pi]
    double V = 0;
    int interior_mass = 0; // 1, 2 or 3
};

// one Euler configuration per arc, ordered by arc: interior mass 1, 3, 2
std::vector<CentralConfig> collinear_central_configs(const MassParams& mp);

double circle_derivative(double angle, const MassParams& mp);

// slice of the unit-size potential in squared-length coordinates:
// s2 = u, s3 = c, s1 = (1 - a2 u - a3 c) / a1
double slice_value(double u, double c, const MassParams& mp);
double slice_derivative(double u, double c, const MassParams& mp);
// open u-interval where the slice lies inside the Heron cone; throws if empty
std::array<double, 2> slice_interval(double c, const MassParams& mp);

} // namespace brakelab
