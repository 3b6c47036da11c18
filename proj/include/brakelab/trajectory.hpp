#pragma once
#include <vector>

#include "brakelab/dynamics.hpp"

namespace brakelab {

struct BrakeSample {
    double s = 0, t = 0;
    ReducedState state;
    double energy_residual = 0;
};

struct BrakeTrajectory {
    std::vector<BrakeSample> samples; // at t_end * k / (n - 1)
    IntegrationStats stats;
    double max_energy_residual = 0;
};

// blown-up brake orbit from the boundary point over (x, y), sampled uniformly in physical time
BrakeTrajectory integrate_brake(double x, double y, const MassParams& mp, double h, double t_end, int n,
                                const Tolerances& tol = {});

struct OracleComparison {
    std::vector<double> t;
    std::vector<ShapePoint> reduced, newtonian;
    double max_dev = 0; // max over samples of |dr|, |dx|, |dy|
    double newtonian_energy_drift = 0;
    double angular_momentum = 0; // of the lifted start
};

// same start integrated in reduced blow-up variables and as the unreduced planar problem
OracleComparison compare_with_newtonian(double x, double y, const MassParams& mp, double h, double t_end, int n,
                                        const Tolerances& tol = {});

} // namespace brakelab
