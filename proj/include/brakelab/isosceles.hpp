#pragma once
#include <string>
#include <utility>
#include <vector>

#include "brakelab/dynamics.hpp"

namespace brakelab {

// gamma leaves the Lagrange restpoint at theta* - pi, gamma_prime the one at -theta*
enum class Branch { gamma, gamma_prime };

struct BranchTrace {
    Branch which = Branch::gamma;
    double m3 = 1;
    double theta_start = 0, v_start = 0, beta = 0; // v = -v* + beta (theta - theta_rest)^2
    std::vector<std::pair<double, double>> curve;  // (theta, v)
    double v1 = NAN, v2 = NAN, v3 = NAN;           // v(-pi/2) and v(0) for gamma, v(0) for gamma_prime
    double v_3pi4 = NAN;                           // gamma only
    bool terminated = false;                       // left the region v^2 < 2V before theta = 0
    double theta_term = NAN, v_term = NAN;
    bool monotone = true;
    double max_domain_excess = 0; // max of v^2 - 2V over the samples
};

struct BranchOptions {
    Tolerances tol;
    double delta = 1e-6;
    int samples = 400;
};

BranchTrace trace_branch(Branch which, double m3, const BranchOptions& opt = {});
// linear unstable rate at the restpoint, used for the branch start
double branch_start_beta(Branch which, double m3);

struct Admissibility {
    double m3 = 1;
    bool admissible = false;
    double v1 = NAN, v2 = NAN, v3 = NAN;
    std::string reason;
};

Admissibility admissible(double m3, const BranchOptions& opt = {});
std::vector<Admissibility> admissibility_scan(const std::vector<double>& m3s, int threads = 1,
                                              const BranchOptions& opt = {});

struct Threshold {
    double value = NAN;
    double lo = NAN, hi = NAN; // final bracket
    bool lo_admissible = false;
    int evaluations = 0;
};

// bisection between two masses with different admissibility flags
Threshold admissibility_threshold(double a, double b, double tol = 1e-4, const BranchOptions& opt = {});

using IsoVec = Vec<5>; // (r, v, theta, w, t)

struct IsoSegment {
    std::vector<double> s;
    std::vector<IsoVec> y;
};

struct ShotResult {
    double theta0 = 0;
    bool reached = false;   // hit theta = 0 before turning back
    double v_zero = NAN;    // v at theta = 0
    bool crossed_binary = false;
    double v_binary = NAN;  // v at theta = -pi/2
    double s_binary = NAN;
    double T2 = NAN;        // rescaled time at theta = 0
    double theta_turn = NAN; // where w fell through 0, if it did
    std::string violation;  // region-crossing assertion failure
    IsoSegment seg;         // filled when requested
};

ShotResult shoot(double theta0, double m3, const Tolerances& tol = {}, bool keep = false);

struct PeriodicBrakeOrbit {
    double m3 = 1;
    double theta0 = 0, r0 = 0;
    double T2 = 0, t2 = 0;       // rescaled and physical time of the second syzygy
    double v_first = 0, s_first = 0; // at theta = -pi/2
    double v_second = 0;          // at theta = 0
    IsoSegment quarter;
    double closure_error = NAN;   // direct integration over 4 T2
    double junction_error = NAN;  // C1 mismatch where the reflected quarter is attached
    double assembled_closure = NAN;
};

struct PeriodicSearch {
    std::vector<double> grid;
    std::vector<double> v_profile; // NaN where the shot turned back
    std::vector<PeriodicBrakeOrbit> orbits; // one per sign change
    std::vector<std::string> notes;
};

PeriodicSearch find_periodic_brake(double m3, int grid = 200, int threads = 1, const Tolerances& tol = {});

enum class Reflection {
    spatial,  // theta -> 2 L - theta, w -> -w, time kept
    reversing // theta -> 2 L - theta, v -> -v, time reversed about s_pivot
};

IsoSegment reflect_orbit(const IsoSegment& seg, double theta_line, Reflection kind, double s_pivot = NAN);
// max |y' - f(y)| along the segment using centered differences of the samples
double segment_residual(const IsoSegment& seg, double m3);
// whole period from the quarter: reversing reflection about theta = 0, then brake reversal
IsoSegment assemble_period(const PeriodicBrakeOrbit& orb);

// integrates the quarter as a Newtonian isosceles motion and returns the max position deviation
// over samples with |theta + pi/2| > margin
double newtonian_quarter_check(const PeriodicBrakeOrbit& orb, double margin = 0.1);

} // namespace brakelab
