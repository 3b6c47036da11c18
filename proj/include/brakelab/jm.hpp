#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brakelab/dynamics.hpp"

namespace brakelab {

struct PathNode {
    double r = 0, x = 0, y = 0;
};

enum class EndTag { fixed, hill_boundary };

struct DiscretePath {
    std::vector<PathNode> nodes;
    EndTag end = EndTag::fixed;
    std::string grading = "uniform"; // "uniform", "sin2" or "sqrt" (spacing ~ sqrt of distance to the end)
};

// Each segment contributes L * mean(sqrt(U - h)), where the mean is exact for the normalized size
// rho = r h / V varying linearly between the nodes and L is the kinetic length at the midpoint.
double jm_action(const DiscretePath& path, const MassParams& mp, double h);

// Same sum for nodes (rho, x, y) with r = rho V / h; optional gradient per node in (rho, x, y).
double jm_action_rho(const std::vector<std::array<double, 3>>& nodes, const MassParams& mp, double h,
                     std::vector<std::array<double, 3>>* grad = nullptr);

// mesh parameters in [0, 1]
std::vector<double> mesh(int N, const std::string& grading);

struct JMOptions {
    int multistart = 8;
    std::uint64_t seed = 1;
    double grad_tol = 1e-8;
    int max_iterations = 200000;
    double collision_offset = 1e-4;
    int outer_iterations = 4; // collision-start direction updates
    double perturbation = 0.05;
    bool offset_study = false; // repeat a collision start with offset / 10
    int threads = 1;
};

struct JMResult {
    DiscretePath path;
    double action = 0;
    double grad_norm = 0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> multipliers; // dA/drho per node
    std::vector<double> times;       // reconstructed physical time per node
    // residuals at nodes 10%..90% along the path; boundary problems also skip nodes with rho < 1/4
    double energy_residual = 0;      // max |K - (U - h)| / (U - h)
    double newton_residual = 0;      // max relative residual of the reduced equations
    bool interior_strict = true;     // all interior nodes have rho < 1
    int start_index = 0;             // multistart that produced it
    std::string note;
};

struct JMRun {
    std::vector<JMResult> minima; // distinct local minima, best first
    double offset_delta = NAN;    // action change when the collision offset is divided by 10
    const JMResult& best() const { return minima.front(); }
};

// end shape guess defaults to the start shape (or (0.2, 0.1) from triple collision)
JMRun minimize_to_boundary(const ShapePoint& q0, int N, const MassParams& mp, double h, const JMOptions& opt = {},
                           std::optional<std::array<double, 2>> end_guess = std::nullopt);
JMRun minimize_fixed(const ShapePoint& q0, const ShapePoint& q1, int N, const MassParams& mp, double h,
                     const JMOptions& opt = {});

struct ShootingResult {
    double action = 0;
    double s_end = 0, t_end = 0;
    double miss = 0; // endpoint error
    int iterations = 0;
};

// connects q0 to q1 by an energy -h solution of the reduced flow, starting from the guess direction
ShootingResult shooting_action(const ShapePoint& q0, const ShapePoint& q1, const MassParams& mp, double h,
                               const std::array<double, 3>& dir_guess, double t_guess);

struct BrakeArc {
    std::vector<double> t, action;
    std::vector<ReducedState> state;
};

// brake orbit from the boundary point over (x, y); action at the requested physical times
BrakeArc brake_arc_action(double x, double y, const MassParams& mp, double h, const std::vector<double>& times);

struct SeifertProbe {
    std::vector<double> t, action;
    double ratio = 0;        // action(2t) / action(t)
    double exponent = 0;     // in tau = t^2, from t and 2t
    double exponent_2 = 0;   // from 2t and 4t
    double exponent_extrapolated = 0;
};

SeifertProbe seifert_scaling_probe(double x, double y, const MassParams& mp, double h, double t = 1e-3);

} // namespace brakelab
