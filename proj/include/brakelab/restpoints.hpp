#pragma once
#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "brakelab/dynamics.hpp"

namespace brakelab {

enum class RestKind { lagrange, euler };

struct Linearization {
    Eigen::Matrix<double, 6, 6> J;    // analytic
    Eigen::Matrix<double, 6, 6> J_fd; // central differences
    double fd_rel_error = 0;
    Eigen::Matrix<double, 6, 5> basis; // orthonormal kernel of the energy differential
    Eigen::Matrix<double, 5, 5> restricted;
    double invariance_residual = 0; // |(I - B B^T) J B|
    std::vector<cplx> eigenvalues;  // 5, sorted by real part
    std::vector<Eigen::Matrix<cplx, 6, 1>> eigenvectors;
    int homothety_index = -1;
    int n_stable = 0, n_unstable = 0;
    bool degenerate = false; // some eigenvalue with |Re| < 1e-9 or a near-double root
    int unstable_shape_rank = 0;
};

struct Restpoint {
    RestKind kind = RestKind::lagrange;
    int interior_mass = 0; // Euler only
    int sign = -1;         // sign of v
    double x = 0, y = 0, v = 0;
    Vec<6> state{};
    Linearization lin;
    // Euler + only
    bool spiral_tested = false;
    bool spiraling = false;
    bool indeterminate = false;
    double discriminant = 0; // v^2/16 + mu_n/kappa; negative means spiraling

    std::string name() const;
};

// Lagrange +-, then Euler +- in arc order. The second Lagrange pair sits at infinity of the chart and is not listed.
std::vector<Restpoint> find_restpoints(const MassParams& mp, double h);
Restpoint make_restpoint(RestKind kind, int interior_mass, int sign, double x, double y, const MassParams& mp,
                         double h);
Linearization linearize(const Vec<6>& state, const MassParams& mp, double h);

struct SpiralResult {
    std::array<double, 3> angle{};
    std::array<int, 3> interior_mass{};
    std::array<bool, 3> spiraling{};
    std::array<bool, 3> indeterminate{};
    std::array<double, 3> discriminant{};
    std::array<std::vector<cplx>, 3> eigenvalues;
    int count() const { return spiraling[0] + spiraling[1] + spiraling[2]; }
};

SpiralResult spiraling_test(const MassParams& mp);

struct SpiralScanRow {
    double m1 = 0, m2 = 0, m3 = 0; // normalized to total mass 1
    SpiralResult res;
    bool ok = false;
    std::string error;
};

// all (i, j, k) / n with i + j + k = n and i, j, k >= 1
std::vector<SpiralScanRow> spiraling_scan(int n, int threads = 1);

} // namespace brakelab
