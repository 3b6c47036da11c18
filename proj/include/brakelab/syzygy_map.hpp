#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "brakelab/dynamics.hpp"

namespace brakelab {

struct SyzygyOptions {
    Tolerances tol;
    double s_horizon = 1e3;
    double collision_guard = 1e-4; // on min rho_ij
    double near_triple_r = 1e-6;
    bool check_monotone = true;    // assert z nonincreasing and Idot < 0 after the start
};

struct SyzygyRecord {
    double angle = 0;           // collinear angle on the unit circle
    double r = 0;
    ReducedState state;
    double s0 = 0, t0 = 0;
    bool collision = false;     // stopped by the binary-collision guard
    bool near_triple = false;
    int type = 0;               // interior mass
    bool z_monotone = true;
    double max_idot = 0;        // over the arc after the start
    std::size_t steps = 0;
};

int syzygy_type(const PotentialEval& e);

SyzygyRecord first_syzygy(double x0, double y0, const MassParams& mp, double h, const SyzygyOptions& opt = {});
// follows an arbitrary blown-up state (physical time t_start) to its next syzygy
SyzygyRecord next_syzygy(const ReducedState& start, double t_start, const MassParams& mp, double h,
                         const SyzygyOptions& opt);

struct ScanRow {
    std::size_t lat_index = 0, lon_index = 0;
    double latitude = 0, longitude = 0;
    double x0 = 0, y0 = 0;
    bool ok = false;
    std::string status;
    SyzygyRecord rec;
};

// latitudes on the upper hemisphere: (pi/2) (i + 1/2) / n_lat; longitudes 2 pi j / n_lon
std::vector<ScanRow> image_scan(int n_lat, int n_lon, const MassParams& mp, double h, int threads = 1,
                                const SyzygyOptions& opt = {});

struct WindingResult {
    int degree = 0;
    double total_turn = 0; // radians
    std::size_t samples = 0;
    std::vector<double> params, angles, radii;
};

// circle of the given radius in the (x, y) disk, orientation +1 counterclockwise or -1
WindingResult winding_degree(double radius, int n_samples, const MassParams& mp, double h, int orientation = 1,
                             int threads = 1, const SyzygyOptions& opt = {});

struct IdotReport {
    std::size_t samples = 0;
    std::size_t violations = 0;
    std::size_t failures = 0;
    std::size_t nonmonotone = 0;
    double max_idot = -1e300;
    std::vector<std::string> notes;
};

// uniform points in the unit disk farther than `exclude` from the origin and the collision points
std::vector<std::array<double, 2>> sample_disk(std::size_t n, std::uint64_t seed, double exclude);

IdotReport idot_monotonicity_probe(const std::vector<std::array<double, 2>>& starts, const MassParams& mp, double h,
                                   int threads = 1, const SyzygyOptions& opt = {});

} // namespace brakelab
