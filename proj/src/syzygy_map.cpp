#include "brakelab/syzygy_map.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "brakelab/parallel.hpp"

namespace brakelab {

namespace {
constexpr double pi = std::numbers::pi;

double min_rho(const PotentialEval& e) { return std::min({e.rho12, e.rho13, e.rho23}); }
} // namespace

int syzygy_type(const PotentialEval& e) {
    if (e.rho12 >= e.rho13 && e.rho12 >= e.rho23) return 3;
    if (e.rho13 >= e.rho23) return 2;
    return 1;
}

SyzygyRecord next_syzygy(const ReducedState& start, double t_start, const MassParams& mp, double h,
                         const SyzygyOptions& opt) {
    Vec<7> y0;
    auto a = start.arr();
    std::copy(a.begin(), a.end(), y0.begin());
    y0[6] = t_start;

    std::vector<EventSpec<7>> ev(2);
    ev[0].name = "syzygy";
    ev[0].g = [](double, const Vec<7>& s) { return 1 - s[2] * s[2] - s[3] * s[3]; };
    ev[0].direction = Crossing::falling;
    ev[0].terminal = true;
    ev[1].name = "collision guard";
    ev[1].g = [&](double, const Vec<7>& s) { return min_rho(shape_potential(s[2], s[3], mp)) - opt.collision_guard; };
    ev[1].direction = Crossing::falling;
    ev[1].terminal = true;
    ev[1].tol = 1e-10;

    SyzygyRecord rec;
    double zprev = 1 - start.x * start.x - start.y * start.y;
    rec.max_idot = -std::numeric_limits<double>::infinity();
    IntegrateOptions<7> io;
    io.tol = opt.tol;
    io.record_steps = false;
    if (opt.check_monotone) {
        io.on_step = [&](const DenseStep<7>& d, const Vec<7>&) {
            for (double f : {0.25, 0.5, 0.75, 1.0}) {
                Vec<7> s = d.eval(d.t0 + f * d.h);
                double z = 1 - s[2] * s[2] - s[3] * s[3];
                if (z > zprev + 1e-12) rec.z_monotone = false;
                zprev = std::min(zprev, z);
                if (s[0] > 0) rec.max_idot = std::max(rec.max_idot, 2 * std::sqrt(s[0]) * s[1]);
            }
            return true;
        };
    }
    auto field = [&](double, const Vec<7>& s) { return blowup_field_t(s, mp, h); };
    auto tr = integrate<7>(field, 0.0, y0, opt.s_horizon, io, ev);
    rec.steps = tr.stats.steps;
    if (tr.reason != StopReason::terminal_event) {
        std::ostringstream os;
        os << "no syzygy reached (" << stop_reason_name(tr.reason) << ")";
        if (!tr.diagnostic.empty()) os << ": " << tr.diagnostic;
        const auto& ye = tr.y_end();
        os << "; last state r=" << ye[0] << " x=" << ye[2] << " y=" << ye[3];
        fail(tr.reason == StopReason::step_underflow ? Errc::step_underflow : Errc::no_syzygy, os.str());
    }
    const auto& hit = tr.hits.back();
    rec.collision = hit.event == 1;
    rec.state = ReducedState::from(hit.y);
    rec.s0 = hit.t;
    rec.t0 = hit.y[6];
    rec.r = hit.y[0];
    rec.angle = std::atan2(hit.y[3], hit.y[2]);
    rec.near_triple = rec.r < opt.near_triple_r;
    rec.type = syzygy_type(shape_potential(hit.y[2], hit.y[3], mp));
    return rec;
}

SyzygyRecord first_syzygy(double x0, double y0, const MassParams& mp, double h, const SyzygyOptions& opt) {
    if (x0 == 0 && y0 == 0) fail(Errc::no_syzygy, "Lagrange homothetic orbit: no syzygy");
    return next_syzygy(brake_lift(x0, y0, mp, h), 0.0, mp, h, opt);
}

std::vector<ScanRow> image_scan(int n_lat, int n_lon, const MassParams& mp, double h, int threads,
                                const SyzygyOptions& opt) {
    if (n_lat < 1 || n_lon < 1) fail(Errc::invalid_argument, "scan grid must be at least 1x1");
    std::vector<ScanRow> rows(static_cast<std::size_t>(n_lat) * n_lon);
    parallel_for(rows.size(), threads, [&](std::size_t k) {
        ScanRow& row = rows[k];
        row.lat_index = k / n_lon;
        row.lon_index = k % n_lon;
        row.latitude = pi / 2 * (row.lat_index + 0.5) / n_lat;
        row.longitude = 2 * pi * row.lon_index / n_lon;
        double rho = std::tan((pi / 2 - row.latitude) / 2);
        row.x0 = rho * std::cos(row.longitude);
        row.y0 = rho * std::sin(row.longitude);
        try {
            row.rec = first_syzygy(row.x0, row.y0, mp, h, opt);
            row.ok = true;
            row.status = row.rec.collision ? "collision" : row.rec.near_triple ? "near_triple" : "ok";
        } catch (const Error& e) {
            row.status = errc_name(e.code());
        }
    });
    return rows;
}

WindingResult winding_degree(double radius, int n_samples, const MassParams& mp, double h, int orientation,
                             int threads, const SyzygyOptions& opt) {
    if (!(radius > 0 && radius < 1)) fail(Errc::invalid_argument, "winding radius must lie in (0, 1)");
    if (n_samples < 3) fail(Errc::invalid_argument, "need at least 3 samples");
    if (orientation != 1 && orientation != -1) fail(Errc::invalid_argument, "orientation must be +1 or -1");
    auto angle_at = [&](double p) {
        double a = orientation * p;
        auto rec = first_syzygy(radius * std::cos(a), radius * std::sin(a), mp, h, opt);
        return std::pair{rec.angle, rec.r};
    };
    std::vector<double> p(n_samples + 1), ang(n_samples + 1), rr(n_samples + 1);
    std::vector<std::string> errs(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t k) {
        p[k] = 2 * pi * k / n_samples;
        try {
            std::tie(ang[k], rr[k]) = angle_at(p[k]);
        } catch (const Error& e) {
            errs[k] = e.what();
        }
    });
    for (int k = 0; k < n_samples; ++k)
        if (!errs[k].empty()) fail(Errc::no_syzygy, "winding sample " + std::to_string(k) + ": " + errs[k]);
    p[n_samples] = 2 * pi;
    ang[n_samples] = ang[0];
    rr[n_samples] = rr[0];

    WindingResult res;
    std::function<void(double, double, double, double, int)> walk = [&](double pa, double aa, double pb, double ab,
                                                                         int depth) {
        double d = std::remainder(ab - aa, 2 * pi);
        if (std::abs(d) > 2 * pi / 3 && depth < 30) {
            double pm = 0.5 * (pa + pb);
            auto [am, rm] = angle_at(pm);
            walk(pa, aa, pm, am, depth + 1);
            res.params.push_back(pm);
            res.angles.push_back(am);
            res.radii.push_back(rm);
            walk(pm, am, pb, ab, depth + 1);
            return;
        }
        res.total_turn += d;
    };
    for (int k = 0; k < n_samples; ++k) {
        res.params.push_back(p[k]);
        res.angles.push_back(ang[k]);
        res.radii.push_back(rr[k]);
        walk(p[k], ang[k], p[k + 1], ang[k + 1], 0);
    }
    res.samples = res.params.size();
    res.degree = static_cast<int>(std::lround(res.total_turn / (2 * pi)));
    return res;
}

IdotReport idot_monotonicity_probe(const std::vector<std::array<double, 2>>& starts, const MassParams& mp, double h,
                                   int threads, const SyzygyOptions& opt) {
    struct One {
        bool ok = false, monotone = true;
        double idot = 0;
        std::string err;
    };
    SyzygyOptions o = opt;
    o.check_monotone = true;
    std::vector<One> out(starts.size());
    parallel_for(starts.size(), threads, [&](std::size_t k) {
        try {
            auto rec = first_syzygy(starts[k][0], starts[k][1], mp, h, o);
            out[k].ok = true;
            out[k].monotone = rec.z_monotone;
            out[k].idot = rec.max_idot;
        } catch (const Error& e) {
            out[k].err = e.what();
        }
    });
    IdotReport rep;
    rep.samples = starts.size();
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::ostringstream os;
        os << "start (" << starts[k][0] << ", " << starts[k][1] << "): ";
        if (!out[k].ok) {
            ++rep.failures;
            rep.notes.push_back(os.str() + out[k].err);
            continue;
        }
        rep.max_idot = std::max(rep.max_idot, out[k].idot);
        if (out[k].idot >= 0) {
            ++rep.violations;
            os << "Idot reached " << out[k].idot;
            rep.notes.push_back(os.str());
        }
        if (!out[k].monotone) {
            ++rep.nonmonotone;
            rep.notes.push_back(os.str() + "z increased before the syzygy");
        }
    }
    return rep;
}

std::vector<std::array<double, 2>> sample_disk(std::size_t n, std::uint64_t seed, double exclude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<std::array<double, 2>> pts;
    pts.reserve(n);
    while (pts.size() < n) {
        double x = u(rng), y = u(rng);
        if (x * x + y * y >= 1) continue;
        double d = std::hypot(x, y);
        for (double a : {collision_angle12, collision_angle13, collision_angle23})
            d = std::min(d, std::hypot(x - std::cos(a), y - std::sin(a)));
        if (d < exclude) continue;
        pts.push_back({x, y});
    }
    return pts;
}

} // namespace brakelab
