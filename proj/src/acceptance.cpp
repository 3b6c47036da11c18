#include "brakelab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "brakelab/isosceles.hpp"
#include "brakelab/jm.hpp"
#include "brakelab/restpoints.hpp"
#include "brakelab/syzygy_map.hpp"
#include "brakelab/trajectory.hpp"

namespace brakelab {

namespace {

constexpr double pi = std::numbers::pi;

struct Check {
    std::ostringstream detail;
    bool pass = true;

    void expect(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "FAILED ") << what;
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void potential_identities(Check& c, const AcceptanceOptions& opt) {
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        double worst = 0, min_phi = 1e300;
        for (auto& p : sample_disk(10000, opt.seed, 0)) {
            PotentialEval e = shape_potential(p[0], p[1], mp);
            double phi = radial_factor(p[0], p[1], mp);
            double lhs = p[0] * e.Vx + p[1] * e.Vy, rhs = phi * (1 - p[0] * p[0] - p[1] * p[1]);
            double scale = std::abs(p[0] * e.Vx) + std::abs(p[1] * e.Vy);
            if (scale > 0) worst = std::max(worst, std::abs(lhs - rhs) / scale);
            min_phi = std::min(min_phi, phi);
        }
        std::string tag = "masses (" + fmt("%g", m[0]) + "," + fmt("%g", m[1]) + "," + fmt("%g", m[2]) + ")";
        c.expect(worst <= 1e-8, tag + " radial identity rel err " + fmt("%.2e", worst) + " <= 1e-8");
        c.expect(min_phi >= 0, tag + " min phi " + fmt("%.3e", min_phi) + " >= 0");
    }
    auto mp = derive_mass_params(1, 1, 1);
    double v0 = shape_potential(0, 0, mp).V, v1 = shape_potential(-1, 0, mp).V;
    c.expect(std::abs(v0 - 3) <= 1e-12, "V(0,0) - 3 = " + fmt("%.1e", v0 - 3));
    c.expect(std::abs(v1 - 5 / std::sqrt(2.0)) <= 1e-12, "V(-1,0) - 5/sqrt2 = " + fmt("%.1e", v1 - 5 / std::sqrt(2.0)));
}

void oracle_equivalence(Check& c, const AcceptanceOptions& opt) {
    auto mp = derive_mass_params(1, 1, 1);
    Tolerances tol;
    tol.rtol = 1e-12;
    tol.atol = 1e-14;
    std::mt19937_64 rng(opt.seed + 2);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst = 0;
    int done = 0, skipped = 0;
    while (done < 20) {
        double x = u(rng), y = u(rng);
        if (x * x + y * y >= 0.95) continue;
        PotentialEval e = shape_potential(x, y, mp);
        if (std::min({e.rho12, e.rho13, e.rho23}) < 0.1) continue;
        try {
            auto oc = compare_with_newtonian(x, y, mp, 1.0, 1.0, 41, tol);
            worst = std::max(worst, oc.max_dev);
            ++done;
        } catch (const Error&) {
            // reaches a close encounter within one time unit; drawn again
            if (++skipped > 100) break;
        }
    }
    c.expect(done == 20, std::to_string(done) + " brake starts compared (" + std::to_string(skipped) + " redrawn)");
    c.expect(worst <= 1e-6, "max |d(r,x,y)| " + fmt("%.2e", worst) + " <= 1e-6");
}

void syzygy_existence(Check& c, const AcceptanceOptions& opt) {
    auto mp = derive_mass_params(1, 1, 1);
    auto rep = idot_monotonicity_probe(sample_disk(1000, opt.seed + 3, 0.02), mp, 1.0, opt.threads);
    c.expect(rep.samples == 1000, std::to_string(rep.samples) + " starts");
    c.expect(rep.failures == 0, std::to_string(rep.failures) + " without a syzygy");
    c.expect(rep.nonmonotone == 0, std::to_string(rep.nonmonotone) + " with z not monotone");
    c.expect(rep.violations == 0, std::to_string(rep.violations) + " Idot sign violations (max Idot " +
                                      fmt("%.3e", rep.max_idot) + ")");
}

void degree_one(Check& c, const AcceptanceOptions& opt) {
    for (auto m : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{1, 2, 10}}) {
        auto mp = derive_mass_params(m[0], m[1], m[2]);
        auto w = winding_degree(0.05, 64, mp, 1.0, 1, opt.threads);
        c.expect(w.degree == 1, "masses (" + fmt("%g", m[0]) + "," + fmt("%g", m[1]) + "," + fmt("%g", m[2]) +
                                    ") degree " + std::to_string(w.degree) + " from " + std::to_string(w.samples) +
                                    " samples");
    }
}

void restpoint_checks(Check& c, const AcceptanceOptions&) {
    auto mp = derive_mass_params(1, 1, 1);
    auto rps = find_restpoints(mp, 1.0);
    int spiraling = 0;
    for (const auto& p : rps) {
        if (p.kind == RestKind::lagrange) {
            double err = std::abs(p.v - p.sign * std::sqrt(6.0));
            c.expect(err <= 1e-10, p.name() + " v = " + fmt("%.12f", p.v));
            if (p.sign < 0)
                c.expect(p.lin.n_stable == 3 && p.lin.n_unstable == 2,
                         "L- dims (" + std::to_string(p.lin.n_stable) + "," + std::to_string(p.lin.n_unstable) + ")");
        } else if (p.sign < 0) {
            c.expect(p.lin.n_stable == 2 && p.lin.n_unstable == 3, p.name() + " dims (" +
                                                                         std::to_string(p.lin.n_stable) + "," +
                                                                         std::to_string(p.lin.n_unstable) + ")");
        } else {
            spiraling += p.spiraling && !p.indeterminate;
        }
    }
    c.expect(spiraling == 3, std::to_string(spiraling) + " of 3 E+ spiraling");
}

void branch_bounds(Check& c, const AcceptanceOptions&) {
    BranchOptions bo;
    bo.tol.rtol = 1e-10;
    auto g = trace_branch(Branch::gamma, 1.0, bo);
    auto gp = trace_branch(Branch::gamma_prime, 1.0, bo);
    const double s3 = std::sqrt(3.0);
    c.expect(gp.v3 <= -1.3, "v_gamma'(0) = " + fmt("%.6f", gp.v3) + " <= -1.3");
    c.expect(g.v_3pi4 <= -1.6, "v_gamma(-3pi/4) = " + fmt("%.6f", g.v_3pi4) + " <= -1.6");
    c.expect(g.v1 - g.v_3pi4 <= 1.56, "increment " + fmt("%.6f", g.v1 - g.v_3pi4) + " <= 1.56");
    c.expect(g.v1 >= -s3 && g.v1 < 0, "v_gamma(-pi/2) = " + fmt("%.6f", g.v1) + " in [-sqrt3, 0)");
    c.expect(g.v2 >= (pi / 2 - 1) * s3, "v_gamma(0) = " + fmt("%.6f", g.v2) + " >= (pi/2-1) sqrt3");
}

void admissibility_interval(Check& c, const AcceptanceOptions& opt) {
    std::vector<double> grid;
    for (int i = 0; i <= 200; ++i) grid.push_back(1.0 + 4.0 * i / 200);
    auto scan = admissibility_scan(grid, opt.threads);
    double lo = NAN, hi = NAN;
    for (std::size_t i = 0; i + 1 < scan.size(); ++i)
        if (scan[i].admissible != scan[i + 1].admissible) {
            lo = scan[i].m3;
            hi = scan[i + 1].m3;
            break;
        }
    if (std::isnan(lo)) {
        std::string lower;
        try {
            lower = ", lower flag change at m3 = " + fmt("%.4f", admissibility_threshold(0.3, 1.0).value);
        } catch (const Error&) {
        }
        c.expect(false, "admissible on all of [1, 5] (" + std::to_string(scan.size()) +
                            " masses); no upper threshold to bisect" + lower);
        return;
    }
    auto t = admissibility_threshold(lo, hi, 1e-4);
    c.expect(std::abs(t.value - 2.662) <= 0.01, "upper threshold " + fmt("%.4f", t.value) + " vs 2.662 +- 0.01");
}

void periodic_orbit(Check& c, const AcceptanceOptions& opt) {
    auto ps = find_periodic_brake(1.0, 200, opt.threads);
    const double ts = iso_theta_star(1.0);
    const PeriodicBrakeOrbit* hit = nullptr;
    for (const auto& o : ps.orbits)
        if (o.theta0 > ts - pi && o.theta0 < -pi / 2) {
            hit = &o;
            break;
        }
    c.expect(hit != nullptr, std::to_string(ps.orbits.size()) + " candidate orbits");
    if (!hit) return;
    c.expect(true, "theta0 = " + fmt("%.12f", hit->theta0));
    c.expect(std::abs(hit->v_second) < 1e-10, "|v(0)| = " + fmt("%.2e", std::abs(hit->v_second)) + " < 1e-10");
    c.expect(hit->closure_error < 1e-6, "4 T2 closure " + fmt("%.2e", hit->closure_error) + " < 1e-6");
    c.expect(hit->v_first < 0, "v at first syzygy " + fmt("%.6f", hit->v_first) + " < 0");
}

void jm_action_checks(Check& c, const AcceptanceOptions&) {
    auto mp = derive_mass_params(1, 1, 1);
    auto homothetic = [&](int N) {
        DiscretePath p;
        for (int i = 0; i <= N; ++i) p.nodes.push_back({3.0 * i / N, 0, 0});
        return jm_action(p, mp, 1.0);
    };
    double a2 = homothetic(2048), a4 = homothetic(4096);
    double rich = (4 * a4 - a2) / 3;
    c.expect(std::abs(rich - 1.5 * pi) < 1e-4, "homothetic N=4096 Richardson error " + fmt("%.2e", rich - 1.5 * pi));
    DiscretePath b;
    b.end = EndTag::hill_boundary;
    for (int i = 0; i <= 200; ++i) {
        double a = 2 * pi * i / 200;
        double x = 0.4 * std::cos(a), y = 0.4 * std::sin(a) + 0.1;
        b.nodes.push_back({shape_potential(x, y, mp).V, x, y});
    }
    double ab = jm_action(b, mp, 1.0);
    c.expect(ab == 0.0, "boundary path action " + fmt("%g", ab));
    auto sp = seifert_scaling_probe(0.2, 0.1, mp, 1.0, 1e-3);
    c.expect(std::abs(sp.exponent_extrapolated - 1.5) <= 0.01,
             "Seifert exponent " + fmt("%.6f", sp.exponent_extrapolated) + " (ratio " + fmt("%.6f", sp.ratio) + ")");
}

void jm_structure(Check& c, const AcceptanceOptions& opt) {
    auto mp = derive_mass_params(1, 1, 1);
    JMOptions jo;
    jo.seed = opt.seed;
    jo.threads = opt.threads;
    {
        auto run = minimize_to_boundary({1.0, 1.0, 0.0}, 64, mp, 1.0, jo);
        double worst = 0;
        for (const auto& m : run.minima)
            for (const auto& n : m.path.nodes) {
                PotentialEval e = shape_potential(n.x, n.y, mp);
                if (!e.at_collision) worst = std::max(worst, std::abs(e.rho13 - e.rho23));
            }
        c.expect(worst < 1e-3, "binary start: max|rho13-rho23| " + fmt("%.2e", worst) + " over " +
                                   std::to_string(run.minima.size()) + " minima");
    }
    {
        auto run = minimize_to_boundary({0.0, 0.2, 0.1}, 64, mp, 1.0, jo);
        double worst = 0;
        for (const auto& n : run.best().path.nodes) worst = std::max(worst, std::hypot(n.x, n.y));
        c.expect(worst < 1e-3, "triple start: max shape distance from (0,0) " + fmt("%.2e", worst));
    }
    int checked = 0, bad = 0;
    for (double ang : {pi / 2, 1.0, -2.0, 2.8}) {
        double x = std::cos(ang), y = std::sin(ang);
        double r0 = 0.5 * shape_potential(x, y, mp).V;
        auto run = minimize_to_boundary({r0, x, y}, 64, mp, 1.0, jo);
        for (const auto& m : run.minima) {
            double zmin = 1e300, zmax = -1e300;
            for (std::size_t i = 1; i < m.path.nodes.size(); ++i) {
                double z = 1 - m.path.nodes[i].x * m.path.nodes[i].x - m.path.nodes[i].y * m.path.nodes[i].y;
                zmin = std::min(zmin, z);
                zmax = std::max(zmax, z);
            }
            if (std::max(std::abs(zmin), std::abs(zmax)) < 1e-9) continue; // collinear minimizer
            ++checked;
            if (!(zmin > 0 || zmax < 0)) ++bad;
        }
    }
    c.expect(checked > 0 && bad == 0, "collinear starts: " + std::to_string(bad) + " of " + std::to_string(checked) +
                                          " non-collinear minimizers with an interior syzygy");
}

void image_containment(Check& c, const AcceptanceOptions& opt) {
    auto mp = derive_mass_params(1, 1, 1);
    const int n_lat = 20, n_lon = 36;
    auto rows = image_scan(n_lat, n_lon, mp, 1.0, opt.threads);
    std::size_t failed = 0;
    for (const auto& r : rows) failed += !r.ok;
    c.expect(failed == 0, std::to_string(failed) + " of " + std::to_string(rows.size()) + " scan points failed");
    // binary-collision rays: collision hits on each ray and image points on both sides at every compressed radius
    int missing = 0;
    for (double ac : {collision_angle12, collision_angle13, collision_angle23}) {
        bool on_ray = false;
        for (const auto& r : rows)
            if (r.ok && r.rec.collision && std::abs(std::remainder(r.rec.angle - ac, 2 * pi)) < 1e-9) on_ray = true;
        missing += !on_ray;
        for (double lo = 0.25; lo < 1.5 - 1e-12; lo += 0.25)
            for (int side : {1, -1}) {
                bool found = false;
                for (const auto& r : rows) {
                    if (!r.ok || r.rec.collision) continue;
                    double cr = std::atan(r.rec.r), d = side * std::remainder(r.rec.angle - ac, 2 * pi);
                    if (cr >= lo && cr < lo + 0.25 && d > 0 && d < 0.35) found = true;
                }
                missing += !found;
            }
    }
    c.expect(missing == 0, "collision-ray neighbourhoods: " + std::to_string(missing) + " empty cells of 33");
    // the highest latitude ring maps to a small loop around the origin
    double cmax = 0, turn = 0, prev = NAN, first = NAN;
    for (const auto& r : rows) {
        if (static_cast<int>(r.lat_index) != n_lat - 1 || !r.ok) continue;
        cmax = std::max(cmax, std::atan(r.rec.r));
        if (std::isnan(prev)) first = r.rec.angle;
        else turn += std::remainder(r.rec.angle - prev, 2 * pi);
        prev = r.rec.angle;
    }
    turn += std::remainder(first - prev, 2 * pi);
    double overall = 0;
    for (const auto& r : rows)
        if (r.ok) overall = std::max(overall, std::atan(r.rec.r));
    c.expect(cmax < 0.25 * overall, "top ring max atan(r) " + fmt("%.3f", cmax) + " < 1/4 of scan max " +
                                        fmt("%.3f", overall));
    c.expect(std::lround(turn / (2 * pi)) == 1, "top ring winds " + fmt("%.3f", turn / (2 * pi)) + " times");
}

struct Entry {
    int id;
    const char* name;
    double limit;
    void (*fn)(Check&, const AcceptanceOptions&);
};

const std::vector<Entry>& table() {
    static const std::vector<Entry> t = {
        {1, "potential identities", 5, potential_identities},
        {2, "reduced vs Newtonian", 30, oracle_equivalence},
        {3, "syzygy existence", 300, syzygy_existence},
        {4, "degree one", 120, degree_one},
        {5, "restpoints", 10, restpoint_checks},
        {6, "isosceles branch bounds", 10, branch_bounds},
        {7, "admissibility interval", 120, admissibility_interval},
        {8, "periodic brake orbit", 60, periodic_orbit},
        {9, "JM action", 0, jm_action_checks},
        {10, "JM minimizer structure", 300, jm_structure},
        {11, "image containments", 0, image_containment},
    };
    return t;
}

const Entry& entry(int id) {
    for (const auto& e : table())
        if (e.id == id) return e;
    fail(Errc::invalid_argument, "no acceptance criterion " + std::to_string(id));
}

} // namespace

std::vector<int> criterion_ids() {
    std::vector<int> ids;
    for (const auto& e : table()) ids.push_back(e.id);
    return ids;
}

std::string criterion_name(int id) { return entry(id).name; }
double criterion_time_limit(int id) { return entry(id).limit; }

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
    const Entry& e = entry(id);
    CriterionResult res;
    res.id = id;
    res.name = e.name;
    res.limit_seconds = e.limit;
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
        e.fn(c, opt);
    } catch (const Error& err) {
        c.expect(false, std::string("error ") + errc_name(err.code()) + ": " + err.what());
    } catch (const std::exception& err) {
        c.expect(false, std::string("exception: ") + err.what());
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (e.limit > 0) c.expect(res.seconds < e.limit, "runtime " + fmt("%.2f", res.seconds) + " s < " + fmt("%g", e.limit) + " s");
    res.pass = c.pass;
    res.detail = c.detail.str();
    return res;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result) {
    std::vector<CriterionResult> out;
    for (int id : ids) {
        out.push_back(run_criterion(id, opt));
        if (on_result) on_result(out.back());
    }
    return out;
}

std::string format_result(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.name << ") " << fmt("%.2f", r.seconds)
       << " s: " << r.detail;
    return os.str();
}

} // namespace brakelab
