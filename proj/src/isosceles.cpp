#include "brakelab/isosceles.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "brakelab/parallel.hpp"

namespace brakelab {

namespace {
constexpr double pi = std::numbers::pi;

double theta_rest(Branch which, double m3) {
    double ts = iso_theta_star(m3);
    return which == Branch::gamma ? ts - pi : -ts;
}

double V2(double th, double m3) {
    const double d = 1e-3;
    return (-iso_V(th + 2 * d, m3) + 16 * iso_V(th + d, m3) - 30 * iso_V(th, m3) + 16 * iso_V(th - d, m3) -
            iso_V(th - 2 * d, m3)) /
           (12 * d * d);
}
} // namespace

double branch_start_beta(Branch which, double m3) {
    double th = theta_rest(which, m3);
    double S = std::sin(th), C = std::cos(th), A = 1 + S * S;
    double vs = std::sqrt(2 * iso_V(th, m3));
    double k = std::abs(C) / A, k2 = k * k;
    return (k2 * vs + std::sqrt(k2 * k2 * vs * vs + 4 * k2 * V2(th, m3))) / 4;
}

BranchTrace trace_branch(Branch which, double m3, const BranchOptions& opt) {
    if (!(m3 > 0)) fail(Errc::invalid_argument, "m3 must be positive");
    BranchTrace bt;
    bt.which = which;
    bt.m3 = m3;
    double th0 = theta_rest(which, m3);
    double vs = std::sqrt(2 * iso_V(th0, m3));
    bt.beta = branch_start_beta(which, m3);
    bt.theta_start = th0 + opt.delta;
    bt.v_start = -vs + bt.beta * opt.delta * opt.delta;

    auto field = [&](double th, const Vec<1>& v) -> Vec<1> {
        double C = std::cos(th), S = std::sin(th), A = 1 + S * S;
        double rad = 2 * iso_W(th, m3) - v[0] * v[0] * C * C;
        return {std::sqrt(std::max(rad, 0.0)) / A};
    };
    std::vector<EventSpec<1>> ev(1);
    ev[0].name = "leaves w > 0";
    ev[0].g = [&](double th, const Vec<1>& v) {
        double C = std::cos(th);
        return 2 * iso_W(th, m3) - v[0] * v[0] * C * C;
    };
    ev[0].direction = Crossing::falling;
    ev[0].terminal = true;
    IntegrateOptions<1> io;
    io.tol = opt.tol;
    io.keep_dense = true;
    auto tr = integrate<1>(field, bt.theta_start, Vec<1>{bt.v_start}, 0.0, io, ev);
    if (tr.reason != StopReason::completed && tr.reason != StopReason::terminal_event)
        fail(Errc::not_converged, std::string("branch integration failed: ") + stop_reason_name(tr.reason) + " " +
                                      tr.diagnostic);
    double th_end = 0;
    if (tr.reason == StopReason::terminal_event) {
        bt.terminated = true;
        bt.theta_term = tr.hits.back().t;
        bt.v_term = tr.hits.back().y[0];
        th_end = bt.theta_term;
    }
    auto v_at = [&](double th) { return (th <= th_end) ? tr.at(th)[0] : NAN; };
    int n = std::max(opt.samples, 2);
    double prev = -INFINITY;
    for (int i = 0; i <= n; ++i) {
        double th = bt.theta_start + (th_end - bt.theta_start) * i / n;
        double v = i == n ? tr.y_end()[0] : tr.at(th)[0];
        bt.curve.push_back({th, v});
        if (!(v > prev)) bt.monotone = false;
        prev = v;
        bt.max_domain_excess = std::max(bt.max_domain_excess, v * v - 2 * iso_V(th, m3));
    }
    if (which == Branch::gamma) {
        if (-3 * pi / 4 > bt.theta_start) bt.v_3pi4 = v_at(-3 * pi / 4);
        bt.v1 = v_at(-pi / 2);
        if (!bt.terminated) bt.v2 = tr.y_end()[0];
    } else if (!bt.terminated) {
        bt.v3 = tr.y_end()[0];
    }
    return bt;
}

Admissibility admissible(double m3, const BranchOptions& opt) {
    Admissibility a;
    a.m3 = m3;
    auto g = trace_branch(Branch::gamma, m3, opt);
    auto gp = trace_branch(Branch::gamma_prime, m3, opt);
    a.v1 = g.v1;
    a.v2 = g.v2;
    a.v3 = gp.v3;
    std::ostringstream os;
    if (g.terminated) os << "gamma leaves w>0 at theta=" << g.theta_term << "; ";
    if (gp.terminated) os << "gamma' leaves w>0 at theta=" << gp.theta_term << "; ";
    if (!(a.v1 < 0)) os << "v1=" << a.v1 << " not < 0; ";
    if (!(a.v2 > 0)) os << "v2=" << a.v2 << " not > 0; ";
    if (!(a.v3 < 0)) os << "v3=" << a.v3 << " not < 0; ";
    a.reason = os.str();
    a.admissible = a.reason.empty();
    if (!a.admissible) a.reason.resize(a.reason.size() - 2);
    return a;
}

std::vector<Admissibility> admissibility_scan(const std::vector<double>& m3s, int threads, const BranchOptions& opt) {
    std::vector<Admissibility> out(m3s.size());
    parallel_for(m3s.size(), threads, [&](std::size_t k) {
        try {
            out[k] = admissible(m3s[k], opt);
        } catch (const Error& e) {
            out[k].m3 = m3s[k];
            out[k].reason = e.what();
        }
    });
    return out;
}

Threshold admissibility_threshold(double a, double b, double tol, const BranchOptions& opt) {
    Threshold t;
    bool fa = admissible(a, opt).admissible, fb = admissible(b, opt).admissible;
    t.evaluations = 2;
    if (fa == fb) {
        std::ostringstream os;
        os << "admissibility is " << (fa ? "true" : "false") << " at both m3=" << a << " and m3=" << b;
        fail(Errc::no_bracket, os.str());
    }
    double lo = a, hi = b;
    while (std::abs(hi - lo) > tol) {
        double mid = 0.5 * (lo + hi);
        bool fm = admissible(mid, opt).admissible;
        ++t.evaluations;
        (fm == fa ? lo : hi) = mid;
    }
    t.lo = lo;
    t.hi = hi;
    t.lo_admissible = fa;
    t.value = 0.5 * (lo + hi);
    return t;
}

ShotResult shoot(double theta0, double m3, const Tolerances& tol, bool keep) {
    ShotResult res;
    res.theta0 = theta0;
    double ts = iso_theta_star(m3);
    IsoVec y0{iso_V(theta0, m3), 0, theta0, 0, 0};
    std::vector<EventSpec<5>> ev(3);
    ev[0].name = "theta = 0";
    ev[0].g = [](double, const IsoVec& y) { return y[2]; };
    ev[0].direction = Crossing::rising;
    ev[0].terminal = true;
    ev[1].name = "theta = -pi/2";
    ev[1].g = [](double, const IsoVec& y) { return y[2] + pi / 2; };
    ev[1].direction = Crossing::rising;
    ev[2].name = "w < 0";
    ev[2].g = [](double, const IsoVec& y) { return y[3]; };
    ev[2].direction = Crossing::falling;
    ev[2].terminal = true;
    IntegrateOptions<5> io;
    io.tol = tol;
    io.keep_dense = keep;
    auto tr = integrate<5>([&](double, const IsoVec& y) { return iso_field_t(y, m3); }, 0.0, y0, 1e3, io, ev);
    if (tr.reason != StopReason::terminal_event) {
        res.violation = std::string("shot ended without an event: ") + stop_reason_name(tr.reason);
        return res;
    }
    EventHit<5> hit;
    if (tr.hit(1, &hit)) {
        res.crossed_binary = true;
        res.v_binary = hit.y[1];
        res.s_binary = hit.t;
    }
    if (tr.hit(0, &hit)) {
        res.reached = true;
        res.v_zero = hit.y[1];
        res.T2 = hit.t;
    } else if (tr.hit(2, &hit)) {
        res.theta_turn = hit.y[2];
        double th = hit.y[2];
        bool in_I = th >= ts - pi && th <= -pi / 2, in_III = th >= -ts && th <= 0;
        if (in_I || in_III) {
            std::ostringstream os;
            os << "w turned negative inside " << (in_I ? "R_I" : "R_III") << " at theta=" << th
               << " (theta0=" << theta0 << ")";
            res.violation = os.str();
        }
    }
    if (keep) {
        double s_end = tr.t_end();
        int n = 4000;
        for (int i = 0; i <= n; ++i) {
            double s = s_end * i / n;
            res.seg.s.push_back(s);
            res.seg.y.push_back(i == n ? tr.y_end() : tr.at(s));
        }
    }
    return res;
}

IsoSegment reflect_orbit(const IsoSegment& seg, double L, Reflection kind, double s_pivot) {
    IsoSegment out;
    if (seg.s.empty()) return out;
    if (kind == Reflection::spatial) {
        out = seg;
        for (auto& y : out.y) {
            y[2] = 2 * L - y[2];
            y[3] = -y[3];
        }
        return out;
    }
    if (std::isnan(s_pivot)) s_pivot = seg.s.back();
    // physical time reflected about the time at the pivot sample, interpolated linearly
    double t_pivot = seg.y.back()[4];
    for (std::size_t i = 0; i + 1 < seg.s.size(); ++i)
        if ((seg.s[i] - s_pivot) * (seg.s[i + 1] - s_pivot) <= 0) {
            double f = (s_pivot - seg.s[i]) / (seg.s[i + 1] - seg.s[i]);
            t_pivot = seg.y[i][4] + f * (seg.y[i + 1][4] - seg.y[i][4]);
            break;
        }
    for (std::size_t k = seg.s.size(); k-- > 0;) {
        IsoVec y = seg.y[k];
        y[1] = -y[1];
        y[2] = 2 * L - y[2];
        y[4] = 2 * t_pivot - y[4];
        out.s.push_back(2 * s_pivot - seg.s[k]);
        out.y.push_back(y);
    }
    return out;
}

double segment_residual(const IsoSegment& seg, double m3) {
    double worst = 0;
    std::size_t n = seg.s.size();
    for (std::size_t i = 2; i + 2 < n; ++i) {
        double h = seg.s[i + 1] - seg.s[i];
        auto f = iso_field_t(seg.y[i], m3);
        for (int c = 0; c < 5; ++c) {
            double d = (-seg.y[i + 2][c] + 8 * seg.y[i + 1][c] - 8 * seg.y[i - 1][c] + seg.y[i - 2][c]) / (12 * h);
            worst = std::max(worst, std::abs(d - f[c]));
        }
    }
    return worst;
}

IsoSegment assemble_period(const PeriodicBrakeOrbit& orb) {
    IsoSegment half = orb.quarter;
    IsoSegment second = reflect_orbit(orb.quarter, 0.0, Reflection::reversing, orb.T2);
    for (std::size_t i = 1; i < second.s.size(); ++i) {
        half.s.push_back(second.s[i]);
        half.y.push_back(second.y[i]);
    }
    IsoSegment full = half;
    double sp = half.s.back(), tp = half.y.back()[4];
    for (std::size_t k = half.s.size() - 1; k-- > 0;) {
        IsoVec y = half.y[k];
        y[1] = -y[1];
        y[3] = -y[3];
        y[4] = 2 * tp - y[4];
        full.s.push_back(2 * sp - half.s[k]);
        full.y.push_back(y);
    }
    return full;
}

PeriodicSearch find_periodic_brake(double m3, int grid, int threads, const Tolerances& tol) {
    if (grid < 2) fail(Errc::invalid_argument, "grid needs at least 2 points");
    PeriodicSearch ps;
    double ts = iso_theta_star(m3);
    double a = ts - pi, b = -pi / 2;
    ps.grid.resize(grid);
    ps.v_profile.assign(grid, NAN);
    std::vector<ShotResult> shots(grid);
    parallel_for(grid, threads, [&](std::size_t i) {
        ps.grid[i] = a + (b - a) * (i + 1) / (grid + 1);
        shots[i] = shoot(ps.grid[i], m3, tol);
    });
    for (int i = 0; i < grid; ++i) {
        if (!shots[i].violation.empty()) fail(Errc::internal, "region-crossing assertion: " + shots[i].violation);
        if (shots[i].reached) ps.v_profile[i] = shots[i].v_zero;
    }
    auto f = [&](double th) {
        auto s = shoot(th, m3, tol);
        if (!s.violation.empty()) fail(Errc::internal, "region-crossing assertion: " + s.violation);
        if (!s.reached) fail(Errc::domain, "shot turned back inside the bracket");
        return s.v_zero;
    };
    for (int i = 0; i + 1 < grid; ++i) {
        double f0 = ps.v_profile[i], f1 = ps.v_profile[i + 1];
        if (std::isnan(f0) || std::isnan(f1) || (f0 > 0) == (f1 > 0)) continue;
        try {
            std::uintmax_t it = 200;
            auto stop = [](double x, double y) { return std::abs(y - x) < 1e-15; };
            auto [lo, hi] = boost::math::tools::toms748_solve(f, ps.grid[i], ps.grid[i + 1], f0, f1, stop, it);
            double th0 = std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
            auto shot = shoot(th0, m3, tol, true);
            PeriodicBrakeOrbit orb;
            orb.m3 = m3;
            orb.theta0 = th0;
            orb.r0 = iso_V(th0, m3);
            orb.T2 = shot.T2;
            orb.t2 = shot.seg.y.back()[4];
            orb.v_first = shot.v_binary;
            orb.s_first = shot.s_binary;
            orb.v_second = shot.v_zero;
            orb.quarter = shot.seg;

            Tolerances tight = tol;
            tight.rtol = std::min(tol.rtol, 1e-12);
            tight.atol = std::min(tol.atol, 1e-14);
            IsoVec y0 = orb.quarter.y.front();
            auto full = integrate<5>([&](double, const IsoVec& y) { return iso_field_t(y, m3); }, 0.0, y0,
                                     4 * orb.T2, IntegrateOptions<5>{tight});
            const auto& ye = full.y_end();
            orb.closure_error = 0;
            for (int c = 0; c < 4; ++c) orb.closure_error = std::max(orb.closure_error, std::abs(ye[c] - y0[c]));

            auto refl = reflect_orbit(orb.quarter, 0.0, Reflection::reversing, orb.T2);
            const IsoVec &yl = orb.quarter.y.back(), &yr = refl.y.front();
            auto fl = iso_field_t(yl, m3), fr = iso_field_t(yr, m3);
            orb.junction_error = 0;
            for (int c = 0; c < 4; ++c)
                orb.junction_error =
                    std::max({orb.junction_error, std::abs(yl[c] - yr[c]), std::abs(fl[c] - fr[c])});
            auto per = assemble_period(orb);
            orb.assembled_closure = 0;
            for (int c = 0; c < 4; ++c)
                orb.assembled_closure = std::max(orb.assembled_closure, std::abs(per.y.back()[c] - per.y.front()[c]));
            ps.orbits.push_back(std::move(orb));
        } catch (const Error& e) {
            std::ostringstream os;
            os << "bracket (" << ps.grid[i] << ", " << ps.grid[i + 1] << "): " << e.what();
            ps.notes.push_back(os.str());
        }
    }
    if (ps.orbits.empty()) {
        std::ostringstream os;
        os << "no sign change of v(theta=0) over the shooting grid; profile:";
        for (int i = 0; i < grid; ++i) os << " (" << ps.grid[i] << ", " << ps.v_profile[i] << ")";
        for (auto& n : ps.notes) os << "; " << n;
        fail(Errc::no_bracket, os.str());
    }
    return ps;
}

double newtonian_quarter_check(const PeriodicBrakeOrbit& orb, double margin) {
    const double m3 = orb.m3;
    MassParams mp = derive_mass_params(1, 1, m3);
    const auto& q = orb.quarter;
    double worst = 0;
    // two pieces, on either side of the binary collision
    std::vector<std::pair<std::size_t, std::size_t>> pieces;
    std::size_t i = 0, n = q.s.size();
    while (i < n) {
        while (i < n && std::abs(q.y[i][2] + pi / 2) <= margin) ++i;
        std::size_t j = i;
        while (j < n && std::abs(q.y[j][2] + pi / 2) > margin) ++j;
        if (j > i + 1) pieces.push_back({i, j});
        i = j;
    }
    for (auto [a, b] : pieces) {
        IsoVec ya = q.y[a];
        Vec<8> z0 = pack(iso_to_jacobi({ya[0], ya[1], ya[2], ya[3]}, m3));
        IntegrateOptions<8> io;
        io.keep_dense = true;
        io.tol.rtol = 1e-12;
        io.tol.atol = 1e-14;
        double t0 = ya[4], t1 = q.y[b - 1][4];
        auto tr = integrate<8>([&](double, const Vec<8>& z) { return newtonian_field(z, mp); }, t0, z0, t1, io);
        if (tr.reason != StopReason::completed) fail(Errc::not_converged, "Newtonian re-integration failed");
        for (std::size_t k = a; k < b; ++k) {
            const IsoVec& y = q.y[k];
            auto jn = unpack(tr.at(y[4]));
            auto ji = iso_to_jacobi({y[0], y[1], y[2], y[3]}, m3);
            worst = std::max({worst, std::abs(jn.xi1 - ji.xi1), std::abs(jn.xi2 - ji.xi2)});
        }
    }
    return worst;
}

} // namespace brakelab
