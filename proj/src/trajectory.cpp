#include "brakelab/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace brakelab {

BrakeTrajectory integrate_brake(double x, double y, const MassParams& mp, double h, double t_end, int n,
                                const Tolerances& tol) {
    if (n < 2) fail(Errc::invalid_argument, "need at least two samples");
    if (!(t_end > 0)) fail(Errc::invalid_argument, "t_end must be positive");
    ReducedState b = brake_lift(x, y, mp, h);
    Vec<7> y0{b.r, b.v, b.x, b.y, b.xp, b.yp, 0};
    std::vector<EventSpec<7>> ev;
    for (int k = 1; k < n; ++k) {
        double tk = t_end * k / (n - 1);
        EventSpec<7> e;
        e.name = "t";
        e.g = [tk](double, const Vec<7>& s) { return s[6] - tk; };
        e.direction = Crossing::rising;
        e.terminal = k == n - 1;
        e.tol = 1e-14 * std::max(1.0, tk);
        ev.push_back(e);
    }
    auto tr = integrate<7>([&](double, const Vec<7>& s) { return blowup_field_t(s, mp, h); }, 0.0, y0, 1e6,
                           IntegrateOptions<7>{tol, false, false}, ev);
    if (tr.reason != StopReason::terminal_event)
        fail(Errc::not_converged, std::string("brake orbit stopped early: ") + stop_reason_name(tr.reason) + " " +
                                      tr.diagnostic);
    BrakeTrajectory out;
    out.stats = tr.stats;
    auto push = [&](double s, const Vec<7>& v) {
        BrakeSample bs{s, v[6], ReducedState::from(v), 0};
        bs.energy_residual = energy_residual(bs.state, mp, h);
        out.max_energy_residual = std::max(out.max_energy_residual, std::abs(bs.energy_residual));
        out.samples.push_back(bs);
    };
    push(0, y0);
    for (int k = 0; k + 1 < n; ++k) {
        EventHit<7> hit;
        if (!tr.hit(k, &hit)) fail(Errc::internal, "missing sample event");
        push(hit.t, hit.y);
    }
    return out;
}

OracleComparison compare_with_newtonian(double x, double y, const MassParams& mp, double h, double t_end, int n,
                                        const Tolerances& tol) {
    auto red = integrate_brake(x, y, mp, h, t_end, n, tol);
    ReducedState b = brake_lift(x, y, mp, h);
    JacobiState j0 = shape_to_jacobi({b.r, b.x, b.y, std::nullopt}, mp);
    OracleComparison oc;
    oc.angular_momentum = angular_momentum(j0, mp);
    Vec<8> s = pack(j0);
    const double e0 = newtonian_energy(s, mp);
    double t = 0;
    for (const auto& smp : red.samples) {
        if (smp.t > t) {
            auto tr = integrate<8>([&](double, const Vec<8>& v) { return newtonian_field(v, mp); }, t, s, smp.t,
                                   IntegrateOptions<8>{tol, false, false});
            if (tr.reason != StopReason::completed) fail(Errc::not_converged, "Newtonian oracle stopped early");
            s = tr.y_end();
            t = smp.t;
        }
        ShapePoint q = jacobi_to_shape(unpack(s), mp);
        ShapePoint p{smp.state.r, smp.state.x, smp.state.y, std::nullopt};
        oc.t.push_back(smp.t);
        oc.reduced.push_back(p);
        oc.newtonian.push_back(q);
        oc.max_dev = std::max({oc.max_dev, std::abs(p.r - q.r), std::abs(p.x - q.x), std::abs(p.y - q.y)});
        oc.newtonian_energy_drift = std::max(oc.newtonian_energy_drift, std::abs(newtonian_energy(s, mp) - e0));
    }
    return oc;
}

} // namespace brakelab
