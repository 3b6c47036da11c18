#pragma once
#include <algorithm>
#include <array>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "brakelab/error.hpp"

namespace brakelab {

template <std::size_t N>
using Vec = std::array<double, N>;

enum class Crossing { any, rising, falling };

template <std::size_t N>
struct EventSpec {
    std::string name;
    std::function<double(double, const Vec<N>&)> g;
    Crossing direction = Crossing::any;
    bool terminal = false;
    double tol = 1e-12;
};

template <std::size_t N>
struct EventHit {
    std::size_t event = 0;
    double t = 0;
    Vec<N> y{};
    double g = 0;
};

struct Tolerances {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0;   // 0: automatic
    double h_max = 0;    // 0: unbounded
    std::size_t max_steps = 5'000'000;
};

enum class StopReason { completed, terminal_event, step_underflow, nonfinite, max_steps, stopped };

const char* stop_reason_name(StopReason r);

struct IntegrationStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t evals = 0;
};

// Hairer's continuous extension of one accepted step
template <std::size_t N>
struct DenseStep {
    double t0 = 0, h = 0;
    Vec<N> c[5];

    Vec<N> eval(double t) const {
        double th = (t - t0) / h, th1 = 1 - th;
        Vec<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])));
        return y;
    }
    double t1() const { return t0 + h; }
};

template <std::size_t N>
struct Trajectory {
    std::vector<double> t;
    std::vector<Vec<N>> y;
    std::vector<DenseStep<N>> dense;
    std::vector<EventHit<N>> hits;
    StopReason reason = StopReason::completed;
    std::string diagnostic;
    IntegrationStats stats;

    double t_end() const { return t.back(); }
    const Vec<N>& y_end() const { return y.back(); }

    // dense lookup; requires keep_dense
    Vec<N> at(double tq) const {
        if (dense.empty()) fail(Errc::internal, "trajectory has no dense output");
        bool fwd = dense.front().h > 0;
        auto it = std::lower_bound(dense.begin(), dense.end(), tq, [fwd](const DenseStep<N>& d, double v) {
            return fwd ? d.t1() < v : d.t1() > v;
        });
        if (it == dense.end()) --it;
        return it->eval(tq);
    }
    bool hit(std::size_t event, EventHit<N>* out = nullptr) const {
        for (auto& h : hits)
            if (h.event == event) {
                if (out) *out = h;
                return true;
            }
        return false;
    }
};

template <std::size_t N>
struct IntegrateOptions {
    Tolerances tol;
    bool keep_dense = false;
    bool record_steps = true;
    // called after every accepted step (and the truncated last one); return false to stop
    std::function<bool(const DenseStep<N>&, const Vec<N>&)> on_step;
};

namespace detail {

struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                            d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                            d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

template <std::size_t N>
bool finite(const Vec<N>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

template <std::size_t N>
double wnorm(const Vec<N>& e, const Vec<N>& y0, const Vec<N>& y1, const Tolerances& tol) {
    double s = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double sc = tol.atol + tol.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        s += (e[i] / sc) * (e[i] / sc);
    }
    return std::sqrt(s / N);
}

inline bool crosses(double g0, double g1, Crossing d) {
    bool up = g0 < 0 && g1 >= 0;
    bool down = g0 > 0 && g1 <= 0;
    if (d == Crossing::rising) return up;
    if (d == Crossing::falling) return down;
    return up || down;
}

} // namespace detail

// Embedded 5(4) Dormand-Prince pair with PI step control and located events.
// F: Vec<N>(double t, const Vec<N>& y); may throw brakelab::Error on singularities.
template <std::size_t N, class F>
Trajectory<N> integrate(F&& field, double t0, const Vec<N>& y0, double t1, const IntegrateOptions<N>& opt = {},
                        const std::vector<EventSpec<N>>& events = {}) {
    using K = detail::Dopri5;
    Trajectory<N> tr;
    const Tolerances& tol = opt.tol;
    const double dir = t1 >= t0 ? 1.0 : -1.0;

    auto eval = [&](double t, const Vec<N>& y, Vec<N>& out) -> bool {
        ++tr.stats.evals;
        try {
            out = field(t, y);
        } catch (const Error&) {
            return false;
        }
        return detail::finite(out);
    };

    double t = t0;
    Vec<N> y = y0;
    tr.t.push_back(t);
    tr.y.push_back(y);
    Vec<N> k1, k2, k3, k4, k5, k6, k7, yt, ynew;
    if (!eval(t, y, k1)) {
        tr.reason = StopReason::nonfinite;
        tr.diagnostic = "field not finite at the initial state";
        return tr;
    }
    std::vector<double> gold(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) gold[e] = events[e].g(t, y);

    const double span = std::abs(t1 - t0);
    double h = tol.h_init;
    if (h <= 0) {
        Vec<N> sc;
        for (std::size_t i = 0; i < N; ++i) sc[i] = tol.atol + tol.rtol * std::abs(y[i]);
        double d0 = 0, d1 = 0;
        for (std::size_t i = 0; i < N; ++i) {
            d0 += (y[i] / sc[i]) * (y[i] / sc[i]);
            d1 += (k1[i] / sc[i]) * (k1[i] / sc[i]);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + dir * h0 * k1[i];
        double d2 = 0;
        if (eval(t + dir * h0, yt, k2)) {
            for (std::size_t i = 0; i < N; ++i) d2 += ((k2[i] - k1[i]) / sc[i]) * ((k2[i] - k1[i]) / sc[i]);
            d2 = std::sqrt(d2 / N) / h0;
        }
        double dm = std::max(d1, d2);
        double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        h = std::min(100 * h0, h1);
    }
    if (tol.h_max > 0) h = std::min(h, tol.h_max);
    h = std::min(h, span) * dir;

    double errold = 1e-4;
    bool rejected_last = false;
    const double beta = 0.04, expo = 0.2 - 0.75 * beta, safe = 0.9;

    while (true) {
        if (std::abs(t1 - t) <= 1e-14 * std::max(1.0, std::abs(t))) {
            tr.reason = StopReason::completed;
            break;
        }
        if (tr.stats.steps + tr.stats.rejected >= tol.max_steps) {
            tr.reason = StopReason::max_steps;
            tr.diagnostic = "step budget exhausted at t=" + std::to_string(t);
            break;
        }
        double hmin = 1e-14 * std::max(1.0, std::abs(t));
        if (std::abs(h) < hmin) {
            tr.reason = StopReason::step_underflow;
            std::ostringstream os;
            os << "step size underflow at t=" << t;
            tr.diagnostic = os.str();
            break;
        }
        bool last = dir * (t + h - t1) >= 0;
        if (last) h = t1 - t;

        bool ok = true;
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * K::a21 * k1[i];
        ok = ok && eval(t + K::c2 * h, yt, k2);
        if (ok) {
            for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (K::a31 * k1[i] + K::a32 * k2[i]);
            ok = eval(t + K::c3 * h, yt, k3);
        }
        if (ok) {
            for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (K::a41 * k1[i] + K::a42 * k2[i] + K::a43 * k3[i]);
            ok = eval(t + K::c4 * h, yt, k4);
        }
        if (ok) {
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] + h * (K::a51 * k1[i] + K::a52 * k2[i] + K::a53 * k3[i] + K::a54 * k4[i]);
            ok = eval(t + K::c5 * h, yt, k5);
        }
        if (ok) {
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] + h * (K::a61 * k1[i] + K::a62 * k2[i] + K::a63 * k3[i] + K::a64 * k4[i] +
                                    K::a65 * k5[i]);
            ok = eval(t + h, yt, k6);
        }
        if (ok) {
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = y[i] + h * (K::a71 * k1[i] + K::a73 * k3[i] + K::a74 * k4[i] + K::a75 * k5[i] +
                                      K::a76 * k6[i]);
            ok = eval(t + h, ynew, k7);
        }
        double err = 1e10;
        if (ok) {
            Vec<N> e;
            for (std::size_t i = 0; i < N; ++i)
                e[i] = h * (K::e1 * k1[i] + K::e3 * k3[i] + K::e4 * k4[i] + K::e5 * k5[i] + K::e6 * k6[i] +
                            K::e7 * k7[i]);
            err = detail::wnorm(e, y, ynew, tol);
            if (!std::isfinite(err)) err = 1e10;
        }
        if (err > 1) {
            ++tr.stats.rejected;
            double fac = ok ? std::max(0.2, safe * std::pow(err, -0.2)) : 0.25;
            if (rejected_last) fac = std::min(fac, 0.5);
            h *= fac;
            rejected_last = true;
            continue;
        }
        rejected_last = false;
        ++tr.stats.steps;

        DenseStep<N> ds;
        ds.t0 = t;
        ds.h = h;
        for (std::size_t i = 0; i < N; ++i) {
            double ydiff = ynew[i] - y[i];
            double bspl = h * k1[i] - ydiff;
            ds.c[0][i] = y[i];
            ds.c[1][i] = ydiff;
            ds.c[2][i] = bspl;
            ds.c[3][i] = ydiff - h * k7[i] - bspl;
            ds.c[4][i] = h * (K::d1 * k1[i] + K::d3 * k3[i] + K::d4 * k4[i] + K::d5 * k5[i] + K::d6 * k6[i] +
                              K::d7 * k7[i]);
        }
        double tnew = last ? t1 : t + h;

        // events on this step
        std::vector<EventHit<N>> found;
        std::vector<double> gnew(events.size());
        for (std::size_t e = 0; e < events.size(); ++e) {
            gnew[e] = events[e].g(tnew, ynew);
            if (!detail::crosses(gold[e], gnew[e], events[e].direction)) continue;
            auto g = [&](double tt) { return events[e].g(tt, ds.eval(tt)); };
            double lo = t, hi = tnew, glo = gold[e], ghi = gnew[e];
            if (h < 0) {
                std::swap(lo, hi);
                std::swap(glo, ghi);
            }
            double tc;
            if (ghi == 0) {
                tc = hi;
            } else if (glo == 0) {
                tc = lo;
            } else {
                std::uintmax_t it = 200;
                auto stop = [](double a, double b) { return std::abs(b - a) <= 4e-16 * std::max(1.0, std::abs(a)); };
                auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, stop, it);
                tc = std::abs(g(a)) <= std::abs(g(b)) ? a : b;
            }
            EventHit<N> hit;
            hit.event = e;
            hit.t = tc;
            hit.y = ds.eval(tc);
            hit.g = events[e].g(tc, hit.y);
            if (std::abs(hit.g) > events[e].tol) {
                tr.reason = StopReason::stopped;
                std::ostringstream os;
                os << "event '" << events[e].name << "' refinement failed in [" << lo << ", " << hi
                   << "], |g|=" << std::abs(hit.g);
                tr.diagnostic = os.str();
                return tr;
            }
            found.push_back(hit);
        }
        std::sort(found.begin(), found.end(),
                  [dir](const EventHit<N>& a, const EventHit<N>& b) { return dir * a.t < dir * b.t; });
        bool stop = false;
        for (auto& hit : found) {
            tr.hits.push_back(hit);
            if (events[hit.event].terminal) {
                stop = true;
                tnew = hit.t;
                ynew = hit.y;
                break;
            }
        }
        if (stop) ds.h = h; // interpolant still valid up to the event time

        if (opt.keep_dense) tr.dense.push_back(ds);
        t = tnew;
        y = ynew;
        if (opt.record_steps || stop) {
            tr.t.push_back(t);
            tr.y.push_back(y);
        }
        if (opt.on_step && !opt.on_step(ds, y)) {
            tr.reason = StopReason::stopped;
            if (!opt.record_steps) {
                tr.t.push_back(t);
                tr.y.push_back(y);
            }
            return tr;
        }
        if (stop) {
            tr.reason = StopReason::terminal_event;
            return tr;
        }
        gold = gnew;
        k1 = k7;

        double fac11 = std::pow(err, expo);
        double fac = fac11 / std::pow(errold, beta);
        fac = std::clamp(fac / safe, 1.0 / 10.0, 5.0);
        double hnew = h / fac;
        errold = std::max(err, 1e-4);
        if (tol.h_max > 0 && std::abs(hnew) > tol.h_max) hnew = dir * tol.h_max;
        h = hnew;
    }
    if (!opt.record_steps) {
        tr.t.push_back(t);
        tr.y.push_back(y);
    }
    return tr;
}

} // namespace brakelab
