#include "brakelab.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "brakelab/acceptance.hpp"
#include "brakelab/isosceles.hpp"
#include "brakelab/jm.hpp"
#include "brakelab/parallel.hpp"
#include "brakelab/restpoints.hpp"
#include "brakelab/syzygy_map.hpp"
#include "brakelab/trajectory.hpp"

#ifndef BRAKELAB_VERSION
#define BRAKELAB_VERSION "0.0.0"
#endif

using nlohmann::ordered_json;
using namespace brakelab;

struct brk_masses {
    MassParams mp;
};

struct brk_result {
    struct Table {
        std::string name;
        std::vector<std::string> cols;
        std::vector<double> data;
        std::size_t rows() const { return cols.empty() ? 0 : data.size() / cols.size(); }
        void add(std::initializer_list<double> row) { data.insert(data.end(), row); }
        void add(const std::vector<double>& row) { data.insert(data.end(), row.begin(), row.end()); }
    };
    std::vector<Table> tables;
    std::string summary = "{}";

    Table& table(std::string name, std::vector<std::string> cols) {
        tables.push_back({std::move(name), std::move(cols), {}});
        return tables.back();
    }
};

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
thread_local std::string last_error;

brk_status to_status(Errc c) {
    switch (c) {
    case Errc::ok: return BRK_OK;
    case Errc::invalid_argument: return BRK_E_INVALID_ARGUMENT;
    case Errc::domain: return BRK_E_DOMAIN;
    case Errc::singularity: return BRK_E_SINGULARITY;
    case Errc::triple_collision: return BRK_E_TRIPLE_COLLISION;
    case Errc::no_syzygy: return BRK_E_NO_SYZYGY;
    case Errc::step_underflow: return BRK_E_STEP_UNDERFLOW;
    case Errc::not_converged: return BRK_E_NOT_CONVERGED;
    case Errc::no_bracket: return BRK_E_NO_BRACKET;
    case Errc::internal: return BRK_E_INTERNAL;
    }
    return BRK_E_INTERNAL;
}

brk_status set_error(brk_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

template <class F>
brk_status guard(F&& f) {
    last_error.clear();
    try {
        f();
        return BRK_OK;
    } catch (const Error& e) {
        return set_error(to_status(e.code()), e.what());
    } catch (const std::exception& e) {
        return set_error(BRK_E_INTERNAL, e.what());
    }
}

void require(bool ok, const char* what) {
    if (!ok) fail(Errc::invalid_argument, what);
}

const MassParams& masses_of(const brk_masses* m) {
    require(m != nullptr, "null mass handle");
    return m->mp;
}

Tolerances tolerances(double rtol) {
    require(rtol >= 1e-14 && rtol <= 1e-4, "rtol must lie in [1e-14, 1e-4]");
    Tolerances t;
    t.rtol = rtol;
    t.atol = std::min(t.atol, rtol * 1e-2);
    return t;
}

double finite_or_nan(double v) { return std::isfinite(v) ? v : kNaN; }

// non-finite values become null so the summary stays valid JSON
ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

int syzygy_flags(const SyzygyRecord& r) {
    int f = 0;
    if (r.collision) f |= BRK_FLAG_COLLISION;
    if (r.near_triple) f |= BRK_FLAG_NEAR_TRIPLE;
    if (!r.z_monotone) f |= BRK_FLAG_NONMONOTONE;
    if (r.max_idot >= 0) f |= BRK_FLAG_IDOT;
    return f;
}

template <class F>
brk_status produce(brk_result** out, F&& fill) {
    if (!out) return set_error(BRK_E_NULL_POINTER, "null result pointer");
    *out = nullptr;
    auto res = std::make_unique<brk_result>();
    brk_status s = guard([&] { fill(*res); });
    if (s == BRK_OK) *out = res.release();
    return s;
}

const brk_result::Table* table_at(const brk_result* r, size_t t) {
    return (r && t < r->tables.size()) ? &r->tables[t] : nullptr;
}

} // namespace

extern "C" {

const char* brk_version(void) { return BRAKELAB_VERSION; }

const char* brk_status_name(brk_status s) {
    if (s == BRK_E_NULL_POINTER) return "null pointer";
    if (s < BRK_OK || s > BRK_E_NULL_POINTER) return "unknown";
    return errc_name(static_cast<Errc>(s));
}

const char* brk_last_error(void) { return last_error.c_str(); }

brk_status brk_masses_create(double m1, double m2, double m3, brk_masses** out) {
    if (!out) return set_error(BRK_E_NULL_POINTER, "null output pointer");
    *out = nullptr;
    return guard([&] {
        auto h = std::make_unique<brk_masses>();
        h->mp = derive_mass_params(m1, m2, m3);
        *out = h.release();
    });
}

void brk_masses_free(brk_masses* m) { delete m; }

brk_status brk_masses_get(const brk_masses* m, brk_mass_params* out) {
    if (!m || !out) return set_error(BRK_E_NULL_POINTER, "null pointer");
    const auto& p = m->mp;
    *out = {p.m1, p.m2, p.m3, p.m, p.mu1, p.mu2, p.nu1, p.nu2, p.a1, p.a2, p.a3};
    last_error.clear();
    return BRK_OK;
}

brk_status brk_potential_eval(const brk_masses* m, double x, double y, brk_potential* out) {
    if (!out) return set_error(BRK_E_NULL_POINTER, "null output pointer");
    return guard([&] {
        const auto& mp = masses_of(m);
        auto e = shape_potential(x, y, mp);
        *out = {e.V, e.Vx, e.Vy, e.kappa, radial_factor(x, y, mp), e.rho12, e.rho13, e.rho23, e.at_collision};
    });
}

size_t brk_result_table_count(const brk_result* r) { return r ? r->tables.size() : 0; }

const char* brk_result_table_name(const brk_result* r, size_t t) {
    auto tb = table_at(r, t);
    return tb ? tb->name.c_str() : nullptr;
}

size_t brk_result_rows(const brk_result* r, size_t t) {
    auto tb = table_at(r, t);
    return tb ? tb->rows() : 0;
}

size_t brk_result_cols(const brk_result* r, size_t t) {
    auto tb = table_at(r, t);
    return tb ? tb->cols.size() : 0;
}

const char* brk_result_column(const brk_result* r, size_t t, size_t c) {
    auto tb = table_at(r, t);
    return (tb && c < tb->cols.size()) ? tb->cols[c].c_str() : nullptr;
}

const double* brk_result_row(const brk_result* r, size_t t, size_t row) {
    auto tb = table_at(r, t);
    return (tb && row < tb->rows()) ? tb->data.data() + row * tb->cols.size() : nullptr;
}

const char* brk_result_summary(const brk_result* r) { return r ? r->summary.c_str() : nullptr; }

void brk_result_free(brk_result* r) { delete r; }

brk_status brk_potential_grid(const brk_masses* m, int n, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        const auto& mp = masses_of(m);
        require(n >= 2, "grid size must be at least 2");
        auto& t = res.table("grid", {"x", "y", "inside", "V", "Vx", "Vy", "kappa", "phi"});
        double vmin = INFINITY;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double x = -1 + 2.0 * j / (n - 1), y = -1 + 2.0 * i / (n - 1);
                bool inside = x * x + y * y < 1;
                auto e = shape_potential(x, y, mp);
                if (!inside || e.at_collision) {
                    t.add({x, y, double(inside), finite_or_nan(e.V), kNaN, kNaN, finite_or_nan(e.kappa), kNaN});
                    continue;
                }
                vmin = std::min(vmin, e.V);
                t.add({x, y, 1.0, e.V, e.Vx, e.Vy, e.kappa, finite_or_nan(radial_factor(x, y, mp))});
            }
        ordered_json s;
        s["n"] = n;
        s["V_min_inside"] = num(vmin);
        s["V_origin"] = shape_potential(0, 0, mp).V;
        res.summary = s.dump(2);
    });
}

brk_status brk_integrate_brake(const brk_masses* m, double h, double x, double y, double t_end, int samples,
                               double rtol, int newtonian_check, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        const auto& mp = masses_of(m);
        require(samples >= 2, "samples must be at least 2");
        auto tol = tolerances(rtol);
        auto tr = integrate_brake(x, y, mp, h, t_end, samples, tol);
        auto& t = res.table("trajectory", {"s", "t", "r", "v", "x", "y", "xp", "yp", "energy_residual"});
        for (const auto& p : tr.samples)
            t.add({p.s, p.t, p.state.r, p.state.v, p.state.x, p.state.y, p.state.xp, p.state.yp, p.energy_residual});
        ordered_json s;
        s["samples"] = tr.samples.size();
        s["steps"] = tr.stats.steps;
        s["rejected"] = tr.stats.rejected;
        s["max_energy_residual"] = num(tr.max_energy_residual);
        if (newtonian_check) {
            auto oc = compare_with_newtonian(x, y, mp, h, t_end, samples, tol);
            auto& c = res.table("newtonian", {"t", "r", "x", "y", "r_newton", "x_newton", "y_newton"});
            for (std::size_t k = 0; k < oc.t.size(); ++k)
                c.add({oc.t[k], oc.reduced[k].r, oc.reduced[k].x, oc.reduced[k].y, oc.newtonian[k].r,
                       oc.newtonian[k].x, oc.newtonian[k].y});
            s["newtonian_max_deviation"] = num(oc.max_dev);
            s["newtonian_energy_drift"] = num(oc.newtonian_energy_drift);
            s["angular_momentum"] = num(oc.angular_momentum);
        }
        res.summary = s.dump(2);
    });
}

brk_status brk_first_syzygy(const brk_masses* m, double h, double x, double y, double rtol, brk_syzygy* out) {
    if (!out) return set_error(BRK_E_NULL_POINTER, "null output pointer");
    return guard([&] {
        SyzygyOptions opt;
        opt.tol = tolerances(rtol);
        auto r = first_syzygy(x, y, masses_of(m), h, opt);
        *out = {r.angle, r.r, r.s0, r.t0, r.type, r.collision, r.near_triple, r.z_monotone, r.max_idot};
    });
}

brk_status brk_syzygy_map(const brk_masses* m, double h, size_t samples, uint64_t seed, double exclude, double rtol,
                          int threads, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        const auto& mp = masses_of(m);
        require(samples > 0, "samples must be positive");
        require(exclude >= 0 && exclude < 0.5, "exclude must lie in [0, 0.5)");
        SyzygyOptions opt;
        opt.tol = tolerances(rtol);
        auto pts = sample_disk(samples, seed, exclude);
        std::vector<SyzygyRecord> rec(pts.size());
        std::vector<std::string> err(pts.size());
        parallel_for(pts.size(), threads, [&](std::size_t i) {
            try {
                rec[i] = first_syzygy(pts[i][0], pts[i][1], mp, h, opt);
            } catch (const std::exception& e) {
                err[i] = e.what();
            }
        });
        auto& t = res.table("syzygy", {"x0", "y0", "angle", "r", "s0", "t0", "type", "flags", "max_idot"});
        std::size_t failed = 0, collisions = 0, nonmono = 0, idot = 0;
        ordered_json notes = ordered_json::array();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!err[i].empty()) {
                ++failed;
                notes.push_back(err[i]);
                t.add({pts[i][0], pts[i][1], kNaN, kNaN, kNaN, kNaN, 0, double(BRK_FLAG_FAILED), kNaN});
                continue;
            }
            const auto& r = rec[i];
            int f = syzygy_flags(r);
            collisions += r.collision;
            nonmono += !r.z_monotone;
            idot += r.max_idot >= 0;
            t.add({pts[i][0], pts[i][1], r.angle, r.r, r.s0, r.t0, double(r.type), double(f), r.max_idot});
        }
        ordered_json s;
        s["samples"] = pts.size();
        s["seed"] = seed;
        s["failed"] = failed;
        s["collisions"] = collisions;
        s["nonmonotone"] = nonmono;
        s["idot_violations"] = idot;
        s["errors"] = notes;
        res.summary = s.dump(2);
    });
}

brk_status brk_image_scan(const brk_masses* m, double h, int n_lat, int n_lon, double rtol, int threads,
                          brk_result** out) {
    return produce(out, [&](brk_result& res) {
        const auto& mp = masses_of(m);
        require(n_lat > 0 && n_lon > 0, "grid sizes must be positive");
        SyzygyOptions opt;
        opt.tol = tolerances(rtol);
        auto rows = image_scan(n_lat, n_lon, mp, h, threads, opt);
        auto& t = res.table("image", {"x0", "y0", "angle", "r", "s0", "t0", "type", "flags"});
        std::size_t failed = 0;
        for (const auto& row : rows) {
            if (!row.ok) {
                ++failed;
                t.add({row.x0, row.y0, kNaN, kNaN, kNaN, kNaN, 0, double(BRK_FLAG_FAILED)});
                continue;
            }
            const auto& r = row.rec;
            t.add({row.x0, row.y0, r.angle, r.r, r.s0, r.t0, double(r.type), double(syzygy_flags(r))});
        }
        ordered_json s;
        s["n_lat"] = n_lat;
        s["n_lon"] = n_lon;
        s["rows"] = rows.size();
        s["failed"] = failed;
        res.summary = s.dump(2);
    });
}

brk_status brk_winding(const brk_masses* m, double h, double radius, int samples, int threads, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        const auto& mp = masses_of(m);
        require(radius > 0 && radius < 1, "radius must lie in (0, 1)");
        require(samples >= 8, "samples must be at least 8");
        auto w = winding_degree(radius, samples, mp, h, 1, threads);
        auto& t = res.table("winding", {"param", "angle", "r"});
        for (std::size_t i = 0; i < w.params.size(); ++i) t.add({w.params[i], w.angles[i], w.radii[i]});
        ordered_json s;
        s["radius"] = radius;
        s["samples"] = w.samples;
        s["degree"] = w.degree;
        s["total_turn"] = w.total_turn;
        res.summary = s.dump(2);
    });
}

brk_status brk_restpoints(const brk_masses* m, double h, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        const auto& mp = masses_of(m);
        auto rps = find_restpoints(mp, h);
        std::vector<std::string> cols = {"kind", "interior_mass", "sign", "x", "y", "v", "n_stable", "n_unstable",
                                         "degenerate", "spiraling"};
        for (int k = 0; k < 5; ++k) {
            cols.push_back("ev" + std::to_string(k) + "_re");
            cols.push_back("ev" + std::to_string(k) + "_im");
        }
        auto& t = res.table("restpoints", cols);
        ordered_json list = ordered_json::array();
        for (const auto& p : rps) {
            double spiral = p.spiral_tested ? (p.indeterminate ? -2.0 : double(p.spiraling)) : -1.0;
            std::vector<double> row = {double(p.kind == RestKind::euler), double(p.interior_mass), double(p.sign),
                                       p.x, p.y, p.v, double(p.lin.n_stable), double(p.lin.n_unstable),
                                       double(p.lin.degenerate), spiral};
            for (int k = 0; k < 5; ++k) {
                bool have = k < int(p.lin.eigenvalues.size());
                row.push_back(have ? p.lin.eigenvalues[k].real() : kNaN);
                row.push_back(have ? p.lin.eigenvalues[k].imag() : kNaN);
            }
            t.add(row);
            ordered_json e;
            e["name"] = p.name();
            e["v"] = p.v;
            e["stable"] = p.lin.n_stable;
            e["unstable"] = p.lin.n_unstable;
            if (p.spiral_tested) e["spiraling"] = p.indeterminate ? ordered_json("indeterminate") : ordered_json(p.spiraling);
            list.push_back(e);
        }
        ordered_json s;
        s["restpoints"] = list;
        s["note"] = "the second Lagrange pair lies at infinity of the chart";
        res.summary = s.dump(2);
    });
}

brk_status brk_spiraling_scan(int n, int threads, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        require(n >= 3, "n must be at least 3");
        auto rows = spiraling_scan(n, threads);
        std::vector<std::string> cols = {"m1", "m2", "m3", "ok", "count"};
        for (int a = 0; a < 3; ++a) {
            auto p = "e" + std::to_string(a) + "_";
            for (auto c : {"angle", "interior_mass", "spiraling", "indeterminate", "discriminant"}) cols.push_back(p + c);
            for (int k = 0; k < 5; ++k) {
                cols.push_back(p + "ev" + std::to_string(k) + "_re");
                cols.push_back(p + "ev" + std::to_string(k) + "_im");
            }
        }
        auto& t = res.table("spiraling", cols);
        std::size_t all3 = 0, failed = 0;
        for (const auto& r : rows) {
            std::vector<double> row = {r.m1, r.m2, r.m3, double(r.ok), r.ok ? double(r.res.count()) : kNaN};
            for (int a = 0; a < 3; ++a) {
                row.insert(row.end(), {r.ok ? r.res.angle[a] : kNaN, r.ok ? double(r.res.interior_mass[a]) : kNaN,
                                       r.ok ? double(r.res.spiraling[a]) : kNaN,
                                       r.ok ? double(r.res.indeterminate[a]) : kNaN,
                                       r.ok ? r.res.discriminant[a] : kNaN});
                const auto& ev = r.res.eigenvalues[a];
                for (int k = 0; k < 5; ++k) {
                    bool have = r.ok && k < int(ev.size());
                    row.push_back(have ? ev[k].real() : kNaN);
                    row.push_back(have ? ev[k].imag() : kNaN);
                }
            }
            t.add(row);
            failed += !r.ok;
            all3 += r.ok && r.res.count() == 3;
        }
        ordered_json s;
        s["n"] = n;
        s["points"] = rows.size();
        s["all_three_spiraling"] = all3;
        s["failed"] = failed;
        res.summary = s.dump(2);
    });
}

brk_status brk_iso_branches(double m3, double rtol, int samples, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        require(m3 > 0, "m3 must be positive");
        BranchOptions bo;
        bo.tol = tolerances(rtol);
        bo.samples = samples;
        ordered_json s;
        s["m3"] = m3;
        for (auto b : {Branch::gamma, Branch::gamma_prime}) {
            auto tr = trace_branch(b, m3, bo);
            const char* name = b == Branch::gamma ? "gamma" : "gamma_prime";
            auto& t = res.table(name, {"theta", "v"});
            for (auto [th, v] : tr.curve) t.add({th, v});
            ordered_json e;
            e["theta_start"] = tr.theta_start;
            e["v_start"] = tr.v_start;
            if (b == Branch::gamma) {
                e["v_3pi4"] = num(tr.v_3pi4);
                e["v1"] = num(tr.v1);
                e["v2"] = num(tr.v2);
            } else {
                e["v3"] = num(tr.v3);
            }
            e["terminated"] = tr.terminated;
            e["monotone"] = tr.monotone;
            s[name] = e;
        }
        res.summary = s.dump(2);
    });
}

brk_status brk_iso_admissible(const double* m3, size_t n, double rtol, int threads, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        require(m3 != nullptr && n > 0, "empty mass list");
        BranchOptions bo;
        bo.tol = tolerances(rtol);
        std::vector<double> ms(m3, m3 + n);
        for (double v : ms) require(v > 0, "m3 must be positive");
        auto rows = admissibility_scan(ms, threads, bo);
        auto& t = res.table("admissibility", {"m3", "v1", "v2", "v3", "flag"});
        ordered_json list = ordered_json::array();
        for (const auto& a : rows) {
            t.add({a.m3, a.v1, a.v2, a.v3, double(a.admissible)});
            ordered_json e;
            e["m3"] = a.m3;
            e["admissible"] = a.admissible;
            e["v1"] = num(a.v1);
            e["v2"] = num(a.v2);
            e["v3"] = num(a.v3);
            if (!a.reason.empty()) e["reason"] = a.reason;
            list.push_back(e);
        }
        res.summary = (list.size() == 1 ? list[0] : list).dump(2);
    });
}

brk_status brk_iso_threshold(double lo, double hi, double tol, double rtol, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        require(lo > 0 && hi > lo, "need 0 < lo < hi");
        BranchOptions bo;
        bo.tol = tolerances(rtol);
        auto th = admissibility_threshold(lo, hi, tol, bo);
        ordered_json s;
        s["threshold"] = num(th.value);
        s["bracket"] = {num(th.lo), num(th.hi)};
        s["lo_admissible"] = th.lo_admissible;
        s["evaluations"] = th.evaluations;
        res.summary = s.dump(2);
    });
}

brk_status brk_iso_periodic(double m3, int grid, double rtol, int threads, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        require(m3 > 0, "m3 must be positive");
        require(grid >= 4, "grid must be at least 4");
        auto ps = find_periodic_brake(m3, grid, threads, tolerances(rtol));
        auto& prof = res.table("profile", {"theta0", "v_zero"});
        for (std::size_t i = 0; i < ps.grid.size(); ++i) prof.add({ps.grid[i], ps.v_profile[i]});
        auto& ot = res.table("orbits", {"theta0", "r0", "T2", "t2", "v_first", "s_first", "v_second",
                                        "closure_error", "junction_error", "assembled_closure"});
        ordered_json list = ordered_json::array();
        for (const auto& o : ps.orbits) {
            ot.add({o.theta0, o.r0, o.T2, o.t2, o.v_first, o.s_first, o.v_second, o.closure_error, o.junction_error,
                    o.assembled_closure});
            ordered_json e;
            e["theta0"] = o.theta0;
            e["v_first"] = o.v_first;
            e["v_second"] = o.v_second;
            e["T2"] = o.T2;
            e["closure_error"] = num(o.closure_error);
            e["assembled_closure"] = num(o.assembled_closure);
            list.push_back(e);
        }
        if (!ps.orbits.empty()) {
            auto period = assemble_period(ps.orbits.front());
            auto& d = res.table("orbit", {"s", "r", "v", "theta", "w", "t"});
            for (std::size_t i = 0; i < period.s.size(); ++i) {
                const auto& y = period.y[i];
                d.add({period.s[i], y[0], y[1], y[2], y[3], y[4]});
            }
        }
        ordered_json s;
        s["m3"] = m3;
        s["orbits"] = list;
        s["notes"] = ps.notes;
        res.summary = s.dump(2);
    });
}

void brk_jm_params_default(brk_jm_params* p) {
    if (!p) return;
    JMOptions o;
    *p = {};
    p->N = 64;
    p->multistart = o.multistart;
    p->seed = o.seed;
    p->grad_tol = o.grad_tol;
    p->perturbation = o.perturbation;
    p->collision_offset = o.collision_offset;
    p->offset_study = o.offset_study;
    p->threads = o.threads;
}

brk_status brk_jm_minimize(const brk_masses* m, double h, const brk_jm_params* p, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        const auto& mp = masses_of(m);
        require(p != nullptr, "null parameters");
        require(p->N >= 4, "N must be at least 4");
        JMOptions o;
        o.multistart = p->multistart;
        o.seed = p->seed;
        o.grad_tol = p->grad_tol;
        o.perturbation = p->perturbation;
        o.collision_offset = p->collision_offset;
        o.offset_study = p->offset_study != 0;
        o.threads = p->threads;
        ShapePoint q0{p->start[0], p->start[1], p->start[2], std::nullopt};
        JMRun run;
        if (p->fixed_end) {
            ShapePoint q1{p->end[0], p->end[1], p->end[2], std::nullopt};
            run = minimize_fixed(q0, q1, p->N, mp, h, o);
        } else {
            std::optional<std::array<double, 2>> guess;
            if (p->has_end_guess) guess = std::array<double, 2>{p->end_guess[0], p->end_guess[1]};
            run = minimize_to_boundary(q0, p->N, mp, h, o, guess);
        }
        auto& t = res.table("path", {"minimum", "i", "r", "x", "y", "t", "multiplier"});
        ordered_json list = ordered_json::array();
        for (std::size_t k = 0; k < run.minima.size(); ++k) {
            const auto& r = run.minima[k];
            for (std::size_t i = 0; i < r.path.nodes.size(); ++i) {
                const auto& n = r.path.nodes[i];
                double ti = i < r.times.size() ? r.times[i] : kNaN;
                double mu = i < r.multipliers.size() ? r.multipliers[i] : kNaN;
                t.add({double(k), double(i), n.r, n.x, n.y, ti, mu});
            }
            ordered_json e;
            e["action"] = r.action;
            e["grad_norm"] = r.grad_norm;
            e["converged"] = r.converged;
            e["iterations"] = r.iterations;
            e["energy_residual"] = num(r.energy_residual);
            e["newton_residual"] = num(r.newton_residual);
            e["interior_strict"] = r.interior_strict;
            e["start_index"] = r.start_index;
            e["end"] = {r.path.nodes.back().r, r.path.nodes.back().x, r.path.nodes.back().y};
            if (!r.note.empty()) e["note"] = r.note;
            list.push_back(e);
        }
        ordered_json s;
        s["N"] = p->N;
        s["grading"] = run.minima.empty() ? "" : run.minima.front().path.grading;
        s["minima"] = list;
        if (p->offset_study) s["offset_delta"] = num(run.offset_delta);
        res.summary = s.dump(2);
    });
}

brk_status brk_jm_action(const brk_masses* m, double h, const double* nodes, size_t n, double* out) {
    if (!out || !nodes) return set_error(BRK_E_NULL_POINTER, "null pointer");
    return guard([&] {
        require(n >= 2, "need at least two nodes");
        DiscretePath p;
        for (size_t i = 0; i < n; ++i) p.nodes.push_back({nodes[3 * i], nodes[3 * i + 1], nodes[3 * i + 2]});
        *out = jm_action(p, masses_of(m), h);
    });
}

brk_status brk_seifert_probe(const brk_masses* m, double h, double x, double y, double t, brk_result** out) {
    return produce(out, [&](brk_result& res) {
        require(t > 0, "t must be positive");
        auto sp = seifert_scaling_probe(x, y, masses_of(m), h, t);
        auto& tb = res.table("action", {"t", "action"});
        for (std::size_t i = 0; i < sp.t.size(); ++i) tb.add({sp.t[i], sp.action[i]});
        ordered_json s;
        s["ratio"] = sp.ratio;
        s["exponent"] = sp.exponent;
        s["exponent_2"] = sp.exponent_2;
        s["exponent_extrapolated"] = sp.exponent_extrapolated;
        res.summary = s.dump(2);
    });
}

size_t brk_criterion_count(void) { return criterion_ids().size(); }

int brk_criterion_id(size_t index) {
    auto ids = criterion_ids();
    return index < ids.size() ? ids[index] : -1;
}

brk_status brk_verify(const int* ids, size_t n, uint64_t seed, int threads, brk_criterion_cb cb, void* user,
                      int* n_failed) {
    return guard([&] {
        std::vector<int> list = ids ? std::vector<int>(ids, ids + n) : criterion_ids();
        auto known = criterion_ids();
        for (int id : list) require(std::find(known.begin(), known.end(), id) != known.end(), "unknown criterion id");
        AcceptanceOptions opt;
        opt.seed = seed;
        opt.threads = threads;
        int failed = 0;
        run_acceptance(list, opt, [&](const CriterionResult& r) {
            failed += !r.pass;
            if (cb) cb(r.id, r.name.c_str(), r.pass, r.seconds, format_result(r).c_str(), user);
        });
        if (n_failed) *n_failed = failed;
    });
}

} // extern "C"
