#include "brakelab/jm.hpp"

#include <ceres/ceres.h>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "brakelab/parallel.hpp"

namespace brakelab {

namespace {

constexpr double pi = std::numbers::pi;

// f = sqrt(1/rho - 1); F and G are antiderivatives of f and 1/f
double f_of(double p) { return std::sqrt((1 - p) / p); }
double F_of(double p) {
    p = std::clamp(p, 0.0, 1.0);
    return std::sqrt(p * (1 - p)) + std::atan2(std::sqrt(p), std::sqrt(1 - p));
}
double G_of(double p) {
    p = std::clamp(p, 0.0, 1.0);
    return std::atan2(std::sqrt(p), std::sqrt(1 - p)) - std::sqrt(p * (1 - p));
}

struct Mean {
    double val = 0, da = 0, db = 0;
};

Mean mean_f(double a, double b) {
    Mean M;
    double d = b - a, m = 0.5 * (a + b);
    if (d == 0) {
        M.val = m >= 1 ? 0 : f_of(m);
        if (m < 1) {
            double g = 1 / m - 1;
            M.da = M.db = 0.5 * 0.5 / std::sqrt(g) * (-1 / (m * m));
        }
        return M;
    }
    double dist = std::min(m, 1 - m);
    if (std::abs(d) <= 1e-3 * dist) {
        double g = 1 / m - 1, g1 = -1 / (m * m), g2 = 2 / (m * m * m), g3 = -6 / (m * m * m * m);
        double s = std::sqrt(g);
        double f0 = s;
        double f1 = 0.5 / s * g1;
        double f2 = -0.25 / (s * g) * g1 * g1 + 0.5 / s * g2;
        double f3 = 0.375 / (s * g * g) * g1 * g1 * g1 - 0.75 / (s * g) * g1 * g2 + 0.5 / s * g3;
        M.val = f0 + f2 * d * d / 24;
        M.da = 0.5 * f1 + 0.5 * f3 * d * d / 24 - f2 * d / 12;
        M.db = 0.5 * f1 + 0.5 * f3 * d * d / 24 + f2 * d / 12;
        return M;
    }
    M.val = (F_of(b) - F_of(a)) / d;
    double fa = a <= 0 ? 0 : f_of(std::min(a, 1.0)), fb = b <= 0 ? 0 : f_of(std::min(b, 1.0));
    M.db = (fb - M.val) / d;
    M.da = (M.val - fa) / d;
    return M;
}

double mean_inv_f(double a, double b) {
    double d = b - a;
    if (std::abs(d) < 1e-12) return 1 / f_of(0.5 * (a + b));
    return (G_of(b) - G_of(a)) / d;
}

struct NodeData {
    double rho = 0, x = 0, y = 0, r = 0;
    double V = 0, Vx = 0, Vy = 0;
};

struct NodeGrad {
    double rho = 0, r = 0, x = 0, y = 0;
};

// returns +inf if a midpoint hits a collision shape
double path_eval(const std::vector<NodeData>& nd, const MassParams& mp, double h, std::vector<NodeGrad>* g,
                 std::vector<double>* seg_len = nullptr) {
    const double sh = std::sqrt(h);
    double total = 0;
    if (g) g->assign(nd.size(), NodeGrad{});
    if (seg_len) seg_len->assign(nd.size() - 1, 0);
    for (std::size_t i = 0; i + 1 < nd.size(); ++i) {
        const NodeData &a = nd[i], &b = nd[i + 1];
        Mean M = mean_f(a.rho, b.rho);
        double xm = 0.5 * (a.x + b.x), ym = 0.5 * (a.y + b.y), rm = 0.5 * (a.r + b.r);
        PotentialEval e = shape_potential(xm, ym, mp);
        if (e.at_collision) return std::numeric_limits<double>::infinity();
        double dr = b.r - a.r, dx = b.x - a.x, dy = b.y - a.y;
        double D2 = dx * dx + dy * dy;
        double Q = e.kappa * rm * rm;
        double L = std::sqrt(dr * dr + Q * D2);
        if (seg_len) (*seg_len)[i] = L;
        total += sh * M.val * L;
        if (!g || L == 0) continue;
        double c = sh * M.val;
        double lQ = D2 / (2 * L);
        double Qr = 2 * e.kappa * rm, Qx = e.kappa_x * rm * rm, Qy = e.kappa_y * rm * rm;
        NodeGrad &ga = (*g)[i], &gb = (*g)[i + 1];
        ga.rho += sh * M.da * L;
        gb.rho += sh * M.db * L;
        ga.r += c * (-dr / L + 0.5 * lQ * Qr);
        gb.r += c * (dr / L + 0.5 * lQ * Qr);
        ga.x += c * (-Q * dx / L + 0.5 * lQ * Qx);
        gb.x += c * (Q * dx / L + 0.5 * lQ * Qx);
        ga.y += c * (-Q * dy / L + 0.5 * lQ * Qy);
        gb.y += c * (Q * dy / L + 0.5 * lQ * Qy);
    }
    return total;
}

// node whose size follows from rho; false at collision shapes
bool make_node(double rho, double x, double y, const MassParams& mp, double h, NodeData& n) {
    PotentialEval e = shape_potential(x, y, mp);
    if (e.at_collision || !std::isfinite(e.V)) return false;
    n.rho = rho;
    n.x = x;
    n.y = y;
    n.V = e.V;
    n.Vx = e.Vx;
    n.Vy = e.Vy;
    n.r = rho * e.V / h;
    return true;
}

// total derivatives for a node whose r = rho V / h
NodeGrad chain(const NodeGrad& g, const NodeData& n, double h) {
    NodeGrad t;
    t.rho = g.rho + g.r * n.V / h;
    t.x = g.x + g.r * n.rho * n.Vx / h;
    t.y = g.y + g.r * n.rho * n.Vy / h;
    return t;
}

class Objective : public ceres::FirstOrderFunction {
public:
    using Fn = std::function<bool(const double*, double*, double*)>;
    Objective(Fn fn, int n) : fn_(std::move(fn)), n_(n) {}
    bool Evaluate(const double* p, double* cost, double* grad) const override { return fn_(p, cost, grad); }
    int NumParameters() const override { return n_; }

private:
    Fn fn_;
    int n_;
};

struct OptOutcome {
    double grad_norm = 0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

double norm2(const std::vector<double>& v) {
    double s = 0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

// Variables come in pairs per node and the gradient of a node depends on its neighbours only, so a
// three-colouring gives the banded Hessian from 12 gradient evaluations.
using StepFn = std::function<double(const std::vector<double>&, int)>;

// chart distance to the nearest collision shape
double collision_distance(double x, double y) {
    const double s3 = std::sqrt(3.0) / 2;
    return std::sqrt(std::min({(x - 1) * (x - 1) + y * y, (x + 0.5) * (x + 0.5) + (y - s3) * (y - s3),
                               (x + 0.5) * (x + 0.5) + (y + s3) * (y + s3)}));
}

bool banded_hessian(const std::vector<double>& z, const std::function<bool(const double*, double*, double*)>& fn,
                    const StepFn& step_of, Eigen::SparseMatrix<double>& H) {
    const int n = static_cast<int>(z.size());
    const int nb = n / 2;
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> zp(z), gp(n), gm(n);
    double c;
    for (int color = 0; color < 3; ++color)
        for (int k = 0; k < 2; ++k) {
            std::vector<double> step(n, 0.0);
            for (int b = color; b < nb; b += 3) step[2 * b + k] = step_of(z, b);
            for (int j = 0; j < n; ++j) zp[j] = z[j] + step[j];
            if (!fn(zp.data(), &c, gp.data())) return false;
            for (int j = 0; j < n; ++j) zp[j] = z[j] - step[j];
            if (!fn(zp.data(), &c, gm.data())) return false;
            for (int b = color; b < nb; b += 3) {
                int col = 2 * b + k;
                for (int rb = std::max(0, b - 1); rb <= std::min(nb - 1, b + 1); ++rb)
                    for (int rk = 0; rk < 2; ++rk) {
                        int row = 2 * rb + rk;
                        trip.emplace_back(row, col, (gp[row] - gm[row]) / (2 * step[col]));
                    }
            }
        }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> At = A.transpose();
    H = 0.5 * (A + At);
    return true;
}

void newton_polish(std::vector<double>& z, const std::function<bool(const double*, double*, double*)>& fn,
                   const StepFn& step_of, double target, OptOutcome& out);

OptOutcome optimize(std::vector<double>& z, const Objective::Fn& fn, const StepFn& step_of, double grad_tol,
                    int max_iter) {
    const int n = static_cast<int>(z.size());
    OptOutcome out;
    if (n == 0) {
        out.converged = true;
        return out;
    }
    ceres::GradientProblem prob(new Objective(fn, n));
    ceres::GradientProblemSolver::Summary sum;

    ceres::GradientProblemSolver::Options o1;
    o1.line_search_direction_type = ceres::STEEPEST_DESCENT;
    o1.line_search_type = ceres::ARMIJO;
    o1.gradient_tolerance = 1e-3;
    o1.function_tolerance = 1e-14;
    o1.max_num_iterations = 2000;
    o1.logging_type = ceres::SILENT;
    ceres::Solve(o1, prob, z.data(), &sum);
    out.iterations += static_cast<int>(sum.iterations.size());

    ceres::GradientProblemSolver::Options o2;
    o2.line_search_direction_type = ceres::LBFGS;
    o2.line_search_type = ceres::WOLFE;
    o2.gradient_tolerance = grad_tol;
    o2.function_tolerance = 1e-16;
    o2.parameter_tolerance = 1e-16;
    o2.max_num_iterations = std::min(max_iter, 5000);
    o2.logging_type = ceres::SILENT;
    ceres::Solve(o2, prob, z.data(), &sum);
    out.iterations += static_cast<int>(sum.iterations.size());
    out.message = sum.message;

    newton_polish(z, fn, step_of, grad_tol * 1e-2, out);
    out.converged = out.grad_norm < grad_tol;
    return out;
}

void newton_polish(std::vector<double>& z, const std::function<bool(const double*, double*, double*)>& fn,
                   const StepFn& step_of, double target, OptOutcome& out) {
    const int n = static_cast<int>(z.size());
    std::vector<double> g(n), gn(n), zn(n);
    double c, cn;
    if (!fn(z.data(), &c, g.data())) return;
    double gnorm = norm2(g);
    Eigen::SparseMatrix<double> H, D(n, n);
    bool fresh = false;
    double lam = 0;
    int it = 0, fails = 0;
    for (; it < 2000 && gnorm > target && fails < 60; ++it) {
        if (!fresh) {
            if (!banded_hessian(z, fn, step_of, H)) break;
            std::vector<Eigen::Triplet<double>> dt;
            double dmax = 0;
            for (int k = 0; k < n; ++k) dmax = std::max(dmax, std::abs(H.coeff(k, k)));
            for (int k = 0; k < n; ++k) dt.emplace_back(k, k, std::max(std::abs(H.coeff(k, k)), 1e-12 * dmax + 1e-300));
            D.setFromTriplets(dt.begin(), dt.end());
            fresh = true;
        }
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H + lam * D);
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0).all()) {
            lam = std::max(4 * lam, 1e-8);
            ++fails;
            continue;
        }
        Eigen::VectorXd dz = ldlt.solve(-Eigen::Map<Eigen::VectorXd>(g.data(), n));
        for (int j = 0; j < n; ++j) zn[j] = z[j] + dz[j];
        bool accept = false;
        if (fn(zn.data(), &cn, gn.data()) && std::isfinite(cn)) {
            double nn = norm2(gn);
            double noise = 1e-13 * std::max(1.0, std::abs(c));
            accept = cn < c - noise || (cn <= c + noise && nn < gnorm);
        }
        if (accept) {
            z = zn;
            g = gn;
            c = cn;
            gnorm = norm2(g);
            lam = lam < 1e-8 ? 0 : lam / 4;
            fresh = false;
            fails = 0;
        } else {
            lam = std::max(4 * lam, 1e-8);
            ++fails;
        }
    }
    out.iterations += it;
    out.grad_norm = gnorm;
}

DiscretePath to_path(const std::vector<NodeData>& nd, EndTag end, const std::string& grading) {
    DiscretePath p;
    p.end = end;
    p.grading = grading;
    for (auto& n : nd) p.nodes.push_back({n.r, n.x, n.y});
    return p;
}

void fill_diagnostics(JMResult& res, const std::vector<NodeData>& nd, const MassParams& mp, double h,
                      double rho_min = 0) {
    std::vector<NodeGrad> g;
    std::vector<double> L;
    res.action = path_eval(nd, mp, h, &g, &L);
    res.multipliers.clear();
    for (std::size_t i = 0; i < nd.size(); ++i) res.multipliers.push_back(chain(g[i], nd[i], h).rho);
    res.times.assign(nd.size(), 0);
    for (std::size_t i = 0; i + 1 < nd.size(); ++i)
        res.times[i + 1] = res.times[i] + L[i] / std::sqrt(2 * h) * mean_inv_f(nd[i].rho, nd[i + 1].rho);
    res.interior_strict = true;
    for (std::size_t i = 1; i + 1 < nd.size(); ++i)
        if (!(nd[i].rho < 1)) res.interior_strict = false;

    // reduced equations in physical time at interior nodes from local quartic fits through five nodes
    res.energy_residual = 0;
    res.newton_residual = 0;
    const int n = static_cast<int>(nd.size());
    const int lo = std::max(2, n / 10), hi = std::min(n - 3, n - 1 - n / 10);
    for (int i = lo; i <= hi; ++i) {
        if (nd[i].rho < rho_min) continue;
        Eigen::Matrix<double, 5, 5> A;
        Eigen::Matrix<double, 5, 3> B;
        const double t0 = res.times[i];
        for (int k = 0; k < 5; ++k) {
            double dt = res.times[i - 2 + k] - t0;
            for (int p = 0; p < 5; ++p) A(k, p) = std::pow(dt, p);
            B.row(k) << nd[i - 2 + k].r, nd[i - 2 + k].x, nd[i - 2 + k].y;
        }
        Eigen::Matrix<double, 5, 3> C = A.fullPivLu().solve(B);
        const NodeData& P = nd[i];
        double r = P.r, rd = C(1, 0), rdd = 2 * C(2, 0);
        double xd = C(1, 1), xdd = 2 * C(2, 1), yd = C(1, 2), ydd = 2 * C(2, 2);
        PotentialEval e = shape_potential(P.x, P.y, mp);
        double q2 = xd * xd + yd * yd;
        double K = 0.5 * (rd * rd + e.kappa * r * r * q2), U = e.V / r - h;
        res.energy_residual = std::max(res.energy_residual, std::abs(K - U) / U);
        double er = rdd - e.kappa * r * q2 + e.V / (r * r);
        double scale = std::abs(rdd) + e.kappa * r * q2 + e.V / (r * r);
        double kd = e.kappa_x * xd + e.kappa_y * yd;
        double m = r * std::sqrt(e.kappa);
        double ex = e.kappa * r * r * xdd + kd * r * r * xd + 2 * e.kappa * r * rd * xd - 0.5 * e.kappa_x * r * r * q2 -
                    e.Vx / r;
        double ey = e.kappa * r * r * ydd + kd * r * r * yd + 2 * e.kappa * r * rd * yd - 0.5 * e.kappa_y * r * r * q2 -
                    e.Vy / r;
        res.newton_residual =
            std::max(res.newton_residual, std::max({std::abs(er), std::abs(ex) / m, std::abs(ey) / m}) / scale);
    }
}

void dedupe(std::vector<JMResult>& all, JMRun& run) {
    std::sort(all.begin(), all.end(), [](const JMResult& a, const JMResult& b) {
        if (a.converged != b.converged) return a.converged;
        return a.action < b.action;
    });
    for (auto& r : all) {
        bool dup = false;
        for (auto& m : run.minima) {
            if (std::abs(m.action - r.action) > 1e-7 * std::max(1.0, m.action)) continue;
            double dmax = 0;
            for (std::size_t i = 0; i < r.path.nodes.size(); ++i)
                dmax = std::max({dmax, std::abs(r.path.nodes[i].x - m.path.nodes[i].x),
                                 std::abs(r.path.nodes[i].y - m.path.nodes[i].y)});
            if (dmax < 1e-4) dup = true;
        }
        if (!dup) run.minima.push_back(std::move(r));
    }
}

// boundary problem with a fixed start node; rho profile fixed, shapes of nodes 1..N free
struct BoundarySolve {
    const MassParams& mp;
    double h;
    NodeData start;
    bool tie_start; // triple collision: start shape follows node 1
    std::vector<double> rho;

    bool build(const double* z, std::vector<NodeData>& nd) const {
        std::size_t N = rho.size() - 1;
        nd.resize(N + 1);
        nd[0] = start;
        for (std::size_t i = 1; i <= N; ++i)
            if (!make_node(rho[i], z[2 * (i - 1)], z[2 * (i - 1) + 1], mp, h, nd[i])) return false;
        if (tie_start) {
            nd[0].x = nd[1].x;
            nd[0].y = nd[1].y;
        }
        return true;
    }
    bool eval(const double* z, double* cost, double* grad) const {
        std::vector<NodeData> nd;
        if (!build(z, nd)) return false;
        std::vector<NodeGrad> g;
        *cost = path_eval(nd, mp, h, grad ? &g : nullptr);
        if (!std::isfinite(*cost)) return false;
        if (grad) {
            for (std::size_t i = 1; i < nd.size(); ++i) {
                NodeGrad t = chain(g[i], nd[i], h);
                grad[2 * (i - 1)] = t.x;
                grad[2 * (i - 1) + 1] = t.y;
            }
            if (tie_start) {
                grad[0] += g[0].x;
                grad[1] += g[0].y;
            }
        }
        return true;
    }
};

JMResult run_boundary(const BoundarySolve& bs, std::vector<double> z, const JMOptions& opt) {
    JMResult res;
    auto fn = [&](const double* p, double* c, double* g) { return bs.eval(p, c, g); };
    auto step = [](const std::vector<double>& v, int b) {
        return 1e-6 * std::min(1.0, collision_distance(v[2 * b], v[2 * b + 1]));
    };
    auto oc = optimize(z, fn, step, opt.grad_tol, opt.max_iterations);
    std::vector<NodeData> nd;
    bs.build(z.data(), nd);
    res.grad_norm = oc.grad_norm;
    res.converged = oc.converged;
    res.iterations = oc.iterations;
    res.note = oc.message;
    res.path = to_path(nd, EndTag::hill_boundary, "sqrt");
    fill_diagnostics(res, nd, bs.mp, bs.h, 0.25);
    return res;
}

std::vector<double> perturbed(const std::vector<double>& base, const std::vector<double>& tau, double amp,
                              std::uint64_t seed, int k) {
    if (k == 0) return base;
    std::mt19937_64 rng(seed * 1000003ULL + k);
    std::normal_distribution<double> nd(0, amp);
    double a1 = nd(rng), a2 = nd(rng), b1 = nd(rng), b2 = nd(rng);
    std::vector<double> z = base;
    std::size_t n = z.size() / 2;
    for (std::size_t i = 0; i < n; ++i) {
        double t = tau[i + 1];
        double s = std::sin(pi * t);
        z[2 * i] += a1 * s + b1 * t;
        z[2 * i + 1] += a2 * s + b2 * t;
    }
    return z;
}

} // namespace

std::vector<double> mesh(int N, const std::string& grading) {
    if (N < 1) fail(Errc::invalid_argument, "mesh needs N >= 1");
    std::vector<double> t(N + 1);
    for (int i = 0; i <= N; ++i) {
        double u = double(i) / N;
        if (grading == "uniform") t[i] = u;
        else if (grading == "sin2") t[i] = std::pow(std::sin(pi * u / 2), 2);
        else if (grading == "sqrt") t[i] = 1 - (1 - u) * (1 - u);
        else fail(Errc::invalid_argument, "unknown mesh grading '" + grading + "'");
    }
    t[N] = 1;
    return t;
}

double jm_action(const DiscretePath& path, const MassParams& mp, double h) {
    if (path.nodes.size() < 2) return 0;
    std::vector<NodeData> nd(path.nodes.size());
    for (std::size_t i = 0; i < nd.size(); ++i) {
        const auto& p = path.nodes[i];
        if (!(p.r >= 0)) fail(Errc::domain, "negative size in path");
        PotentialEval e = shape_potential(p.x, p.y, mp);
        double rho = e.at_collision ? 0 : p.r * h / e.V;
        if (rho > 1 + 1e-12) {
            std::ostringstream os;
            os << "node " << i << " lies outside the Hill region (r h / V = " << rho << ")";
            fail(Errc::domain, os.str());
        }
        nd[i].rho = std::abs(rho - 1) <= 1e-12 ? 1.0 : rho;
        nd[i].x = p.x;
        nd[i].y = p.y;
        nd[i].r = p.r;
    }
    double a = path_eval(nd, mp, h, nullptr);
    if (!std::isfinite(a)) fail(Errc::singularity, "segment midpoint at a collision shape");
    return a;
}

double jm_action_rho(const std::vector<std::array<double, 3>>& nodes, const MassParams& mp, double h,
                     std::vector<std::array<double, 3>>* grad) {
    std::vector<NodeData> nd(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (!make_node(nodes[i][0], nodes[i][1], nodes[i][2], mp, h, nd[i]))
            fail(Errc::singularity, "node at a collision shape");
    std::vector<NodeGrad> g;
    double a = path_eval(nd, mp, h, grad ? &g : nullptr);
    if (grad) {
        grad->resize(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            NodeGrad t = chain(g[i], nd[i], h);
            (*grad)[i] = {t.rho, t.x, t.y};
        }
    }
    return a;
}

JMRun minimize_to_boundary(const ShapePoint& q0, int N, const MassParams& mp, double h, const JMOptions& opt,
                           std::optional<std::array<double, 2>> end_guess) {
    if (N < 2) fail(Errc::invalid_argument, "need N >= 2");
    if (!(h > 0)) fail(Errc::invalid_argument, "h must be positive");
    PotentialEval e0 = shape_potential(q0.x, q0.y, mp);
    const bool triple = q0.r == 0;
    const bool collision = !triple && e0.at_collision;
    if (!triple && !collision && q0.r * h / e0.V >= 1) fail(Errc::domain, "start must lie inside the Hill region");

    std::array<double, 2> eg = end_guess.value_or(triple ? std::array<double, 2>{0.2, 0.1}
                                                  : collision ? std::array<double, 2>{0.5 * q0.x, 0.5 * q0.y + 0.02}
                                                              : std::array<double, 2>{q0.x, q0.y});
    auto tau = mesh(N, "sqrt");

    auto setup = [&](std::array<double, 2> d, double eps) {
        BoundarySolve bs{mp, h, {}, triple, {}};
        double sx = q0.x, sy = q0.y;
        if (collision) {
            sx += eps * d[0];
            sy += eps * d[1];
        }
        if (triple) {
            bs.start = {0, sx, sy, 0};
        } else {
            PotentialEval e = shape_potential(sx, sy, mp);
            bs.start = {q0.r * h / e.V, sx, sy, q0.r, e.V, e.Vx, e.Vy};
        }
        bs.rho.resize(N + 1);
        for (int i = 0; i <= N; ++i) bs.rho[i] = bs.start.rho + (1 - bs.start.rho) * tau[i];
        bs.rho[N] = 1;
        return bs;
    };
    auto unit = [](double x, double y) {
        double n = std::hypot(x, y);
        return std::array<double, 2>{x / n, y / n};
    };
    std::array<double, 2> d0 = collision ? unit(eg[0] - q0.x, eg[1] - q0.y) : std::array<double, 2>{0, 0};

    std::vector<double> base(2 * N);
    for (int i = 1; i <= N; ++i) {
        base[2 * (i - 1)] = q0.x + (eg[0] - q0.x) * tau[i];
        base[2 * (i - 1) + 1] = q0.y + (eg[1] - q0.y) * tau[i];
    }

    auto solve_from = [&](std::vector<double> z, std::array<double, 2> d, double eps) {
        JMResult res;
        int outer = collision ? opt.outer_iterations : 1;
        for (int it = 0; it < outer; ++it) {
            auto bs = setup(d, eps);
            res = run_boundary(bs, z, opt);
            for (int i = 1; i <= N; ++i) {
                z[2 * (i - 1)] = res.path.nodes[i].x;
                z[2 * (i - 1) + 1] = res.path.nodes[i].y;
            }
            if (!collision) break;
            auto dn = unit(res.path.nodes[1].x - q0.x, res.path.nodes[1].y - q0.y);
            double change = std::hypot(dn[0] - d[0], dn[1] - d[1]);
            d = dn;
            if (change < 1e-8) break;
        }
        return res;
    };

    std::vector<JMResult> all(std::max(opt.multistart, 1));
    parallel_for(all.size(), opt.threads, [&](std::size_t k) {
        auto z = perturbed(base, tau, opt.perturbation, opt.seed, static_cast<int>(k));
        all[k] = solve_from(z, d0, opt.collision_offset);
        all[k].start_index = static_cast<int>(k);
    });
    JMRun run;
    dedupe(all, run);
    if (collision && opt.offset_study) {
        const auto& b = run.best();
        std::vector<double> z(2 * N);
        for (int i = 1; i <= N; ++i) {
            z[2 * (i - 1)] = b.path.nodes[i].x;
            z[2 * (i - 1) + 1] = b.path.nodes[i].y;
        }
        auto d = unit(b.path.nodes[0].x - q0.x, b.path.nodes[0].y - q0.y);
        auto r2 = solve_from(z, d, opt.collision_offset / 10);
        run.offset_delta = r2.action - b.action;
    }
    return run;
}

JMRun minimize_fixed(const ShapePoint& q0, const ShapePoint& q1, int N, const MassParams& mp, double h,
                     const JMOptions& opt) {
    if (N < 2) fail(Errc::invalid_argument, "need N >= 2");
    auto endpoint = [&](const ShapePoint& q) {
        PotentialEval e = shape_potential(q.x, q.y, mp);
        if (e.at_collision) fail(Errc::domain, "fixed endpoints must not be collision shapes");
        double rho = q.r * h / e.V;
        if (rho > 1 + 1e-12 || q.r < 0) fail(Errc::domain, "endpoint outside the Hill region");
        return NodeData{std::min(rho, 1.0), q.x, q.y, q.r, e.V, e.Vx, e.Vy};
    };
    NodeData A = endpoint(q0), B = endpoint(q1);
    JMRun run;
    Eigen::Vector3d P0(A.rho, A.x, A.y), P1(B.rho, B.x, B.y);
    Eigen::Vector3d ch = P1 - P0;
    if (ch.norm() == 0) {
        JMResult z;
        z.converged = true;
        z.path.nodes.assign(N + 1, {q0.r, q0.x, q0.y});
        z.times.assign(N + 1, 0);
        z.multipliers.assign(N + 1, 0);
        run.minima.push_back(z);
        return run;
    }
    Eigen::Vector3d u = ch.normalized();
    Eigen::Vector3d e1 = u.unitOrthogonal(), e2 = u.cross(e1);
    auto tau = mesh(N, "uniform");

    auto build = [&](const double* z, std::vector<NodeData>& nd) {
        nd.resize(N + 1);
        nd[0] = A;
        nd[N] = B;
        for (int i = 1; i < N; ++i) {
            Eigen::Vector3d P = P0 + tau[i] * ch + z[2 * (i - 1)] * e1 + z[2 * (i - 1) + 1] * e2;
            if (!(P(0) > 0 && P(0) < 1)) return false;
            if (!make_node(P(0), P(1), P(2), mp, h, nd[i])) return false;
        }
        return true;
    };
    auto fn = [&](const double* z, double* cost, double* grad) {
        std::vector<NodeData> nd;
        if (!build(z, nd)) return false;
        std::vector<NodeGrad> g;
        *cost = path_eval(nd, mp, h, grad ? &g : nullptr);
        if (!std::isfinite(*cost)) return false;
        if (grad)
            for (int i = 1; i < N; ++i) {
                NodeGrad t = chain(g[i], nd[i], h);
                Eigen::Vector3d gv(t.rho, t.x, t.y);
                grad[2 * (i - 1)] = gv.dot(e1);
                grad[2 * (i - 1) + 1] = gv.dot(e2);
            }
        return true;
    };
    std::vector<JMResult> all(std::max(opt.multistart, 1));
    parallel_for(all.size(), opt.threads, [&](std::size_t k) {
        std::vector<double> z(2 * (N - 1), 0.0);
        if (k > 0) {
            std::mt19937_64 rng(opt.seed * 1000003ULL + k);
            std::normal_distribution<double> nd(0, opt.perturbation * ch.norm());
            double a = nd(rng), b = nd(rng);
            for (int i = 1; i < N; ++i) {
                double s = std::sin(pi * tau[i]);
                z[2 * (i - 1)] = a * s;
                z[2 * (i - 1) + 1] = b * s;
            }
        }
        auto step = [&](const std::vector<double>& v, int b) {
            Eigen::Vector3d P = P0 + tau[b + 1] * ch + v[2 * b] * e1 + v[2 * b + 1] * e2;
            return 1e-6 * std::min(1.0, collision_distance(P(1), P(2)));
        };
        auto oc = optimize(z, fn, step, opt.grad_tol, opt.max_iterations);
        std::vector<NodeData> nd;
        build(z.data(), nd);
        JMResult& res = all[k];
        res.grad_norm = oc.grad_norm;
        res.converged = oc.converged;
        res.iterations = oc.iterations;
        res.note = oc.message;
        res.start_index = static_cast<int>(k);
        res.path = to_path(nd, EndTag::fixed, "uniform");
        fill_diagnostics(res, nd, mp, h);
    });
    dedupe(all, run);
    return run;
}

namespace {

Vec<8> action_field(const Vec<8>& s, const MassParams& mp, double h, double scale) {
    Vec<6> b = blowup_field({s[0], s[1], s[2], s[3], s[4], s[5]}, mp, h);
    PotentialEval e = shape_potential(s[2], s[3], mp);
    double r = std::max(s[0], 0.0);
    double kin = 0.5 * s[1] * s[1] + 0.5 * e.kappa * (s[4] * s[4] + s[5] * s[5]);
    return {b[0], b[1], b[2], b[3], b[4], b[5], r * std::sqrt(r), std::sqrt(2.0) * std::sqrt(r) * kin / scale};
}

Vec<8> launch(const ShapePoint& q0, double a, double b, const MassParams& mp, double h) {
    PotentialEval e = shape_potential(q0.x, q0.y, mp);
    double r = q0.r;
    double K = e.V / r - h;
    if (!(K > 0)) fail(Errc::domain, "shooting start must be strictly inside the Hill region");
    double sp = std::sqrt(2 * K);
    double rd = sp * std::cos(a);
    double w = sp * std::sin(a) / (std::sqrt(e.kappa) * r);
    double xd = w * std::cos(b), yd = w * std::sin(b);
    double r32 = r * std::sqrt(r);
    return {r, std::sqrt(r) * rd, q0.x, q0.y, r32 * xd, r32 * yd, 0, 0};
}

} // namespace

ShootingResult shooting_action(const ShapePoint& q0, const ShapePoint& q1, const MassParams& mp, double h,
                               const std::array<double, 3>& dir, double t_guess) {
    double nrm = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    Eigen::Vector3d p(std::acos(std::clamp(dir[0] / nrm, -1.0, 1.0)), std::atan2(dir[2], dir[1]),
                      t_guess / std::pow(q0.r, 1.5));
    Tolerances tol;
    tol.rtol = 1e-13;
    tol.atol = 1e-15;
    auto run = [&](const Eigen::Vector3d& q, Vec<8>* end) {
        auto y0 = launch(q0, q(0), q(1), mp, h);
        auto tr = integrate<8>([&](double, const Vec<8>& s) { return action_field(s, mp, h, 1.0); }, 0.0, y0, q(2),
                               IntegrateOptions<8>{tol, false, false});
        if (tr.reason != StopReason::completed) fail(Errc::not_converged, "shooting integration failed");
        if (end) *end = tr.y_end();
        const auto& y = tr.y_end();
        return Eigen::Vector3d(y[0] - q1.r, y[2] - q1.x, y[3] - q1.y);
    };
    ShootingResult res;
    Eigen::Vector3d F = run(p, nullptr);
    for (int it = 0; it < 50 && F.norm() > 1e-13; ++it) {
        Eigen::Matrix3d J;
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d pp = p;
            double st = 1e-7 * std::max(1.0, std::abs(p(j)));
            pp(j) += st;
            J.col(j) = (run(pp, nullptr) - F) / st;
        }
        Eigen::Vector3d dp = J.fullPivLu().solve(-F);
        double lam = 1;
        for (int k = 0; k < 30; ++k) {
            Eigen::Vector3d pn = p + lam * dp;
            Eigen::Vector3d Fn;
            bool ok = true;
            try {
                Fn = run(pn, nullptr);
            } catch (const Error&) {
                ok = false;
            }
            if (ok && Fn.norm() < F.norm()) {
                p = pn;
                F = Fn;
                break;
            }
            lam *= 0.5;
        }
        res.iterations = it + 1;
    }
    Vec<8> end;
    F = run(p, &end);
    res.miss = F.norm();
    res.action = end[7];
    res.s_end = p(2);
    res.t_end = end[6];
    return res;
}

BrakeArc brake_arc_action(double x, double y, const MassParams& mp, double h, const std::vector<double>& times) {
    if (times.empty()) fail(Errc::invalid_argument, "need at least one time");
    double tmax = *std::max_element(times.begin(), times.end());
    double scale = tmax * tmax * tmax;
    ReducedState b = brake_lift(x, y, mp, h);
    Vec<8> y0{b.r, b.v, b.x, b.y, b.xp, b.yp, 0, 0};
    std::vector<EventSpec<8>> ev;
    for (double t : times) {
        EventSpec<8> e;
        e.name = "t";
        e.g = [t](double, const Vec<8>& s) { return s[6] - t; };
        e.direction = Crossing::rising;
        e.terminal = t == tmax;
        e.tol = 1e-14 * std::max(1.0, t);
        ev.push_back(e);
    }
    Tolerances tol;
    tol.rtol = 1e-12;
    tol.atol = 1e-14;
    auto tr = integrate<8>([&](double, const Vec<8>& s) { return action_field(s, mp, h, scale); }, 0.0, y0, 1e3,
                           IntegrateOptions<8>{tol, false, false}, ev);
    if (tr.reason != StopReason::terminal_event) fail(Errc::not_converged, "brake arc did not reach the last time");
    BrakeArc arc;
    for (std::size_t k = 0; k < times.size(); ++k) {
        EventHit<8> hit;
        if (!tr.hit(k, &hit)) fail(Errc::internal, "missing time event");
        arc.t.push_back(times[k]);
        arc.action.push_back(hit.y[7] * scale);
        arc.state.push_back(ReducedState::from(hit.y));
    }
    return arc;
}

SeifertProbe seifert_scaling_probe(double x, double y, const MassParams& mp, double h, double t) {
    if (!(t > 0)) fail(Errc::invalid_argument, "probe time must be positive");
    SeifertProbe sp;
    auto arc = brake_arc_action(x, y, mp, h, {t, 2 * t, 4 * t});
    sp.t = arc.t;
    sp.action = arc.action;
    sp.ratio = arc.action[1] / arc.action[0];
    sp.exponent = std::log(sp.ratio) / std::log(4.0);
    sp.exponent_2 = std::log(arc.action[2] / arc.action[1]) / std::log(4.0);
    // corrections are O(t^2): Richardson in t^2
    sp.exponent_extrapolated = (4 * sp.exponent - sp.exponent_2) / 3;
    return sp;
}

} // namespace brakelab
