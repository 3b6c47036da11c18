#include "brakelab/restpoints.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "brakelab/parallel.hpp"

namespace brakelab {

std::string Restpoint::name() const {
    std::string s = kind == RestKind::lagrange ? "L" : "E" + std::to_string(interior_mass);
    return s + (sign > 0 ? "+" : "-");
}

namespace {

Eigen::Matrix<double, 6, 6> analytic_jacobian(const Vec<6>& s, const MassParams& mp) {
    // valid at restpoints only: r = 0, x' = y' = 0, grad V = 0
    const double v = s[1];
    PotentialEval e = shape_potential(s[2], s[3], mp);
    Hessian2 H = potential_hessian(s[2], s[3], mp);
    Eigen::Matrix<double, 6, 6> J = Eigen::Matrix<double, 6, 6>::Zero();
    J(0, 0) = v;
    J(1, 1) = v;
    J(2, 4) = 1;
    J(3, 5) = 1;
    J(4, 2) = H.xx / e.kappa;
    J(4, 3) = H.xy / e.kappa;
    J(4, 4) = -0.5 * v;
    J(5, 2) = H.xy / e.kappa;
    J(5, 3) = H.yy / e.kappa;
    J(5, 5) = -0.5 * v;
    return J;
}

Eigen::Matrix<double, 6, 6> fd_jacobian(const Vec<6>& s, const MassParams& mp, double h) {
    Eigen::Matrix<double, 6, 6> J;
    for (int j = 0; j < 6; ++j) {
        double step = 1e-5 * std::max(1.0, std::abs(s[j]));
        Vec<6> p = s, m = s, p2 = s, m2 = s;
        p[j] += step;
        m[j] -= step;
        p2[j] += 2 * step;
        m2[j] -= 2 * step;
        auto fp = blowup_field(p, mp, h), fm = blowup_field(m, mp, h);
        auto fp2 = blowup_field(p2, mp, h), fm2 = blowup_field(m2, mp, h);
        for (int i = 0; i < 6; ++i) J(i, j) = (8 * (fp[i] - fm[i]) - (fp2[i] - fm2[i])) / (12 * step);
    }
    return J;
}

} // namespace

Linearization linearize(const Vec<6>& s, const MassParams& mp, double h) {
    auto f = blowup_field(s, mp, h);
    double fn = 0;
    for (double c : f) fn = std::max(fn, std::abs(c));
    if (s[0] != 0 || fn > 1e-9) {
        std::ostringstream os;
        os << "linearize expects a restpoint on r = 0; |field| = " << fn;
        fail(Errc::invalid_argument, os.str());
    }
    Linearization L;
    L.J = analytic_jacobian(s, mp);
    L.J_fd = fd_jacobian(s, mp, h);
    L.fd_rel_error = (L.J - L.J_fd).norm() / L.J.norm();

    Eigen::Matrix<double, 1, 6> dE;
    dE << h, s[1], 0, 0, 0, 0;
    Eigen::FullPivLU<Eigen::Matrix<double, 1, 6>> lu(dE);
    Eigen::MatrixXd K = lu.kernel();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
    L.basis = (qr.householderQ() * Eigen::MatrixXd::Identity(6, 5));
    L.restricted = L.basis.transpose() * L.J * L.basis;
    L.invariance_residual =
        ((Eigen::Matrix<double, 6, 6>::Identity() - L.basis * L.basis.transpose()) * L.J * L.basis).norm();

    Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(L.restricted);
    std::vector<int> order(5);
    for (int i = 0; i < 5; ++i) order[i] = i;
    auto ev = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (ev[a].real() != ev[b].real()) return ev[a].real() < ev[b].real();
        return ev[a].imag() < ev[b].imag();
    });
    double best_r = -1;
    for (int k = 0; k < 5; ++k) {
        int i = order[k];
        cplx lam = ev[i];
        Eigen::Matrix<cplx, 6, 1> vec = L.basis.cast<cplx>() * es.eigenvectors().col(i);
        vec /= vec.norm();
        L.eigenvalues.push_back(lam);
        L.eigenvectors.push_back(vec);
        if (lam.real() < -1e-9) ++L.n_stable;
        else if (lam.real() > 1e-9) ++L.n_unstable;
        else L.degenerate = true;
        double rc = std::abs(vec(0));
        if (rc > best_r) {
            best_r = rc;
            L.homothety_index = k;
        }
    }
    for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b)
            if (std::abs(L.eigenvalues[a] - L.eigenvalues[b]) < 1e-7) L.degenerate = true;

    Eigen::MatrixXd P(2, 0);
    for (int k = 0; k < 5; ++k) {
        if (L.eigenvalues[k].real() <= 1e-9 || k == L.homothety_index) continue;
        Eigen::Vector2d re(L.eigenvectors[k](2).real(), L.eigenvectors[k](3).real());
        Eigen::Vector2d im(L.eigenvectors[k](2).imag(), L.eigenvectors[k](3).imag());
        P.conservativeResize(2, P.cols() + 2);
        P.col(P.cols() - 2) = re;
        P.col(P.cols() - 1) = im;
    }
    if (P.cols() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
        auto sv = svd.singularValues();
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) > 1e-8 * sv(0)) ++L.unstable_shape_rank;
    }
    return L;
}

Restpoint make_restpoint(RestKind kind, int interior_mass, int sign, double x, double y, const MassParams& mp,
                         double h) {
    Restpoint p;
    p.kind = kind;
    p.interior_mass = interior_mass;
    p.sign = sign;
    p.x = x;
    p.y = y;
    double V = shape_potential(x, y, mp).V;
    p.v = sign * std::sqrt(2 * V);
    p.state = {0, p.v, x, y, 0, 0};
    p.lin = linearize(p.state, mp, h);
    if (kind == RestKind::euler && sign > 0) {
        p.spiral_tested = true;
        PotentialEval e = shape_potential(x, y, mp);
        Hessian2 H = potential_hessian(x, y, mp);
        double nn = std::hypot(x, y);
        double nx = x / nn, ny = y / nn;
        double mun = nx * nx * H.xx + 2 * nx * ny * H.xy + ny * ny * H.yy;
        p.discriminant = p.v * p.v / 16 + mun / e.kappa;
        // the stable pair whose eigenvectors lie along the normal to the collinear circle
        std::vector<std::pair<double, cplx>> cand;
        for (int k = 0; k < 5; ++k) {
            if (p.lin.eigenvalues[k].real() >= 0) continue;
            const auto& u = p.lin.eigenvectors[k];
            double sn = std::norm(nx * u(2) + ny * u(3)) + std::norm(nx * u(4) + ny * u(5));
            double sh = std::norm(u(2)) + std::norm(u(3)) + std::norm(u(4)) + std::norm(u(5));
            cand.push_back({sh > 0 ? sn / sh : 0, p.lin.eigenvalues[k]});
        }
        std::sort(cand.begin(), cand.end(), [](auto& a, auto& b) { return a.first > b.first; });
        if (cand.size() >= 2) {
            cplx a = cand[0].second, b = cand[1].second;
            p.spiraling = std::abs(a.imag()) >= 1e-10 && std::abs(b.imag()) >= 1e-10;
            p.indeterminate = std::abs(a - b) < 1e-6 || (std::abs(a.imag()) > 0 && std::abs(a.imag()) < 1e-10);
        } else {
            p.indeterminate = true;
        }
    }
    return p;
}

std::vector<Restpoint> find_restpoints(const MassParams& mp, double h) {
    std::vector<Restpoint> out;
    for (int sg : {1, -1}) out.push_back(make_restpoint(RestKind::lagrange, 0, sg, 0, 0, mp, h));
    for (const auto& cc : collinear_central_configs(mp))
        for (int sg : {1, -1})
            out.push_back(
                make_restpoint(RestKind::euler, cc.interior_mass, sg, std::cos(cc.angle), std::sin(cc.angle), mp, h));
    return out;
}

SpiralResult spiraling_test(const MassParams& mp) {
    SpiralResult res;
    auto ccs = collinear_central_configs(mp);
    for (int k = 0; k < 3; ++k) {
        auto p = make_restpoint(RestKind::euler, ccs[k].interior_mass, 1, std::cos(ccs[k].angle),
                                std::sin(ccs[k].angle), mp, 1.0);
        res.angle[k] = ccs[k].angle;
        res.interior_mass[k] = ccs[k].interior_mass;
        res.spiraling[k] = p.spiraling;
        res.indeterminate[k] = p.indeterminate;
        res.discriminant[k] = p.discriminant;
        res.eigenvalues[k] = p.lin.eigenvalues;
    }
    return res;
}

std::vector<SpiralScanRow> spiraling_scan(int n, int threads) {
    if (n < 3) fail(Errc::invalid_argument, "spiraling scan needs n >= 3");
    std::vector<SpiralScanRow> rows;
    for (int i = 1; i < n; ++i)
        for (int j = 1; i + j < n; ++j) {
            SpiralScanRow r;
            r.m1 = double(i) / n;
            r.m2 = double(j) / n;
            r.m3 = double(n - i - j) / n;
            rows.push_back(r);
        }
    parallel_for(rows.size(), threads, [&](std::size_t k) {
        try {
            rows[k].res = spiraling_test(derive_mass_params(rows[k].m1, rows[k].m2, rows[k].m3));
            rows[k].ok = true;
        } catch (const Error& e) {
            rows[k].error = e.what();
        }
    });
    return rows;
}

} // namespace brakelab
