#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace testing {

using namespace mpmc;

Problem circle() { return builtin_problem("circle", nlohmann::json::object()); }

Problem torus(const char* potential) {
    return builtin_problem("torus", {{"R", 1.0}, {"r", 0.5}, {"potential", potential}});
}

Mat fd_jacobian(const ConstraintMap& cm, const Vec& x, double h) {
    Mat j(cm.ambient_dim, cm.codim);
    for (int i = 0; i < cm.ambient_dim; ++i) {
        Vec a = x;
        Vec b = x;
        a[i] += h;
        b[i] -= h;
        j.row(i) = ((cm.eval(a) - cm.eval(b)) / (2.0 * h)).transpose();
    }
    return j;
}

PhasePoint random_torus_phase_point(Engine& engine) {
    const Problem t = torus();
    const double phi = 2.0 * std::numbers::pi * uniform01(engine);
    const double theta = 2.0 * std::numbers::pi * uniform01(engine);
    PhasePoint z;
    z.x = torus_point(phi, theta, 1.0, 0.5);
    z.p = sample_cotangent_gaussian(t.constraint, z.x, MassMatrix::identity(3), 1.0, engine);
    return z;
}

double poly_eval(const std::vector<double>& coeffs, double c) {
    double v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) v = v * c + coeffs[i];
    return v;
}

std::vector<double> scan_and_bisect(const std::vector<double>& coeffs, double lo, double hi,
                                    double step) {
    std::vector<double> roots;
    double a = lo;
    double fa = poly_eval(coeffs, a);
    for (double b = lo + step; b <= hi; b += step) {
        const double fb = poly_eval(coeffs, b);
        if (fa == 0.0) {
            roots.push_back(a);
        } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
            double l = a;
            double r = b;
            double fl = fa;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (l + r);
                const double fm = poly_eval(coeffs, m);
                if ((fm < 0.0) == (fl < 0.0)) {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
            }
            roots.push_back(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    return roots;
}

std::vector<std::complex<double>> companion_roots(const std::vector<double>& coeffs) {
    const int n = static_cast<int>(coeffs.size()) - 1;
    Mat c = Mat::Zero(n, n);
    for (int i = 1; i < n; ++i) c(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) c(i, n - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs.back();
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Mat>(c, false).eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double reverse_step_error(const ConstraintMap& cm, const PhasePoint& z, const MassMatrix& mass,
                    double tau, const Potential& vbar, const SolverSpec& spec) {
    const auto eq = rattle_equation(cm, z, mass, tau, vbar);
    const auto lambdas = solve_multipliers(cm, eq, spec, SolverKind::poly_all_roots, nullptr);
    double worst = -1.0;
    for (const Vec& lx : lambdas) {
        if (constraint_residual(cm, eq.point(lx)) > 1e-8) continue;
        const RattleSolution fwd = rattle_step(cm, z, lx, mass, tau, vbar);
        const RattleSolution back = rattle_step(cm, fwd.z1, fwd.lambda_p, mass, tau, vbar);
        const double err = std::max((back.z1.x - z.x).norm(), (back.z1.p - z.p).norm());
        worst = std::max(worst, err);
    }
    return worst;
}

namespace {

// Graph chart of the level set at base point b: s -> b + U s + n c(s).
struct Chart {
    const ConstraintMap* cm;
    Vec base;
    Mat u;
    Mat normal;

    Chart(const ConstraintMap& m, const Vec& b)
        : cm(&m), base(b), u(tangent_frame(m, b, MassMatrix::identity(m.ambient_dim)).basis),
          normal(m.jacobian(b)) {}

    Vec point(const Vec& s) const {
        const Vec off = base + u * s;
        Vec c = Vec::Zero(normal.cols());
        for (int it = 0; it < 60; ++it) {
            const Vec r = cm->eval(off + normal * c);
            const Mat j = cm->jacobian(off + normal * c).transpose() * normal;
            const Vec step = j.partialPivLu().solve(r);
            c -= step;
            if (step.norm() < 1e-17) break;
        }
        return off + normal * c;
    }

    // dX/ds at the chart point X.
    Mat tangent_map(const Vec& x) const {
        const Mat jx = cm->jacobian(x);
        const Mat dc = -(jx.transpose() * normal).partialPivLu().solve(jx.transpose() * u);
        return u + normal * dc;
    }

    Vec coords(const Vec& x) const { return u.transpose() * (x - base); }

    Vec canonical(const Vec& x, const Vec& p) const { return tangent_map(x).transpose() * p; }

    Vec momentum(const Vec& x, const Vec& ps) const {
        const int d = cm->ambient_dim;
        const int n = static_cast<int>(u.cols());
        Mat a(d, d);
        a.topRows(n) = tangent_map(x).transpose();
        a.bottomRows(d - n) = cm->jacobian(x).transpose();
        Vec rhs = Vec::Zero(d);
        rhs.head(n) = ps;
        return a.partialPivLu().solve(rhs);
    }
};

}  // namespace

double chart_jacobian_determinant(const ConstraintMap& cm, const PhasePoint& z, double tau,
                                  double h) {
    const MassMatrix mass = MassMatrix::identity(cm.ambient_dim);
    const Potential zero;
    SolverSpec spec;
    spec.newton_tol = 1e-14;
    spec.max_iter = 50;

    auto step_from = [&](const PhasePoint& start, const Vec& guess) -> std::optional<RattleSolution> {
        const auto eq = rattle_equation(cm, start, mass, tau, zero);
        auto lx = newton_solve([&](const Vec& c) { return cm.eval(eq.point(c)); },
                               [&](const Vec& c) -> Mat {
                                   return cm.jacobian(eq.point(c)).transpose() * eq.direction;
                               },
                               guess, spec);
        if (!lx) return std::nullopt;
        return rattle_step(cm, start, *lx, mass, tau, zero, 1e-8);
    };

    const auto base = step_from(z, Vec::Zero(cm.codim));
    if (!base) return -1.0;
    const Chart in(cm, z.x);
    const Chart out(cm, base->z1.x);
    const int n = cm.manifold_dim();

    Vec q0(2 * n);
    q0.head(n) = Vec::Zero(n);
    q0.tail(n) = in.canonical(z.x, z.p);

    auto map = [&](const Vec& q) -> Vec {
        PhasePoint start;
        start.x = in.point(q.head(n));
        start.p = in.momentum(start.x, q.tail(n));
        const auto s = step_from(start, base->lambda_x);
        Vec r(2 * n);
        r.head(n) = out.coords(s->z1.x);
        r.tail(n) = out.canonical(s->z1.x, s->z1.p);
        return r;
    };

    Mat jac(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        Vec a = q0;
        Vec b = q0;
        a[i] += h;
        b[i] -= h;
        jac.col(i) = (map(a) - map(b)) / (2.0 * h);
    }
    return std::abs(jac.determinant());
}

}  // namespace testing
