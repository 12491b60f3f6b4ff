#include "mpmc/projection.hpp"

#include <cmath>
#include <string>

#include "mpmc/error.hpp"

namespace mpmc {

namespace {

double det_or_scalar(const Mat& m) { return m.rows() == 1 ? m(0, 0) : m.determinant(); }

}  // namespace

Vec mala_forward(const ConstraintMap& cm, const Vec& x, const TangentFrame& frame, const Vec& v,
                 const Vec& c, double tau, const Potential& vbar) {
    Vec out = x + std::sqrt(2.0 * tau) * (frame.basis * v) + cm.jacobian(x) * c;
    if (!vbar.is_zero()) out -= tau * vbar.gradient(x);
    return out;
}

Vec mala_reverse_velocity(const Vec& x, const TangentFrame& frame, const Vec& y, double tau,
                          const Potential& vbar) {
    Vec shift = y - x;
    if (!vbar.is_zero()) shift += tau * vbar.gradient(x);
    return frame.basis.transpose() * shift / std::sqrt(2.0 * tau);
}

Vec mala_multiplier_from_target(const ConstraintMap& cm, const Vec& x, const Vec& y, double tau,
                                const Potential& vbar) {
    const Mat jac = cm.jacobian(x);
    const Mat g = gram(jac);
    require_full_rank(g);
    Vec shift = y - x;
    if (!vbar.is_zero()) shift += tau * vbar.gradient(x);
    return g.ldlt().solve(jac.transpose() * shift);
}

ProjectionEquation mala_equation(const ConstraintMap& cm, const Vec& x, const TangentFrame& frame,
                                 const Vec& v, double tau, const Potential& vbar) {
    ProjectionEquation eq;
    eq.offset = x + std::sqrt(2.0 * tau) * (frame.basis * v);
    if (!vbar.is_zero()) eq.offset -= tau * vbar.gradient(x);
    eq.direction = cm.jacobian(x);
    return eq;
}

MalaSolution make_mala_solution(const ConstraintMap& cm, const Vec& x, const ProjectionEquation& eq,
                                const Vec& c) {
    MalaSolution s;
    s.y = eq.point(c);
    s.c = c;
    s.residual = constraint_residual(cm, s.y);
    s.tangent_det = det_or_scalar(cm.jacobian(s.y).transpose() * cm.jacobian(x));
    return s;
}

ProjectionEquation rattle_equation(const ConstraintMap& cm, const PhasePoint& z,
                                   const MassMatrix& mass, double tau, const Potential& vbar) {
    ProjectionEquation eq;
    Vec half = z.p;
    if (!vbar.is_zero()) half -= 0.5 * tau * vbar.gradient(z.x);
    eq.offset = z.x + tau * mass.apply_inverse(half);
    eq.direction = tau * mass.apply_inverse(cm.jacobian(z.x));
    return eq;
}

RattleSolution rattle_step(const ConstraintMap& cm, const PhasePoint& z, const Vec& lambda_x,
                           const MassMatrix& mass, double tau, const Potential& vbar,
                           double tol) {
    const Mat jac_x = cm.jacobian(z.x);

    // p^{1/2} = p - tau/2 grad Vbar(x) + grad xi(x) lambda_x
    Vec p_half = z.p + jac_x * lambda_x;
    if (!vbar.is_zero()) p_half -= 0.5 * tau * vbar.gradient(z.x);

    RattleSolution s;
    s.lambda_x = lambda_x;
    s.z1.x = z.x + tau * mass.apply_inverse(p_half);
    s.residual = constraint_residual(cm, s.z1.x);
    if (!(s.residual <= tol)) {
        throw Error(ErrorCode::ConstraintViolated,
                    "RATTLE position misses the level set (residual " + std::to_string(s.residual) +
                        ")");
    }

    const Mat jac_1 = cm.jacobian(s.z1.x);
    const Mat g1 = gram(jac_1, &mass);
    require_full_rank(g1);

    Vec unprojected = p_half;
    if (!vbar.is_zero()) unprojected -= 0.5 * tau * vbar.gradient(s.z1.x);
    s.lambda_p = -g1.ldlt().solve(jac_1.transpose() * mass.apply_inverse(unprojected));
    const Vec p1 = unprojected + jac_1 * s.lambda_p;
    s.z1.p = -p1;
    s.tangent_det = det_or_scalar(jac_1.transpose() * mass.apply_inverse(jac_x));
    return s;
}

Vec rattle_reverse_momentum(const ConstraintMap& cm, const Vec& x, const Vec& x1,
                            const MassMatrix& mass, double tau, const Potential& vbar) {
    Vec shift = x1 - x;
    if (!vbar.is_zero()) shift += 0.5 * tau * tau * mass.apply_inverse(vbar.gradient(x));
    return project_cotangent(cm.jacobian(x), mass, mass.apply(shift)) / tau;
}

Vec rattle_multiplier_from_target(const ConstraintMap& cm, const Vec& x, const Vec& p,
                                  const Vec& x1, const MassMatrix& mass, double tau,
                                  const Potential& vbar) {
    const Mat jac = cm.jacobian(x);
    const Mat g = gram(jac, &mass);
    require_full_rank(g);
    Vec shift = x1 - x - tau * mass.apply_inverse(p);
    if (!vbar.is_zero()) shift += 0.5 * tau * tau * mass.apply_inverse(vbar.gradient(x));
    return g.ldlt().solve(jac.transpose() * shift) / tau;
}

double hamiltonian(const Potential& v, const PhasePoint& z, const MassMatrix& mass) {
    return v.value(z.x) + 0.5 * z.p.dot(mass.apply_inverse(z.p));
}

}  // namespace mpmc
