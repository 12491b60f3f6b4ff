#include "mpmc/geometry.hpp"

#include <cmath>
#include <string>

#include "mpmc/error.hpp"

namespace mpmc {

void validate(const ConstraintMap& cm) {
    if (cm.ambient_dim < 2 || cm.codim < 1 || cm.codim >= cm.ambient_dim) {
        throw Error(ErrorCode::InvalidConfig,
                    "constraint dimensions must satisfy 1 <= k < d and d >= 2 (d=" +
                        std::to_string(cm.ambient_dim) + ", k=" + std::to_string(cm.codim) + ")");
    }
    if (!cm.eval || !cm.jacobian) {
        throw Error(ErrorCode::InvalidConfig, "constraint map needs eval and jacobian");
    }
    if (cm.line_polynomial && cm.codim != 1) {
        throw Error(ErrorCode::InvalidConfig, "line polynomial structure requires k = 1");
    }
}

MassMatrix::MassMatrix(Vec diag) : diag_(std::move(diag)) {
    if (diag_.size() == 0 || !(diag_.array() > 0.0).all() || !diag_.allFinite()) {
        throw Error(ErrorCode::InvalidConfig, "mass matrix entries must be finite and > 0");
    }
    inv_diag_ = diag_.cwiseInverse();
    identity_ = (diag_.array() == 1.0).all();
}

Mat gram(const Mat& jac, const MassMatrix* mass) {
    if (mass == nullptr || mass->is_identity()) return jac.transpose() * jac;
    return jac.transpose() * mass->inverse_diag().asDiagonal() * jac;
}

void require_full_rank(const Mat& g) {
    double smallest = 0.0;
    if (g.rows() == 1) {
        smallest = g(0, 0);
    } else {
        smallest = Eigen::SelfAdjointEigenSolver<Mat>(g, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    }
    if (!(smallest > kRankTol)) {
        throw Error(ErrorCode::SingularGram,
                    "Gram matrix of the constraint Jacobian is singular (min eigenvalue " +
                        std::to_string(smallest) + ")");
    }
}

TangentFrame tangent_frame(const ConstraintMap& cm, const Vec& x, const MassMatrix& mass,
                           Metric metric) {
    const int d = cm.ambient_dim;
    const int n = cm.manifold_dim();
    const Mat jac = cm.jacobian(x);
    const MassMatrix plain = MassMatrix::identity(d);
    const MassMatrix& m = metric == Metric::standard ? plain : mass;

    const Mat g = gram(jac, &m);
    require_full_rank(g);

    // Project the canonical basis: columns of P = I - J G^{-1} J^T M^{-1}.
    Mat candidates = Mat::Identity(d, d) -
                     jac * g.ldlt().solve(jac.transpose() * m.inverse_diag().asDiagonal());

    // Pivoted Gram-Schmidt in the metric <a, b> = a^T M^{-1} b.
    auto inner = [&](const Vec& a, const Vec& b) { return a.dot(m.inverse_diag().cwiseProduct(b)); };
    Mat basis(d, n);
    std::vector<bool> used(d, false);
    for (int col = 0; col < n; ++col) {
        int best = -1;
        double best_norm = -1.0;
        for (int j = 0; j < d; ++j) {
            if (used[j]) continue;
            const double norm = std::sqrt(std::max(0.0, inner(candidates.col(j), candidates.col(j))));
            if (norm > best_norm) {
                best_norm = norm;
                best = j;
            }
        }
        if (best < 0 || best_norm < kRankTol) {
            throw Error(ErrorCode::RankDeficient,
                        "tangent frame orthogonalization lost rank at column " + std::to_string(col));
        }
        used[best] = true;
        Vec q = candidates.col(best) / best_norm;
        basis.col(col) = q;
        for (int j = 0; j < d; ++j) {
            if (used[j]) continue;
            candidates.col(j) -= inner(q, candidates.col(j)) * q;
        }
    }
    return TangentFrame{std::move(basis), metric};
}

Mat cotangent_projector(const ConstraintMap& cm, const Vec& x, const MassMatrix& mass) {
    const Mat jac = cm.jacobian(x);
    const Mat g = gram(jac, &mass);
    require_full_rank(g);
    const int d = cm.ambient_dim;
    return Mat::Identity(d, d) -
           jac * g.ldlt().solve(jac.transpose() * mass.inverse_diag().asDiagonal());
}

Vec project_cotangent(const Mat& jac, const MassMatrix& mass, const Vec& p) {
    const Mat g = gram(jac, &mass);
    require_full_rank(g);
    const Vec rhs = jac.transpose() * mass.apply_inverse(p);
    return p - jac * g.ldlt().solve(rhs);
}

Vec sample_cotangent_gaussian(const ConstraintMap& cm, const Vec& x, const MassMatrix& mass,
                              double beta, Engine& engine) {
    Vec w = standard_normal(engine, cm.ambient_dim);
    w = w.cwiseProduct(mass.diag().cwiseSqrt());
    return project_cotangent(cm.jacobian(x), mass, w) / std::sqrt(beta);
}

double nu_weight(const ConstraintMap& cm, const Vec& x, const MassMatrix& mass) {
    const Mat jac = cm.jacobian(x);
    const Mat g_mass = gram(jac, &mass);
    const Mat g_plain = gram(jac);
    require_full_rank(g_mass);
    require_full_rank(g_plain);
    if (mass.is_identity()) return 1.0;
    const double det_m = mass.diag().prod();
    return std::sqrt(det_m * g_mass.determinant() / g_plain.determinant());
}

double constraint_residual(const ConstraintMap& cm, const Vec& x) { return cm.eval(x).norm(); }

double tangency_residual(const ConstraintMap& cm, const Vec& x, const Vec& p,
                         const MassMatrix& mass) {
    return (cm.jacobian(x).transpose() * mass.apply_inverse(p)).norm();
}

Vec project_to_manifold(const ConstraintMap& cm, const Vec& x0, double tol, int max_iter) {
    if (constraint_residual(cm, x0) <= tol) return x0;
    const Mat normal = cm.jacobian(x0);
    require_full_rank(gram(normal));
    Vec c = Vec::Zero(cm.codim);
    Vec x = x0;
    for (int it = 0; it <= max_iter; ++it) {
        const Vec r = cm.eval(x);
        if (r.norm() <= tol) return x;
        if (it == max_iter) break;
        const Mat j = cm.jacobian(x).transpose() * normal;
        Eigen::PartialPivLU<Mat> lu(j);
        if (!(lu.rcond() > 1e-14)) break;
        c -= lu.solve(r);
        x = x0 + normal * c;
    }
    throw Error(ErrorCode::OffManifold,
                "could not project the initial point onto the level set (residual " +
                    std::to_string(constraint_residual(cm, x)) + ")");
}

}  // namespace mpmc
