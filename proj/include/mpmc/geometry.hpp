#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mpmc/rng.hpp"
#include "mpmc/types.hpp"

namespace mpmc {

inline constexpr double kRankTol = 1e-10;
inline constexpr double kDefaultConstraintTol = 1e-8;

/// For k = 1 constraints that are polynomial along every line: returns the
/// coefficients (lowest degree first) of c -> xi(offset + direction * c).
struct LinePolynomial {
    int degree = 0;
    std::function<std::vector<double>(const Vec& offset, const Vec& direction)> coefficients;
};

/// The constraint xi : R^d -> R^k whose zero level set is sampled.
/// `jacobian` returns the d x k matrix whose column j is grad xi_j.
struct ConstraintMap {
    int ambient_dim = 0;
    int codim = 0;
    std::function<Vec(const Vec&)> eval;
    std::function<Mat(const Vec&)> jacobian;
    std::optional<LinePolynomial> line_polynomial;

    int manifold_dim() const noexcept { return ambient_dim - codim; }
};

/// Throws InvalidConfig if the dimensions are inconsistent or a callback is missing.
void validate(const ConstraintMap& cm);

/// Diagonal symmetric positive definite mass matrix.
class MassMatrix {
public:
    explicit MassMatrix(Vec diag);
    static MassMatrix identity(int d) { return MassMatrix(Vec::Ones(d)); }

    const Vec& diag() const noexcept { return diag_; }
    const Vec& inverse_diag() const noexcept { return inv_diag_; }
    int size() const noexcept { return static_cast<int>(diag_.size()); }
    bool is_identity() const noexcept { return identity_; }

    Vec apply(const Vec& v) const { return diag_.cwiseProduct(v); }
    Vec apply_inverse(const Vec& v) const { return inv_diag_.cwiseProduct(v); }
    Mat apply_inverse(const Mat& m) const { return inv_diag_.asDiagonal() * m; }

    friend bool operator==(const MassMatrix& a, const MassMatrix& b) { return a.diag_ == b.diag_; }

private:
    Vec diag_;
    Vec inv_diag_;
    bool identity_ = false;
};

enum class Metric { standard, mass_weighted };

/// Columns span the tangent space (standard metric) or the cotangent space
/// (mass-weighted metric, orthonormal for <p, q> = p^T M^{-1} q).
struct TangentFrame {
    Mat basis;
    Metric metric = Metric::standard;
};

/// grad xi(x)^T M^{-1} grad xi(x), or the plain Gram matrix when `mass` is null.
Mat gram(const Mat& jac, const MassMatrix* mass = nullptr);

/// Throws SingularGram when the smallest eigenvalue of `g` is below kRankTol.
void require_full_rank(const Mat& g);

TangentFrame tangent_frame(const ConstraintMap& cm, const Vec& x, const MassMatrix& mass,
                           Metric metric = Metric::standard);

/// P_M(x) = I - grad xi (grad xi^T M^{-1} grad xi)^{-1} grad xi^T M^{-1}.
Mat cotangent_projector(const ConstraintMap& cm, const Vec& x, const MassMatrix& mass);

/// P_M(x) p without forming the d x d projector; `jac` is grad xi(x).
Vec project_cotangent(const Mat& jac, const MassMatrix& mass, const Vec& p);

/// p = beta^{-1/2} P_M(x) w with w ~ N(0, M).
Vec sample_cotangent_gaussian(const ConstraintMap& cm, const Vec& x, const MassMatrix& mass,
                              double beta, Engine& engine);

/// Density of the mass-weighted surface measure relative to the Euclidean one.
double nu_weight(const ConstraintMap& cm, const Vec& x, const MassMatrix& mass);

double constraint_residual(const ConstraintMap& cm, const Vec& x);
/// || grad xi(x)^T M^{-1} p ||
double tangency_residual(const ConstraintMap& cm, const Vec& x, const Vec& p,
                         const MassMatrix& mass);

/// Pulls `x0` onto the level set by Newton iterations along grad xi(x0).
/// Throws OffManifold if the residual is still above `tol` after `max_iter`.
Vec project_to_manifold(const ConstraintMap& cm, const Vec& x0, double tol = kDefaultConstraintTol,
                        int max_iter = 50);

}  // namespace mpmc
