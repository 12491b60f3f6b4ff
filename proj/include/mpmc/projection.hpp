#pragma once

#include <vector>

#include "mpmc/geometry.hpp"
#include "mpmc/potential.hpp"

namespace mpmc {

inline constexpr double kTangentDetTol = 1e-10;
inline constexpr double kDedupTol = 1e-6;

/// One projection of a MALA proposal: y = F_x(v, c) on the level set.
struct MalaSolution {
    Vec y;
    Vec c;
    double residual = 0.0;
    double tangent_det = 0.0;  ///< det(grad xi(y)^T grad xi(x))
};

/// One outcome of the RATTLE step with momentum reversal.
struct RattleSolution {
    PhasePoint z1;  ///< (x^1, p^{1,-})
    Vec lambda_x;
    Vec lambda_p;
    double residual = 0.0;
    double tangent_det = 0.0;  ///< det(grad xi(x^1)^T M^{-1} grad xi(x))
};

inline const Vec& position(const MalaSolution& s) { return s.y; }
inline const Vec& position(const RattleSolution& s) { return s.z1.x; }

enum class SolverKind { newton_single, poly_all_roots, newton_multistart };

/// The finite set of projections found for one proposal, sorted by distance of
/// the positions from the starting point (ties broken lexicographically).
template <class Solution>
struct ProposalSet {
    std::vector<Solution> solutions;
    SolverKind solver = SolverKind::newton_single;

    std::size_t size() const noexcept { return solutions.size(); }
    bool empty() const noexcept { return solutions.empty(); }
    const Solution& operator[](std::size_t i) const { return solutions[i]; }
};

/// The nonlinear equation xi(offset + direction * c) = 0 for c in R^k solved by
/// every projection. `direction` is d x k.
struct ProjectionEquation {
    Vec offset;
    Mat direction;

    Vec point(const Vec& c) const { return offset + direction * c; }
};

// MALA maps -----------------------------------------------------------------

/// x - tau grad Vbar(x) + sqrt(2 tau) U v + grad xi(x) c, with U = frame.basis.
Vec mala_forward(const ConstraintMap& cm, const Vec& x, const TangentFrame& frame, const Vec& v,
                 const Vec& c, double tau, const Potential& vbar);

/// G_x(y) = (2 tau)^{-1/2} U^T (y - x + tau grad Vbar(x)).
Vec mala_reverse_velocity(const Vec& x, const TangentFrame& frame, const Vec& y, double tau,
                          const Potential& vbar);

/// The multiplier c with F_x(G_x(y), c) = y.
Vec mala_multiplier_from_target(const ConstraintMap& cm, const Vec& x, const Vec& y, double tau,
                                const Potential& vbar);

ProjectionEquation mala_equation(const ConstraintMap& cm, const Vec& x, const TangentFrame& frame,
                                 const Vec& v, double tau, const Potential& vbar);

MalaSolution make_mala_solution(const ConstraintMap& cm, const Vec& x, const ProjectionEquation& eq,
                                const Vec& c);

// RATTLE maps ---------------------------------------------------------------

/// One RATTLE step with momentum reversal from `z` using the position
/// multiplier `lambda_x`; the momentum multiplier is computed in closed form.
/// Throws ConstraintViolated when x^1 misses the level set by more than `tol`.
RattleSolution rattle_step(const ConstraintMap& cm, const PhasePoint& z, const Vec& lambda_x,
                           const MassMatrix& mass, double tau, const Potential& vbar,
                           double tol = kDefaultConstraintTol);

/// The momentum p in T*_x that the RATTLE step maps to position x1 (G_{M,x}).
Vec rattle_reverse_momentum(const ConstraintMap& cm, const Vec& x, const Vec& x1,
                            const MassMatrix& mass, double tau, const Potential& vbar);

/// The position multiplier that carries (x, p) to x1.
Vec rattle_multiplier_from_target(const ConstraintMap& cm, const Vec& x, const Vec& p,
                                  const Vec& x1, const MassMatrix& mass, double tau,
                                  const Potential& vbar);

/// xi(x + tau M^{-1}(p - tau/2 grad Vbar(x) + grad xi(x) lambda)) = 0 in lambda.
ProjectionEquation rattle_equation(const ConstraintMap& cm, const PhasePoint& z,
                                   const MassMatrix& mass, double tau, const Potential& vbar);

double hamiltonian(const Potential& v, const PhasePoint& z, const MassMatrix& mass);

}  // namespace mpmc
