#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mpmc/projection.hpp"
#include "mpmc/rng.hpp"

namespace mpmc {

/// How the projection equation is solved. For hybrid schemes, `kind` is the
/// expensive solver and fires on iterations i with i % period == 0; the other
/// iterations use a single Newton solve started at zero.
struct SolverSpec {
    SolverKind kind = SolverKind::newton_single;
    int max_iter = 10;
    double newton_tol = 1e-8;
    int n_starts = 1;
    double start_scale = 0.0;  ///< <= 0 selects 2 sqrt(d)
    int period = 1;

    /// Throws InvalidConfig on out-of-range fields.
    void validate() const;
    SolverKind kind_for_iteration(std::uint64_t iteration) const;

    friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

const char* to_string(SolverKind kind) noexcept;
/// Throws InvalidConfig for unknown names.
SolverKind solver_kind_from_string(const std::string& name);

using ResidualFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;

/// Full-step Newton. Returns c with ||residual(c)|| <= spec.newton_tol after at
/// most spec.max_iter steps, or nothing on divergence or a singular step.
std::optional<Vec> newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vec c0,
                                const SolverSpec& spec);

/// All complex roots of a_0 + a_1 c + ... + a_n c^n (Aberth-Ehrlich iteration,
/// each root polished by Newton steps on the polynomial).
std::vector<std::complex<double>> poly_all_roots(std::span<const double> coeffs);

/// Coefficients of c -> xi(offset + direction * c) for k = 1 polynomial constraints.
std::vector<double> build_projection_polynomial(const ConstraintMap& cm, const Vec& offset,
                                                const Vec& direction);

/// Multipliers c solving `eq` according to `kind`. `multistart` supplies the
/// random initial guesses and is only touched for newton_multistart.
std::vector<Vec> solve_multipliers(const ConstraintMap& cm, const ProjectionEquation& eq,
                                   const SolverSpec& spec, SolverKind kind, Engine* multistart);

struct ProjectionOptions {
    double tol_constraint = kDefaultConstraintTol;
    double dedup_tol = kDedupTol;
    bool filter_tangential = true;
    double tangent_det_tol = kTangentDetTol;
};

/// Psi_x(v): the distinct MALA projections found by the solver.
ProposalSet<MalaSolution> solve_mala_set(const ConstraintMap& cm, const Vec& x,
                                         const TangentFrame& frame, const Vec& v, double tau,
                                         const Potential& vbar, const SolverSpec& spec,
                                         SolverKind kind, const ProjectionOptions& opts,
                                         Engine* multistart);

/// Phi(z): the distinct outcomes of the RATTLE step with momentum reversal.
ProposalSet<RattleSolution> solve_rattle_set(const ConstraintMap& cm, const PhasePoint& z,
                                             const MassMatrix& mass, double tau,
                                             const Potential& vbar, const SolverSpec& spec,
                                             SolverKind kind, const ProjectionOptions& opts,
                                             Engine* multistart);

}  // namespace mpmc
