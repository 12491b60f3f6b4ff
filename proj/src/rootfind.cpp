#include "mpmc/rootfind.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mpmc/error.hpp"

namespace mpmc {

namespace {

using Complex = std::complex<double>;

// Value and derivative of a real polynomial at a complex point (Horner).
std::pair<Complex, Complex> horner(std::span<const double> a, Complex z) {
    Complex p = a.back();
    Complex dp = 0.0;
    for (std::size_t i = a.size() - 1; i-- > 0;) {
        dp = dp * z + p;
        p = p * z + a[i];
    }
    return {p, dp};
}

double coefficient_scale(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

template <class Solution>
void finalize(std::vector<Solution>& sols, const Vec& origin, const ProjectionOptions& opts) {
    std::erase_if(sols, [&](const Solution& s) {
        return !(s.residual <= opts.tol_constraint) ||
               (opts.filter_tangential && !(std::abs(s.tangent_det) > opts.tangent_det_tol));
    });

    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(sols.size());
    for (std::size_t i = 0; i < sols.size(); ++i) {
        order.emplace_back((position(sols[i]) - origin).norm(), i);
    }
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        const Vec& pa = position(sols[a.second]);
        const Vec& pb = position(sols[b.second]);
        return std::lexicographical_compare(pa.data(), pa.data() + pa.size(), pb.data(),
                                            pb.data() + pb.size());
    });

    std::vector<Solution> kept;
    kept.reserve(sols.size());
    for (const auto& [dist, idx] : order) {
        const Vec& y = position(sols[idx]);
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Solution& k) {
            return (position(k) - y).norm() <= opts.dedup_tol;
        });
        if (!duplicate) kept.push_back(std::move(sols[idx]));
    }
    sols = std::move(kept);
}

// Real Newton polish of a k = 1 root directly on xi along the line.
double polish_real_root(const ConstraintMap& cm, const ProjectionEquation& eq, double c) {
    const Vec dir = eq.direction.col(0);
    double best_c = c;
    double best_r = std::abs(cm.eval(eq.offset + dir * c)[0]);
    for (int step = 0; step < 3 && best_r > 0.0; ++step) {
        const Vec y = eq.offset + dir * best_c;
        const double f = cm.eval(y)[0];
        const double df = cm.jacobian(y).col(0).dot(dir);
        if (df == 0.0 || !std::isfinite(df)) break;
        const double trial = best_c - f / df;
        const double r = std::abs(cm.eval(eq.offset + dir * trial)[0]);
        if (!(r < best_r)) break;
        best_c = trial;
        best_r = r;
    }
    return best_c;
}

}  // namespace

void SolverSpec::validate() const {
    if (max_iter < 1) throw Error(ErrorCode::InvalidConfig, "solver.max_iter must be >= 1");
    if (!(newton_tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "solver.newton_tol must be > 0");
    if (period < 1) throw Error(ErrorCode::InvalidConfig, "solver.period must be >= 1");
    if (kind == SolverKind::newton_multistart && n_starts < 1) {
        throw Error(ErrorCode::InvalidConfig, "solver.n_starts must be >= 1");
    }
}

SolverKind SolverSpec::kind_for_iteration(std::uint64_t iteration) const {
    if (period <= 1 || iteration % static_cast<std::uint64_t>(period) == 0) return kind;
    return SolverKind::newton_single;
}

const char* to_string(SolverKind kind) noexcept {
    switch (kind) {
        case SolverKind::newton_single: return "newton_single";
        case SolverKind::poly_all_roots: return "poly_all_roots";
        case SolverKind::newton_multistart: return "newton_multistart";
    }
    return "unknown";
}

SolverKind solver_kind_from_string(const std::string& name) {
    if (name == "newton_single") return SolverKind::newton_single;
    if (name == "poly_all_roots") return SolverKind::poly_all_roots;
    if (name == "newton_multistart") return SolverKind::newton_multistart;
    throw Error(ErrorCode::InvalidConfig, "unknown solver kind '" + name + "'");
}

std::optional<Vec> newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vec c0,
                                const SolverSpec& spec) {
    Vec c = std::move(c0);
    for (int it = 0;; ++it) {
        const Vec r = residual(c);
        if (!r.allFinite()) return std::nullopt;
        if (r.norm() <= spec.newton_tol) return c;
        if (it == spec.max_iter) return std::nullopt;
        const Mat j = jacobian(c);
        if (!j.allFinite()) return std::nullopt;
        if (j.rows() == 1) {
            if (std::abs(j(0, 0)) < 1e-300) return std::nullopt;
            c[0] -= r[0] / j(0, 0);
        } else if (j.rows() == 2) {
            const double det = j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0);
            if (!(std::abs(det) > 1e-14 * j.cwiseAbs2().sum())) return std::nullopt;
            c[0] -= (j(1, 1) * r[0] - j(0, 1) * r[1]) / det;
            c[1] -= (j(0, 0) * r[1] - j(1, 0) * r[0]) / det;
        } else {
            Eigen::PartialPivLU<Mat> lu(j);
            if (!(lu.rcond() > 1e-14)) return std::nullopt;
            c -= lu.solve(r);
        }
    }
}

std::vector<std::complex<double>> poly_all_roots(std::span<const double> coeffs) {
    const double scale = coefficient_scale(coeffs);
    if (coeffs.empty() || scale == 0.0) {
        throw Error(ErrorCode::InfinitelyManyRoots, "identically zero polynomial");
    }
    std::size_t n = coeffs.size() - 1;
    while (n > 0 && std::abs(coeffs[n]) <= 1e-14 * scale) --n;
    if (n == 0) {
        throw Error(ErrorCode::DegenerateLeadingCoefficient,
                    "polynomial collapses to a nonzero constant");
    }

    // Monic copy of degree n.
    std::vector<double> a(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(n) + 1);
    const double lead = a[n];
    for (double& v : a) v /= lead;

    if (n == 1) return {Complex(-a[0], 0.0)};

    // Initial guesses on a circle around the root centroid.
    const Complex center = -a[n - 1] / static_cast<double>(n);
    double radius = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        radius = std::max(radius, std::pow(std::abs(a[n - k]), 1.0 / static_cast<double>(k)));
    }
    radius = std::max(radius, 1e-3);
    std::vector<Complex> z(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4;
        z[k] = center + radius * Complex(std::cos(angle), std::sin(angle));
    }

    constexpr int kMaxSweeps = 500;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool converged = true;
        for (std::size_t k = 0; k < n; ++k) {
            const auto [p, dp] = horner(a, z[k]);
            if (p == Complex(0.0)) continue;
            const Complex ratio = p / dp;
            Complex repulsion = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != k) repulsion += 1.0 / (z[k] - z[j]);
            }
            const Complex w = ratio / (1.0 - ratio * repulsion);
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) continue;
            z[k] -= w;
            if (std::abs(w) > 1e-15 * (1.0 + std::abs(z[k]))) converged = false;
        }
        if (converged) break;
    }

    // Newton polish on the polynomial, keeping a step only if it helps.
    for (auto& root : z) {
        for (int step = 0; step < 3; ++step) {
            const auto [p, dp] = horner(a, root);
            if (p == Complex(0.0) || dp == Complex(0.0)) break;
            const Complex trial = root - p / dp;
            if (std::abs(horner(a, trial).first) <= std::abs(p)) root = trial;
            else break;
        }
    }
    return z;
}

std::vector<double> build_projection_polynomial(const ConstraintMap& cm, const Vec& offset,
                                                const Vec& direction) {
    if (!cm.line_polynomial || cm.codim != 1) {
        throw Error(ErrorCode::NoPolyStructure, "constraint has no line-polynomial structure");
    }
    return cm.line_polynomial->coefficients(offset, direction);
}

std::vector<Vec> solve_multipliers(const ConstraintMap& cm, const ProjectionEquation& eq,
                                   const SolverSpec& spec, SolverKind kind, Engine* multistart) {
    const int k = cm.codim;
    auto residual = [&](const Vec& c) { return cm.eval(eq.point(c)); };
    auto jacobian = [&](const Vec& c) -> Mat {
        return cm.jacobian(eq.point(c)).transpose().lazyProduct(eq.direction);
    };

    std::vector<Vec> out;
    switch (kind) {
        case SolverKind::newton_single: {
            if (auto c = newton_solve(residual, jacobian, Vec::Zero(k), spec)) out.push_back(*c);
            break;
        }
        case SolverKind::poly_all_roots: {
            const auto coeffs = build_projection_polynomial(cm, eq.offset, eq.direction.col(0));
            for (const auto& root : poly_all_roots(coeffs)) {
                if (std::abs(root.imag()) > 1e-10 * std::max(1.0, std::abs(root.real()))) continue;
                Vec c(1);
                c[0] = polish_real_root(cm, eq, root.real());
                out.push_back(std::move(c));
            }
            break;
        }
        case SolverKind::newton_multistart: {
            const double sigma =
                spec.start_scale > 0.0 ? spec.start_scale : 2.0 * std::sqrt(double(cm.ambient_dim));
            if (auto c = newton_solve(residual, jacobian, Vec::Zero(k), spec)) out.push_back(*c);
            for (int s = 1; s < spec.n_starts; ++s) {
                Vec guess = sigma * standard_normal(*multistart, k);
                if (auto c = newton_solve(residual, jacobian, std::move(guess), spec)) {
                    out.push_back(*c);
                }
            }
            break;
        }
    }
    return out;
}

ProposalSet<MalaSolution> solve_mala_set(const ConstraintMap& cm, const Vec& x,
                                         const TangentFrame& frame, const Vec& v, double tau,
                                         const Potential& vbar, const SolverSpec& spec,
                                         SolverKind kind, const ProjectionOptions& opts,
                                         Engine* multistart) {
    const ProjectionEquation eq = mala_equation(cm, x, frame, v, tau, vbar);
    ProposalSet<MalaSolution> set;
    set.solver = kind;
    for (const Vec& c : solve_multipliers(cm, eq, spec, kind, multistart)) {
        set.solutions.push_back(make_mala_solution(cm, x, eq, c));
    }
    finalize(set.solutions, x, opts);
    return set;
}

ProposalSet<RattleSolution> solve_rattle_set(const ConstraintMap& cm, const PhasePoint& z,
                                             const MassMatrix& mass, double tau,
                                             const Potential& vbar, const SolverSpec& spec,
                                             SolverKind kind, const ProjectionOptions& opts,
                                             Engine* multistart) {
    const ProjectionEquation eq = rattle_equation(cm, z, mass, tau, vbar);
    ProposalSet<RattleSolution> set;
    set.solver = kind;
    for (const Vec& c : solve_multipliers(cm, eq, spec, kind, multistart)) {
        if (!(constraint_residual(cm, eq.point(c)) <= opts.tol_constraint)) continue;
        // The residual filter in finalize() applies the tolerance to the recomputed x^1.
        set.solutions.push_back(
            rattle_step(cm, z, c, mass, tau, vbar, std::numeric_limits<double>::infinity()));
    }
    finalize(set.solutions, z.x, opts);
    return set;
}

}  // namespace mpmc
