#pragma once

#include <vector>

#include "mpmc/config.hpp"
#include "mpmc/diagnostics.hpp"
#include "mpmc/problems.hpp"
#include "mpmc/projection.hpp"
#include "mpmc/rootfind.hpp"
#include "mpmc/sampler.hpp"

namespace testing {

using mpmc::Mat;
using mpmc::Vec;

mpmc::Problem circle();
mpmc::Problem torus(const char* potential = "zero");

/// Central finite-difference Jacobian of cm.eval (d x k).
Mat fd_jacobian(const mpmc::ConstraintMap& cm, const Vec& x, double h = 1e-5);

/// Uniformly drawn angles mapped onto the torus (R = 1, r = 0.5) with a
/// Gaussian cotangent momentum at unit temperature.
mpmc::PhasePoint random_torus_phase_point(mpmc::Engine& engine);

/// Real roots of a polynomial by dense scanning for sign changes followed by
/// bisection on [lo, hi].
std::vector<double> scan_and_bisect(const std::vector<double>& coeffs, double lo, double hi,
                                    double step);

/// Roots from the eigenvalues of the companion matrix.
std::vector<std::complex<double>> companion_roots(const std::vector<double>& coeffs);

double poly_eval(const std::vector<double>& coeffs, double c);

/// Reverse-step round trip error: step from z with lambda_x, then from the image
/// with lambda_p; returns the distance to z.
double reverse_step_error(const mpmc::ConstraintMap& cm, const mpmc::PhasePoint& z,
                    const mpmc::MassMatrix& mass, double tau, const mpmc::Potential& vbar,
                    const mpmc::SolverSpec& spec);

/// |det| of the finite-difference Jacobian of one RATTLE step (nearest
/// branch) written in graph-chart coordinates with canonical momenta.
/// Returns a negative value if the step has no solution at z.
double chart_jacobian_determinant(const mpmc::ConstraintMap& cm, const mpmc::PhasePoint& z,
                                  double tau, double h = 1e-6);

}  // namespace testing
