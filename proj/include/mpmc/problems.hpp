#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "mpmc/geometry.hpp"
#include "mpmc/potential.hpp"

namespace mpmc {

/// A ready-to-sample level set: constraint, target potential and start point.
struct Problem {
    std::string name;
    ConstraintMap constraint;
    Potential potential;
    Vec initial_point;
    /// Component labelling (sphere9d, bimodal torus); empty otherwise.
    std::function<int(const Vec&)> component;
};

/// Builds one of circle, torus, sphere9d, custom-polynomial-k1.
///
/// params (JSON object):
///   torus:   R, r (required), potential = "zero" | "bimodal"
///   circle:  potential = "zero"
///   sphere9d: potential = "sphere-quadratic" | "zero"
///   custom-polynomial-k1: dim, terms = [{"coef": a, "powers": [...]}, ...],
///                         initial_point (required)
///   any:     initial_point, pulled onto the level set by Newton iterations
///
/// Throws UnknownProblem, MissingParam, or InvalidConfig on malformed params.
Problem builtin_problem(const std::string& name, const nlohmann::json& params);

// Torus pieces, exposed for tests and the reference-density command.
double torus_xi(const Vec& x, double big_r, double small_r);
/// (R - sqrt(x1^2 + x2^2))^2 + x3^2 - r^2, the form with the square root.
double torus_sqrt_form(const Vec& x, double big_r, double small_r);
/// (x1 - x2)^2 + 5 ((x1^2 + x2^2) / (R + r)^2 - 1)^2
double torus_bimodal_potential(const Vec& x, double big_r, double small_r);
/// Mode of the bimodal torus potential: 0 when x1 + x2 > 0, else 1.
int torus_mode(const Vec& x);

}  // namespace mpmc
