#include "mpmc/problems.hpp"

#include <cmath>
#include <set>
#include <vector>

#include "mpmc/diagnostics.hpp"
#include "mpmc/error.hpp"

namespace mpmc {

namespace {

using nlohmann::json;
using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

void poly_add(Poly& into, const Poly& p, double scale = 1.0) {
    if (into.size() < p.size()) into.resize(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) into[i] += scale * p[i];
}

void check_keys(const json& params, const std::string& problem,
                const std::set<std::string>& allowed) {
    if (!params.is_object()) {
        throw Error(ErrorCode::InvalidConfig, "problem_params must be an object");
    }
    for (const auto& [key, value] : params.items()) {
        if (!allowed.count(key)) {
            throw Error(ErrorCode::InvalidConfig,
                        "problem_params." + key + ": unknown key for problem " + problem);
        }
    }
}

double require_number(const json& params, const std::string& key, const std::string& problem) {
    if (!params.contains(key)) {
        throw Error(ErrorCode::MissingParam, "problem " + problem + " needs parameter " + key);
    }
    if (!params[key].is_number()) {
        throw Error(ErrorCode::InvalidConfig, "problem_params." + key + " must be a number");
    }
    return params[key].get<double>();
}

std::string potential_name(const json& params, const std::string& fallback) {
    if (!params.contains("potential")) return fallback;
    if (!params["potential"].is_string()) {
        throw Error(ErrorCode::InvalidConfig, "problem_params.potential must be a string");
    }
    return params["potential"].get<std::string>();
}

Vec read_point(const json& value, int d) {
    if (!value.is_array() || static_cast<int>(value.size()) != d) {
        throw Error(ErrorCode::InvalidConfig,
                    "problem_params.initial_point must be an array of " + std::to_string(d) +
                        " numbers");
    }
    Vec x(d);
    for (int i = 0; i < d; ++i) {
        if (!value[i].is_number()) {
            throw Error(ErrorCode::InvalidConfig, "problem_params.initial_point must hold numbers");
        }
        x[i] = value[i].get<double>();
    }
    return x;
}

[[noreturn]] void bad_potential(const std::string& problem, const std::string& name) {
    throw Error(ErrorCode::InvalidConfig,
                "problem_params.potential: unknown potential " + name + " for problem " + problem);
}

Problem make_circle(const json& params) {
    check_keys(params, "circle", {"potential", "initial_point"});
    if (potential_name(params, "zero") != "zero") bad_potential("circle", potential_name(params, ""));
    Problem p;
    p.name = "circle";
    auto& cm = p.constraint;
    cm.ambient_dim = 2;
    cm.codim = 1;
    cm.eval = [](const Vec& x) { return Vec::Constant(1, 0.5 * (x.squaredNorm() - 1.0)); };
    cm.jacobian = [](const Vec& x) { return Mat(x); };
    cm.line_polynomial = LinePolynomial{2, [](const Vec& a, const Vec& b) {
                                            return Poly{0.5 * (a.squaredNorm() - 1.0), a.dot(b),
                                                        0.5 * b.squaredNorm()};
                                        }};
    p.initial_point = Vec::Zero(2);
    p.initial_point[0] = 1.0;
    return p;
}

Problem make_torus(const json& params) {
    check_keys(params, "torus", {"R", "r", "potential", "initial_point"});
    const double big_r = require_number(params, "R", "torus");
    const double small_r = require_number(params, "r", "torus");
    if (!(small_r > 0.0) || !(big_r > small_r)) {
        throw Error(ErrorCode::InvalidConfig, "problem_params: torus needs R > r > 0");
    }
    Problem p;
    p.name = "torus";
    auto& cm = p.constraint;
    cm.ambient_dim = 3;
    cm.codim = 1;
    const double a = big_r * big_r - small_r * small_r;
    const double four_r2 = 4.0 * big_r * big_r;
    cm.eval = [big_r, small_r](const Vec& x) {
        return Vec::Constant(1, torus_xi(x, big_r, small_r));
    };
    cm.jacobian = [a, four_r2](const Vec& x) {
        const double s = x.squaredNorm();
        Mat g = 4.0 * (a + s) * x;
        g(0, 0) -= 2.0 * four_r2 * x[0];
        g(1, 0) -= 2.0 * four_r2 * x[1];
        return g;
    };
    cm.line_polynomial = LinePolynomial{4, [a, four_r2](const Vec& o, const Vec& d) {
        // (a + s(c))^2 - 4R^2 q(c) with s = |o + d c|^2, q its first two coordinates.
        const Poly s{a + o.squaredNorm(), 2.0 * o.dot(d), d.squaredNorm()};
        const Poly q{o[0] * o[0] + o[1] * o[1], 2.0 * (o[0] * d[0] + o[1] * d[1]),
                     d[0] * d[0] + d[1] * d[1]};
        Poly out = poly_mul(s, s);
        poly_add(out, q, -four_r2);
        return out;
    }};

    const std::string pot = potential_name(params, "zero");
    if (pot == "bimodal") {
        const double rr2 = (big_r + small_r) * (big_r + small_r);
        p.potential = Potential(
            [big_r, small_r](const Vec& x) { return torus_bimodal_potential(x, big_r, small_r); },
            [rr2](const Vec& x) {
                const double diff = x[0] - x[1];
                const double w = (x[0] * x[0] + x[1] * x[1]) / rr2 - 1.0;
                Vec g = Vec::Zero(3);
                g[0] = 2.0 * diff + 20.0 * w * x[0] / rr2;
                g[1] = -2.0 * diff + 20.0 * w * x[1] / rr2;
                return g;
            });
        p.component = torus_mode;
    } else if (pot != "zero") {
        bad_potential("torus", pot);
    }
    p.initial_point = Vec::Zero(3);
    p.initial_point[0] = big_r - small_r;
    return p;
}

Problem make_sphere9d(const json& params) {
    check_keys(params, "sphere9d", {"potential", "initial_point"});
    constexpr int d = 10;
    Problem p;
    p.name = "sphere9d";
    auto& cm = p.constraint;
    cm.ambient_dim = d;
    cm.codim = 2;
    cm.eval = [](const Vec& x) {
        Vec v(2);
        v[0] = 0.5 * (x.squaredNorm() - 9.0);
        v[1] = x[0] * x[1] * x[2] - 2.0;
        return v;
    };
    cm.jacobian = [](const Vec& x) {
        Mat g = Mat::Zero(d, 2);
        g.col(0) = x;
        g(0, 1) = x[1] * x[2];
        g(1, 1) = x[0] * x[2];
        g(2, 1) = x[0] * x[1];
        return g;
    };
    const std::string pot = potential_name(params, "sphere-quadratic");
    if (pot == "sphere-quadratic") {
        p.potential = Potential([](const Vec& x) { return 0.5 * (x[0] - 0.6) * (x[0] - 0.6); },
                                [](const Vec& x) {
                                    Vec g = Vec::Zero(x.size());
                                    g[0] = x[0] - 0.6;
                                    return g;
                                });
    } else if (pot != "zero") {
        bad_potential("sphere9d", pot);
    }
    const double head = std::cbrt(2.0);
    const double tail = std::sqrt((9.0 - 3.0 * head * head) / 7.0);
    p.initial_point = Vec::Constant(d, tail);
    p.initial_point.head(3).setConstant(head);
    p.component = sphere_component;
    return p;
}

struct Monomial {
    double coef = 0.0;
    std::vector<int> powers;
};

Problem make_custom(const json& params) {
    check_keys(params, "custom-polynomial-k1", {"dim", "terms", "initial_point", "potential"});
    if (potential_name(params, "zero") != "zero") {
        bad_potential("custom-polynomial-k1", potential_name(params, ""));
    }
    const double dim_value = require_number(params, "dim", "custom-polynomial-k1");
    const int d = static_cast<int>(dim_value);
    if (d < 2 || d != dim_value) {
        throw Error(ErrorCode::InvalidConfig, "problem_params.dim must be an integer >= 2");
    }
    if (!params.contains("terms")) {
        throw Error(ErrorCode::MissingParam, "problem custom-polynomial-k1 needs parameter terms");
    }
    if (!params.contains("initial_point")) {
        throw Error(ErrorCode::MissingParam,
                    "problem custom-polynomial-k1 needs parameter initial_point");
    }
    const json& terms_json = params["terms"];
    if (!terms_json.is_array() || terms_json.empty()) {
        throw Error(ErrorCode::InvalidConfig, "problem_params.terms must be a non-empty array");
    }
    std::vector<Monomial> terms;
    int degree = 0;
    for (const auto& t : terms_json) {
        if (!t.is_object() || t.size() != 2 || !t.contains("coef") || !t.contains("powers") ||
            !t["coef"].is_number() || !t["powers"].is_array() ||
            static_cast<int>(t["powers"].size()) != d) {
            throw Error(ErrorCode::InvalidConfig,
                        "problem_params.terms entries need coef and powers of length dim");
        }
        Monomial m;
        m.coef = t["coef"].get<double>();
        int total = 0;
        for (const auto& e : t["powers"]) {
            if (!e.is_number_integer() || e.get<long long>() < 0) {
                throw Error(ErrorCode::InvalidConfig,
                            "problem_params.terms powers must be non-negative integers");
            }
            m.powers.push_back(e.get<int>());
            total += m.powers.back();
        }
        degree = std::max(degree, total);
        terms.push_back(std::move(m));
    }

    Problem p;
    p.name = "custom-polynomial-k1";
    auto& cm = p.constraint;
    cm.ambient_dim = d;
    cm.codim = 1;
    cm.eval = [terms](const Vec& x) {
        double sum = 0.0;
        for (const auto& m : terms) {
            double v = m.coef;
            for (std::size_t i = 0; i < m.powers.size(); ++i) v *= std::pow(x[i], m.powers[i]);
            sum += v;
        }
        return Vec::Constant(1, sum);
    };
    cm.jacobian = [terms, d](const Vec& x) {
        Mat g = Mat::Zero(d, 1);
        for (const auto& m : terms) {
            for (int j = 0; j < d; ++j) {
                if (m.powers[j] == 0) continue;
                double v = m.coef * m.powers[j] * std::pow(x[j], m.powers[j] - 1);
                for (int i = 0; i < d; ++i) {
                    if (i != j) v *= std::pow(x[i], m.powers[i]);
                }
                g(j, 0) += v;
            }
        }
        return g;
    };
    cm.line_polynomial = LinePolynomial{degree, [terms](const Vec& o, const Vec& dir) {
        Poly out{0.0};
        for (const auto& m : terms) {
            Poly prod{m.coef};
            for (std::size_t i = 0; i < m.powers.size(); ++i) {
                const Poly factor{o[static_cast<Eigen::Index>(i)], dir[static_cast<Eigen::Index>(i)]};
                for (int e = 0; e < m.powers[i]; ++e) prod = poly_mul(prod, factor);
            }
            poly_add(out, prod);
        }
        return out;
    }};
    p.initial_point = read_point(params["initial_point"], d);
    return p;
}

}  // namespace

double torus_xi(const Vec& x, double big_r, double small_r) {
    const double u = big_r * big_r - small_r * small_r + x.squaredNorm();
    return u * u - 4.0 * big_r * big_r * (x[0] * x[0] + x[1] * x[1]);
}

double torus_sqrt_form(const Vec& x, double big_r, double small_r) {
    const double rho = big_r - std::hypot(x[0], x[1]);
    return rho * rho + x[2] * x[2] - small_r * small_r;
}

double torus_bimodal_potential(const Vec& x, double big_r, double small_r) {
    const double diff = x[0] - x[1];
    const double w = (x[0] * x[0] + x[1] * x[1]) / ((big_r + small_r) * (big_r + small_r)) - 1.0;
    return diff * diff + 5.0 * w * w;
}

int torus_mode(const Vec& x) { return x[0] + x[1] > 0.0 ? 0 : 1; }

Problem builtin_problem(const std::string& name, const nlohmann::json& params) {
    const json& given = params.is_null() ? json::object() : params;
    Problem p;
    if (name == "circle") {
        p = make_circle(given);
    } else if (name == "torus") {
        p = make_torus(given);
    } else if (name == "sphere9d") {
        p = make_sphere9d(given);
    } else if (name == "custom-polynomial-k1") {
        p = make_custom(given);
    } else {
        throw Error(ErrorCode::UnknownProblem, "unknown problem " + name);
    }
    validate(p.constraint);
    if (given.contains("initial_point")) {
        p.initial_point = read_point(given["initial_point"], p.constraint.ambient_dim);
    }
    p.initial_point = project_to_manifold(p.constraint, p.initial_point);
    return p;
}

}  // namespace mpmc
