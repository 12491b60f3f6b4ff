#include "mpmc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "mpmc/error.hpp"

namespace mpmc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, field + ": " + what);
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(where, "must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
    }
}

std::string field_name(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

double get_number(const json& j, const std::string& where, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail(field_name(where, key), "must be a number");
    return j[key].get<double>();
}

std::uint64_t get_count(const json& j, const std::string& where, const std::string& key,
                        std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_unsigned()) fail(field_name(where, key), "must be a non-negative integer");
    return j[key].get<std::uint64_t>();
}

int get_int(const json& j, const std::string& where, const std::string& key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) fail(field_name(where, key), "must be an integer");
    return j[key].get<int>();
}

bool get_bool(const json& j, const std::string& where, const std::string& key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_boolean()) fail(field_name(where, key), "must be true or false");
    return j[key].get<bool>();
}

std::string get_string(const json& j, const std::string& where, const std::string& key,
                       const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) fail(field_name(where, key), "must be a string");
    return j[key].get<std::string>();
}

SolverSpec parse_solver(const json& j) {
    check_keys(j, "sampler.solver",
               {"kind", "max_iter", "newton_tol", "n_starts", "start_scale", "period"});
    SolverSpec s;
    const std::string kind = get_string(j, "sampler.solver", "kind", to_string(s.kind));
    try {
        s.kind = solver_kind_from_string(kind);
    } catch (const Error&) {
        fail("sampler.solver.kind", "unknown solver '" + kind + "'");
    }
    s.max_iter = get_int(j, "sampler.solver", "max_iter", s.max_iter);
    s.newton_tol = get_number(j, "sampler.solver", "newton_tol", s.newton_tol);
    s.n_starts = get_int(j, "sampler.solver", "n_starts", s.n_starts);
    s.start_scale = get_number(j, "sampler.solver", "start_scale", s.start_scale);
    s.period = get_int(j, "sampler.solver", "period", s.period);
    return s;
}

OmegaPolicy parse_omega(const json& j) {
    check_keys(j, "sampler.omega", {"kind", "rank_table"});
    const std::string kind = get_string(j, "sampler.omega", "kind", "uniform");
    if (kind == "uniform") {
        if (j.contains("rank_table")) fail("sampler.omega.rank_table", "only allowed for kind ranked");
        return OmegaPolicy::uniform();
    }
    if (kind != "ranked") fail("sampler.omega.kind", "must be uniform or ranked");
    OmegaPolicy p = OmegaPolicy::ranked_far();
    if (j.contains("rank_table")) {
        const json& t = j["rank_table"];
        if (!t.is_object()) fail("sampler.omega.rank_table", "must be an object");
        p.rank_table.clear();
        for (const auto& [key, row] : t.items()) {
            int n = 0;
            std::size_t used = 0;
            try {
                n = std::stoi(key, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != key.size() || n < 1) {
                fail("sampler.omega.rank_table." + key, "key must be a positive integer");
            }
            if (!row.is_array()) fail("sampler.omega.rank_table." + key, "must be an array");
            std::vector<double> w;
            for (const auto& e : row) {
                if (!e.is_number()) fail("sampler.omega.rank_table." + key, "must hold numbers");
                w.push_back(e.get<double>());
            }
            p.rank_table[n] = std::move(w);
        }
    }
    try {
        p.validate();
    } catch (const Error& e) {
        fail("sampler.omega", e.what());
    }
    return p;
}

SamplerSettings parse_sampler(const json& j) {
    const std::string w = "sampler";
    check_keys(j, w,
               {"algorithm", "tau", "beta", "alpha", "mass", "proposal_potential", "solver",
                "omega", "tol_constraint", "reversibility_tol", "filter_tangential",
                "n_iterations", "seed"});
    SamplerSettings s;
    const std::string algorithm = get_string(j, w, "algorithm", "hmc");
    if (algorithm == "mala") {
        s.algorithm = Algorithm::mala;
    } else if (algorithm == "hmc") {
        s.algorithm = Algorithm::hmc;
    } else {
        fail("sampler.algorithm", "must be mala or hmc");
    }
    s.tau = get_number(j, w, "tau", s.tau);
    s.beta = get_number(j, w, "beta", s.beta);
    s.alpha = get_number(j, w, "alpha", s.alpha);
    if (j.contains("mass") && !j["mass"].is_null()) {
        if (!j["mass"].is_array()) fail("sampler.mass", "must be an array or null");
        std::vector<double> m;
        for (const auto& e : j["mass"]) {
            if (!e.is_number()) fail("sampler.mass", "must hold numbers");
            m.push_back(e.get<double>());
        }
        s.mass = std::move(m);
    }
    const std::string vbar = get_string(j, w, "proposal_potential", "same");
    if (vbar == "same") {
        s.proposal_potential = ProposalPotential::same;
    } else if (vbar == "zero") {
        s.proposal_potential = ProposalPotential::zero;
    } else {
        fail("sampler.proposal_potential", "must be same or zero");
    }
    if (j.contains("solver")) s.solver = parse_solver(j["solver"]);
    if (j.contains("omega")) s.omega = parse_omega(j["omega"]);
    s.tol_constraint = get_number(j, w, "tol_constraint", s.tol_constraint);
    s.reversibility_tol = get_number(j, w, "reversibility_tol", s.reversibility_tol);
    s.filter_tangential = get_bool(j, w, "filter_tangential", s.filter_tangential);
    s.n_iterations = get_count(j, w, "n_iterations", s.n_iterations);
    s.seed = get_count(j, w, "seed", s.seed);

    if (!(s.tau > 0.0)) fail("sampler.tau", "must be > 0");
    if (!(s.beta > 0.0)) fail("sampler.beta", "must be > 0");
    if (!(std::abs(s.alpha) < 1.0)) fail("sampler.alpha", "must satisfy |alpha| < 1");
    if (s.mass) {
        for (double m : *s.mass) {
            if (!(m > 0.0)) fail("sampler.mass", "entries must be > 0");
        }
    }
    if (!(s.tol_constraint > 0.0)) fail("sampler.tol_constraint", "must be > 0");
    if (!(s.reversibility_tol > s.solver.newton_tol)) {
        fail("sampler.reversibility_tol", "must exceed sampler.solver.newton_tol");
    }
    try {
        s.solver.validate();
    } catch (const Error& e) {
        fail("sampler", e.what());
    }
    return s;
}

json omega_json(const OmegaPolicy& p) {
    if (p.kind == OmegaPolicy::Kind::uniform) return {{"kind", "uniform"}};
    json table = json::object();
    for (const auto& [n, row] : p.rank_table) table[std::to_string(n)] = row;
    return {{"kind", "ranked"}, {"rank_table", table}};
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    check_keys(j, "",
               {"problem", "problem_params", "sampler", "scheme_label", "n_chains", "output_dir",
                "record_every"});
    RunConfig cfg;
    if (!j.contains("problem")) fail("problem", "missing");
    cfg.problem = get_string(j, "", "problem", "");
    if (j.contains("problem_params")) {
        if (!j["problem_params"].is_object()) fail("problem_params", "must be an object");
        cfg.problem_params = j["problem_params"];
    }
    if (!j.contains("sampler")) fail("sampler", "missing");
    cfg.sampler = parse_sampler(j["sampler"]);
    cfg.scheme_label = get_string(j, "", "scheme_label", cfg.scheme_label);
    cfg.n_chains = get_int(j, "", "n_chains", cfg.n_chains);
    if (cfg.n_chains < 1) fail("n_chains", "must be >= 1");
    cfg.output_dir = get_string(j, "", "output_dir", cfg.output_dir);
    cfg.record_every = get_count(j, "", "record_every", cfg.record_every);
    if (cfg.record_every < 1) fail("record_every", "must be >= 1");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("config", "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        fail("config", std::string("not valid JSON: ") + e.what());
    }
    return parse_run_config(j);
}

json to_json(const RunConfig& cfg) {
    const SamplerSettings& s = cfg.sampler;
    json sampler = {
        {"algorithm", to_string(s.algorithm)},
        {"tau", s.tau},
        {"beta", s.beta},
        {"alpha", s.alpha},
        {"mass", s.mass ? json(*s.mass) : json(nullptr)},
        {"proposal_potential", s.proposal_potential == ProposalPotential::same ? "same" : "zero"},
        {"solver",
         {{"kind", to_string(s.solver.kind)},
          {"max_iter", s.solver.max_iter},
          {"newton_tol", s.solver.newton_tol},
          {"n_starts", s.solver.n_starts},
          {"start_scale", s.solver.start_scale},
          {"period", s.solver.period}}},
        {"omega", omega_json(s.omega)},
        {"tol_constraint", s.tol_constraint},
        {"reversibility_tol", s.reversibility_tol},
        {"filter_tangential", s.filter_tangential},
        {"n_iterations", s.n_iterations},
        {"seed", s.seed},
    };
    return {
        {"problem", cfg.problem},
        {"problem_params", cfg.problem_params},
        {"sampler", sampler},
        {"scheme_label", cfg.scheme_label},
        {"n_chains", cfg.n_chains},
        {"output_dir", cfg.output_dir},
        {"record_every", cfg.record_every},
    };
}

PreparedRun prepare_run(const RunConfig& cfg) {
    PreparedRun run{builtin_problem(cfg.problem, cfg.problem_params), {}};
    const SamplerSettings& s = cfg.sampler;
    SamplerConfig& sc = run.sampler;
    sc.algorithm = s.algorithm;
    sc.tau = s.tau;
    sc.beta = s.beta;
    sc.alpha = s.alpha;
    if (s.mass) {
        sc.mass = MassMatrix(Eigen::Map<const Vec>(s.mass->data(),
                                                   static_cast<Eigen::Index>(s.mass->size())));
    }
    sc.potential = run.problem.potential;
    if (s.proposal_potential == ProposalPotential::same) sc.proposal_potential = sc.potential;
    sc.solver = s.solver;
    sc.omega = s.omega;
    sc.tol_constraint = s.tol_constraint;
    sc.reversibility_tol = s.reversibility_tol;
    sc.filter_tangential = s.filter_tangential;
    sc.n_iterations = s.n_iterations;
    sc.seed = s.seed;
    sc.component = run.problem.component;
    try {
        sc.validate(run.problem.constraint);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidConfig) throw;
        const std::string msg = e.what();
        throw Error(ErrorCode::InvalidConfig, msg.rfind("sampler", 0) == 0 ? msg : "sampler: " + msg);
    }
    return run;
}

}  // namespace mpmc
