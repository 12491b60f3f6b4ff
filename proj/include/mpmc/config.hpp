#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpmc/problems.hpp"
#include "mpmc/sampler.hpp"

namespace mpmc {

enum class ProposalPotential { same, zero };

/// Sampler settings as they appear in a run file (potentials by name).
struct SamplerSettings {
    Algorithm algorithm = Algorithm::hmc;
    double tau = 0.1;
    double beta = 1.0;
    double alpha = 0.0;
    std::optional<std::vector<double>> mass;
    ProposalPotential proposal_potential = ProposalPotential::same;
    SolverSpec solver;
    OmegaPolicy omega;
    double tol_constraint = kDefaultConstraintTol;
    double reversibility_tol = 1e-6;
    bool filter_tangential = true;
    std::uint64_t n_iterations = 1000;
    std::uint64_t seed = 0;

    friend bool operator==(const SamplerSettings&, const SamplerSettings&) = default;
};

struct RunConfig {
    std::string problem;
    nlohmann::json problem_params = nlohmann::json::object();
    SamplerSettings sampler;
    std::string scheme_label;
    int n_chains = 1;
    std::string output_dir = "out";
    std::uint64_t record_every = 1;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Strict parse: unknown keys, wrong types and invalid values throw
/// InvalidConfig naming the offending field.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
/// Every field, defaults included.
nlohmann::json to_json(const RunConfig& cfg);

/// Builds the problem and the sampler configuration; validates both.
struct PreparedRun {
    Problem problem;
    SamplerConfig sampler;
};
PreparedRun prepare_run(const RunConfig& cfg);

}  // namespace mpmc
