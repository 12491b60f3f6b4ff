#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "mpmc/diagnostics.hpp"
#include "mpmc/rootfind.hpp"

namespace mpmc {

/// How one proposal is picked from a distance-sorted solution set.
struct OmegaPolicy {
    enum class Kind { uniform, ranked };

    Kind kind = Kind::uniform;
    std::map<int, std::vector<double>> rank_table;  ///< set size n -> n probabilities

    static OmegaPolicy uniform() { return {}; }
    /// Rows 1-4 slightly favouring the far solutions.
    static OmegaPolicy ranked_far();

    /// Throws InvalidConfig unless every row is positive and sums to 1.
    void validate() const;
    /// Throws RankTableMissing when the policy is ranked and has no row for n.
    const std::vector<double>& rank_row(std::size_t n) const;

    friend bool operator==(const OmegaPolicy&, const OmegaPolicy&) = default;
};

struct Selection {
    std::size_t index = 0;
    double weight = 1.0;
    bool fallback = false;  ///< ranked row missing, uniform used instead
};

/// Draws an index of a set of size n > 0 given a uniform variate u in [0, 1).
Selection select_proposal(std::size_t n, const OmegaPolicy& omega, double u);

/// Probability the policy gives to `index` in a set of size n (uniform fallback
/// when a ranked row is missing).
double omega_of(std::size_t n, std::size_t index, const OmegaPolicy& omega,
                bool* fallback = nullptr);

enum class Algorithm { mala, hmc };
const char* to_string(Algorithm a) noexcept;

struct SamplerConfig {
    Algorithm algorithm = Algorithm::hmc;
    double tau = 0.1;
    double beta = 1.0;
    double alpha = 0.0;                ///< momentum persistence, HMC only
    std::optional<MassMatrix> mass;    ///< identity when empty
    Potential potential;               ///< V in the target
    Potential proposal_potential;      ///< Vbar in the proposal map
    SolverSpec solver;
    OmegaPolicy omega;
    double tol_constraint = kDefaultConstraintTol;
    double reversibility_tol = 1e-6;
    bool filter_tangential = true;
    std::uint64_t n_iterations = 0;
    std::uint64_t seed = 0;
    std::uint64_t chain = 0;
    /// Optional component labelling used for occupancy and transition counts.
    std::function<int(const Vec&)> component;

    MassMatrix mass_matrix(int d) const { return mass ? *mass : MassMatrix::identity(d); }
    ProjectionOptions projection_options() const;
    /// Throws InvalidConfig on invalid values or combinations with `cm`.
    void validate(const ConstraintMap& cm) const;
};

enum class Stage { no_solution, reversibility_failed, mh_rejected, accepted };
const char* to_string(Stage s) noexcept;

struct IterationRecord {
    std::uint64_t iter = 0;
    Vec x;                       ///< position after the iteration
    bool accepted = false;
    int n_forward = 0;
    int n_backward = -1;         ///< -1 when the check was not reached
    double jump_distance = 0.0;
    Stage stage = Stage::no_solution;
    SolverKind solver = SolverKind::newton_single;
    bool multiplier_mismatch = false;
    bool waived_membership_miss = false;
    bool omega_fallback = false;
};

using RecordSink = std::function<void(const IterationRecord&)>;

/// One iteration of multiple-projection MALA; updates `x` in place.
IterationRecord mala_iteration(const ConstraintMap& cm, const SamplerConfig& cfg, Vec& x,
                               std::uint64_t iter, ChainStreams& streams);

/// p <- alpha p + sqrt((1 - alpha^2) / beta) eta with eta = P_M(x) w, w ~ N(0, M).
void hmc_momentum_update(const ConstraintMap& cm, const SamplerConfig& cfg, PhasePoint& z,
                         Engine& engine);

/// One iteration of multiple-projection HMC (refresh, RATTLE proposal,
/// reversibility check, Metropolis step, reversal, refresh); updates `z`.
IterationRecord hmc_iteration(const ConstraintMap& cm, const SamplerConfig& cfg, PhasePoint& z,
                              std::uint64_t iter, ChainStreams& streams);

struct ChainResult {
    ChainStats stats;
    Vec x;
    std::optional<Vec> p;  ///< final momentum for HMC chains
};

/// Runs cfg.n_iterations iterations from x0 (and p0 for HMC, drawn from the
/// Gaussian on the cotangent space when absent). Numerical failures surface
/// as ChainAbort with the iteration index.
ChainResult run_chain(const ConstraintMap& cm, const SamplerConfig& cfg, const Vec& x0,
                      std::optional<Vec> p0 = std::nullopt, const RecordSink& sink = {});

/// Runs `n_chains` chains concurrently (chain index i uses cfg.chain = i) and
/// merges their statistics. `sink_for(i)` may return an empty sink.
ChainStats run_chains(const ConstraintMap& cm, const SamplerConfig& cfg, const Vec& x0,
                      int n_chains, const std::function<RecordSink(int)>& sink_for = {});

/// Folds one record into the running statistics. `previous` is the position
/// before the iteration.
void record_iteration(ChainStats& stats, const IterationRecord& rec, const Vec& previous,
                      const std::function<int(const Vec&)>& component);

}  // namespace mpmc
