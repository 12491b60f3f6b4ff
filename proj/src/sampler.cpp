#include "mpmc/sampler.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "mpmc/error.hpp"

namespace mpmc {

namespace {

constexpr double kMultiplierMatchTol = 1e-6;

struct Membership {
    bool found = false;
    std::size_t index = 0;
    std::size_t count = 0;
};

// Locates `target` in a set sorted by distance from `origin`. When absent, the
// index is where `target` would sit in that order and count includes it.
template <class Solution>
Membership locate(const ProposalSet<Solution>& set, const Vec& target, const Vec& origin,
                  double tol) {
    Membership m;
    m.count = set.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double d = (position(set[i]) - target).norm();
        if (d <= tol && d < best) {
            best = d;
            m.found = true;
            m.index = i;
        }
    }
    if (!m.found) {
        const double dist = (target - origin).norm();
        std::size_t idx = 0;
        while (idx < set.size() && (position(set[idx]) - origin).norm() < dist) ++idx;
        m.index = idx;
        m.count = set.size() + 1;
    }
    return m;
}

// Multistart guesses come from an engine keyed by (iteration, call); seeding
// is costly, so other solvers get none.
std::optional<Engine> multistart_engine(const SamplerConfig& cfg, SolverKind kind,
                                        std::uint64_t iter, std::uint64_t call) {
    if (kind != SolverKind::newton_multistart) return std::nullopt;
    return make_engine(cfg.seed, Stream::multistart, cfg.chain, iter, call);
}

Engine* ptr(std::optional<Engine>& e) { return e ? &*e : nullptr; }

bool metropolis_accept(double log_ratio, Engine& engine) {
    const double r = uniform01(engine);
    return log_ratio >= 0.0 || r <= std::exp(log_ratio);
}

}  // namespace

OmegaPolicy OmegaPolicy::ranked_far() {
    OmegaPolicy p;
    p.kind = Kind::ranked;
    p.rank_table = {
        {1, {1.0}},
        {2, {0.4, 0.6}},
        {3, {0.2, 0.4, 0.4}},
        {4, {0.2, 0.3, 0.3, 0.2}},
    };
    return p;
}

void OmegaPolicy::validate() const {
    if (kind == Kind::uniform) return;
    for (const auto& [n, row] : rank_table) {
        if (n < 1 || row.size() != static_cast<std::size_t>(n)) {
            throw Error(ErrorCode::InvalidConfig,
                        "omega rank_table row " + std::to_string(n) + " must have " +
                            std::to_string(n) + " entries");
        }
        double sum = 0.0;
        for (double w : row) {
            if (!(w > 0.0)) {
                throw Error(ErrorCode::InvalidConfig, "omega rank_table entries must be > 0");
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw Error(ErrorCode::InvalidConfig,
                        "omega rank_table row " + std::to_string(n) + " does not sum to 1");
        }
    }
}

const std::vector<double>& OmegaPolicy::rank_row(std::size_t n) const {
    const auto it = rank_table.find(static_cast<int>(n));
    if (kind != Kind::ranked || it == rank_table.end()) {
        throw Error(ErrorCode::RankTableMissing,
                    "no ranked omega row for a set of size " + std::to_string(n));
    }
    return it->second;
}

Selection select_proposal(std::size_t n, const OmegaPolicy& omega, double u) {
    Selection s;
    if (omega.kind == OmegaPolicy::Kind::ranked) {
        const auto it = omega.rank_table.find(static_cast<int>(n));
        if (it != omega.rank_table.end()) {
            double cumulative = 0.0;
            s.index = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cumulative += it->second[i];
                if (u < cumulative) {
                    s.index = i;
                    break;
                }
            }
            s.weight = it->second[s.index];
            return s;
        }
        s.fallback = true;
    }
    s.index = std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
    s.weight = 1.0 / static_cast<double>(n);
    return s;
}

double omega_of(std::size_t n, std::size_t index, const OmegaPolicy& omega, bool* fallback) {
    if (omega.kind == OmegaPolicy::Kind::ranked) {
        const auto it = omega.rank_table.find(static_cast<int>(n));
        if (it != omega.rank_table.end()) return it->second.at(index);
        if (fallback) *fallback = true;
    }
    return 1.0 / static_cast<double>(n);
}

const char* to_string(Algorithm a) noexcept { return a == Algorithm::mala ? "mala" : "hmc"; }

const char* to_string(Stage s) noexcept {
    switch (s) {
        case Stage::no_solution: return "no_solution";
        case Stage::reversibility_failed: return "reversibility_failed";
        case Stage::mh_rejected: return "mh_rejected";
        case Stage::accepted: return "accepted";
    }
    return "unknown";
}

ProjectionOptions SamplerConfig::projection_options() const {
    ProjectionOptions o;
    o.tol_constraint = tol_constraint;
    o.filter_tangential = filter_tangential;
    return o;
}

void SamplerConfig::validate(const ConstraintMap& cm) const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    mpmc::validate(cm);
    if (!(tau > 0.0)) fail("sampler.tau must be > 0");
    if (!(beta > 0.0)) fail("sampler.beta must be > 0");
    if (!(std::abs(alpha) < 1.0)) fail("sampler.alpha must satisfy |alpha| < 1");
    if (!(tol_constraint > 0.0)) fail("sampler.tol_constraint must be > 0");
    solver.validate();
    if (!(reversibility_tol > solver.newton_tol)) {
        fail("sampler.reversibility_tol must exceed solver.newton_tol");
    }
    omega.validate();
    if (mass && mass->size() != cm.ambient_dim) fail("sampler.mass must have one entry per coordinate");
    if (solver.kind == SolverKind::poly_all_roots && !cm.line_polynomial) {
        fail("solver.kind poly_all_roots needs a polynomial constraint with k = 1");
    }
}

IterationRecord mala_iteration(const ConstraintMap& cm, const SamplerConfig& cfg, Vec& x,
                               std::uint64_t iter, ChainStreams& streams) {
    IterationRecord rec;
    rec.iter = iter;
    rec.solver = cfg.solver.kind_for_iteration(iter);
    const MassMatrix plain = MassMatrix::identity(cm.ambient_dim);
    const ProjectionOptions opts = cfg.projection_options();

    const TangentFrame frame = tangent_frame(cm, x, plain);
    const Vec v = standard_normal(streams.momentum, cm.manifold_dim()) / std::sqrt(cfg.beta);

    auto forward_guesses = multistart_engine(cfg, rec.solver, iter, 0);
    const auto forward = solve_mala_set(cm, x, frame, v, cfg.tau, cfg.proposal_potential,
                                        cfg.solver, rec.solver, opts, ptr(forward_guesses));
    rec.n_forward = static_cast<int>(forward.size());
    if (forward.empty()) {
        rec.stage = Stage::no_solution;
        rec.x = x;
        return rec;
    }

    const Selection pick = select_proposal(forward.size(), cfg.omega, uniform01(streams.selection));
    rec.omega_fallback = pick.fallback;
    const MalaSolution& chosen = forward[pick.index];
    const Vec& y = chosen.y;

    const TangentFrame frame_y = tangent_frame(cm, y, plain);
    const Vec v_back = mala_reverse_velocity(y, frame_y, x, cfg.tau, cfg.proposal_potential);
    auto backward_guesses = multistart_engine(cfg, rec.solver, iter, 1);
    const auto backward = solve_mala_set(cm, y, frame_y, v_back, cfg.tau, cfg.proposal_potential,
                                         cfg.solver, rec.solver, opts, ptr(backward_guesses));
    rec.n_backward = static_cast<int>(backward.size());

    const Membership back = locate(backward, x, y, cfg.reversibility_tol);
    if (!back.found) {
        if (rec.solver != SolverKind::poly_all_roots) {
            rec.stage = Stage::reversibility_failed;
            rec.x = x;
            return rec;
        }
        rec.waived_membership_miss = true;
    } else {
        const Vec c_exact = mala_multiplier_from_target(cm, y, x, cfg.tau, cfg.proposal_potential);
        rec.multiplier_mismatch = (backward[back.index].c - c_exact).norm() > kMultiplierMatchTol;
    }

    bool fallback = false;
    const double w_back = omega_of(back.count, back.index, cfg.omega, &fallback);
    rec.omega_fallback = rec.omega_fallback || fallback;
    const double energy_new = cfg.potential.value(y) + 0.5 * v_back.squaredNorm();
    const double energy_old = cfg.potential.value(x) + 0.5 * v.squaredNorm();
    const double log_ratio =
        std::log(w_back) - std::log(pick.weight) - cfg.beta * (energy_new - energy_old);

    if (metropolis_accept(log_ratio, streams.metropolis)) {
        rec.jump_distance = (y - x).norm();
        rec.accepted = true;
        rec.stage = Stage::accepted;
        x = y;
    } else {
        rec.stage = Stage::mh_rejected;
    }
    rec.x = x;
    return rec;
}

void hmc_momentum_update(const ConstraintMap& cm, const SamplerConfig& cfg, PhasePoint& z,
                         Engine& engine) {
    const MassMatrix mass = cfg.mass_matrix(cm.ambient_dim);
    const Vec eta = sample_cotangent_gaussian(cm, z.x, mass, cfg.beta, engine);
    if (cfg.alpha == 0.0) {
        z.p = eta;
    } else {
        z.p = cfg.alpha * z.p + std::sqrt(1.0 - cfg.alpha * cfg.alpha) * eta;
    }
}

IterationRecord hmc_iteration(const ConstraintMap& cm, const SamplerConfig& cfg, PhasePoint& z,
                              std::uint64_t iter, ChainStreams& streams) {
    IterationRecord rec;
    rec.iter = iter;
    rec.solver = cfg.solver.kind_for_iteration(iter);
    const MassMatrix mass = cfg.mass_matrix(cm.ambient_dim);
    const ProjectionOptions opts = cfg.projection_options();
    const Potential& vbar = cfg.proposal_potential;

    hmc_momentum_update(cm, cfg, z, streams.momentum);

    // Proposal, reversibility check and Metropolis step; `z` is replaced only on acceptance.
    [&] {
        auto forward_guesses = multistart_engine(cfg, rec.solver, iter, 0);
        const auto forward = solve_rattle_set(cm, z, mass, cfg.tau, vbar, cfg.solver, rec.solver,
                                              opts, ptr(forward_guesses));
        rec.n_forward = static_cast<int>(forward.size());
        if (forward.empty()) {
            rec.stage = Stage::no_solution;
            return;
        }

        const Selection pick =
            select_proposal(forward.size(), cfg.omega, uniform01(streams.selection));
        rec.omega_fallback = pick.fallback;
        const RattleSolution& chosen = forward[pick.index];

        auto backward_guesses = multistart_engine(cfg, rec.solver, iter, 1);
        const auto backward = solve_rattle_set(cm, chosen.z1, mass, cfg.tau, vbar, cfg.solver,
                                               rec.solver, opts, ptr(backward_guesses));
        rec.n_backward = static_cast<int>(backward.size());

        // Positions alone decide membership: the momentum is then forced.
        const Membership back = locate(backward, z.x, chosen.z1.x, cfg.reversibility_tol);
        if (!back.found) {
            if (rec.solver != SolverKind::poly_all_roots) {
                rec.stage = Stage::reversibility_failed;
                return;
            }
            rec.waived_membership_miss = true;
        } else {
            rec.multiplier_mismatch =
                (backward[back.index].lambda_x - chosen.lambda_p).norm() > kMultiplierMatchTol;
        }

        bool fallback = false;
        const double w_back = omega_of(back.count, back.index, cfg.omega, &fallback);
        rec.omega_fallback = rec.omega_fallback || fallback;
        const double dh = hamiltonian(cfg.potential, chosen.z1, mass) -
                          hamiltonian(cfg.potential, z, mass);
        const double log_ratio = std::log(w_back) - std::log(pick.weight) - cfg.beta * dh;

        if (metropolis_accept(log_ratio, streams.metropolis)) {
            rec.jump_distance = (chosen.z1.x - z.x).norm();
            rec.accepted = true;
            rec.stage = Stage::accepted;
            z = chosen.z1;
        } else {
            rec.stage = Stage::mh_rejected;
        }
    }();

    z.p = -z.p;
    hmc_momentum_update(cm, cfg, z, streams.momentum);
    rec.x = z.x;
    return rec;
}

void record_iteration(ChainStats& stats, const IterationRecord& rec, const Vec& previous,
                      const std::function<int(const Vec&)>& component) {
    ++stats.n_total;
    ++stats.forward_hist[rec.n_forward];
    const bool expensive = rec.solver != SolverKind::newton_single;
    if (expensive) ++stats.n_expensive;
    if (rec.n_backward >= 0) {
        ++stats.backward_hist[rec.n_backward];
        ++stats.n_reversibility_invoked;
        if (rec.stage == Stage::accepted || rec.stage == Stage::mh_rejected) {
            ++stats.n_reversibility_passed;
        }
    }
    if (rec.stage == Stage::accepted) {
        ++stats.n_accepted_moves;
        stats.sum_jump_distance += rec.jump_distance;
        if (expensive) {
            ++stats.n_expensive_accepted;
            stats.sum_jump_expensive += rec.jump_distance;
        }
    }
    if ((previous[0] > 0.0) != (rec.x[0] > 0.0)) ++stats.n_large_jumps;
    if (component) {
        const int from = component(previous);
        const int to = component(rec.x);
        ++stats.component_occupancy[to];
        ++stats.component_transitions[{from, to}];
    }
    if (rec.multiplier_mismatch) ++stats.n_multiplier_mismatch;
    if (rec.waived_membership_miss) ++stats.n_waived_membership_misses;
    if (rec.omega_fallback) ++stats.n_omega_fallbacks;
}

namespace {

Error chain_abort(std::uint64_t chain, std::uint64_t iter, const Error& e) {
    return Error(ErrorCode::ChainAbort, "chain " + std::to_string(chain) + " aborted at iteration " +
                                            std::to_string(iter) + ": " + to_string(e.code()) +
                                            ": " + e.what());
}

}  // namespace

ChainResult run_chain(const ConstraintMap& cm, const SamplerConfig& cfg, const Vec& x0,
                      std::optional<Vec> p0, const RecordSink& sink) {
    cfg.validate(cm);
    if (x0.size() != cm.ambient_dim) {
        throw Error(ErrorCode::InvalidConfig, "initial position has the wrong dimension");
    }
    if (!(constraint_residual(cm, x0) <= cfg.tol_constraint)) {
        throw Error(ErrorCode::OffManifold, "initial position is not on the level set");
    }

    const auto start = std::chrono::steady_clock::now();
    ChainStreams streams(cfg.seed, cfg.chain);
    ChainResult result;
    const MassMatrix mass = cfg.mass_matrix(cm.ambient_dim);

    PhasePoint z{x0, Vec::Zero(cm.ambient_dim)};
    if (cfg.algorithm == Algorithm::hmc) {
        if (p0) {
            if (p0->size() != cm.ambient_dim ||
                !(tangency_residual(cm, x0, *p0, mass) <= cfg.tol_constraint)) {
                throw Error(ErrorCode::InvalidConfig,
                            "initial momentum is not in the cotangent space");
            }
            z.p = *p0;
        } else {
            Engine initial = make_engine(cfg.seed, Stream::initial, cfg.chain);
            try {
                z.p = sample_cotangent_gaussian(cm, x0, mass, cfg.beta, initial);
            } catch (const Error& e) {
                throw chain_abort(cfg.chain, 0, e);
            }
        }
    }

    Vec previous = x0;
    for (std::uint64_t i = 0; i < cfg.n_iterations; ++i) {
        IterationRecord rec;
        try {
            rec = cfg.algorithm == Algorithm::mala ? mala_iteration(cm, cfg, z.x, i, streams)
                                                   : hmc_iteration(cm, cfg, z, i, streams);
        } catch (const Error& e) {
            throw chain_abort(cfg.chain, i, e);
        }
        record_iteration(result.stats, rec, previous, cfg.component);
        if (sink) sink(rec);
        previous = rec.x;
    }

    result.stats.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.x = z.x;
    if (cfg.algorithm == Algorithm::hmc) result.p = z.p;
    return result;
}

ChainStats run_chains(const ConstraintMap& cm, const SamplerConfig& cfg, const Vec& x0,
                      int n_chains, const std::function<RecordSink(int)>& sink_for) {
    std::vector<ChainStats> per_chain(static_cast<std::size_t>(n_chains));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chains));
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(n_chains));
    for (int c = 0; c < n_chains; ++c) {
        workers.emplace_back([&, c] {
            try {
                SamplerConfig local = cfg;
                local.chain = static_cast<std::uint64_t>(c);
                const RecordSink sink = sink_for ? sink_for(c) : RecordSink{};
                per_chain[static_cast<std::size_t>(c)] = run_chain(cm, local, x0, std::nullopt, sink).stats;
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    ChainStats merged;
    for (const auto& s : per_chain) merged.merge(s);
    return merged;
}

}  // namespace mpmc
