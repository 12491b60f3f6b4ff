// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mpmc/error.hpp"
#include "support.hpp"

using namespace mpmc;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kDesk = 1000000;
constexpr std::uint64_t kFull = 10000000;
// Integrated autocorrelation of the angle series is about 20 iterations, so a
// stride of 100 gives nearly independent draws for the goodness-of-fit tests.
constexpr std::uint64_t kStride = 100;

/// Collects the failing conditions of one criterion and a readable summary.
class Verdict {
public:
    void within(const std::string& what, double value, double lo, double hi) {
        note(what, value);
        if (!(value >= lo && value <= hi)) {
            std::ostringstream s;
            s << what << "=" << value << " outside [" << lo << ", " << hi << "]";
            failures_.push_back(s.str());
        }
    }
    void near(const std::string& what, double value, double target, double tol) {
        within(what, value, target - tol, target + tol);
    }
    void require(const std::string& what, bool ok) {
        if (!ok) failures_.push_back(what);
    }
    void note(const std::string& what, double value) {
        std::ostringstream s;
        s << what << "=" << value;
        notes_.push_back(s.str());
    }
    bool passed() const { return failures_.empty(); }

    void print(int id, const std::string& title) const {
        std::printf("criterion %d: %s  %s\n", id, passed() ? "PASS" : "FAIL", title.c_str());
        for (const auto& f : failures_) std::printf("    failed: %s\n", f.c_str());
        std::string line;
        for (const auto& n : notes_) {
            if (line.size() + n.size() > 96) {
                std::printf("    %s\n", line.c_str());
                line.clear();
            }
            line += (line.empty() ? "" : "  ") + n;
        }
        if (!line.empty()) std::printf("    %s\n", line.c_str());
        std::fflush(stdout);
    }

private:
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

double fraction(const std::map<int, std::uint64_t>& hist, int key) {
    std::uint64_t total = 0;
    for (const auto& [k, v] : hist) total += v;
    const auto it = hist.find(key);
    return total == 0 || it == hist.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

double occupancy(const ChainStats& s, int component) {
    const auto it = s.component_occupancy.find(component);
    return it == s.component_occupancy.end()
               ? 0.0
               : static_cast<double>(it->second) / static_cast<double>(s.n_total);
}

struct TorusRun {
    std::string name;
    ChainStats stats;   ///< all iterations
    ChainStats desk;    ///< the first 10^6 iterations
    std::vector<double> phi, theta;            ///< thinned, all iterations
    std::vector<double> phi_desk, theta_desk;  ///< thinned, first 10^6
    double worst_residual = 0.0;
    double seconds = 0.0;
};

PreparedRun load(const std::string& name, std::uint64_t n) {
    RunConfig cfg = load_run_config(std::string(MPMC_CONFIG_DIR) + "/" + name + ".cfg");
    cfg.sampler.n_iterations = n;
    return prepare_run(cfg);
}

// Runs a bundled torus configuration for n iterations. The first 10^6
// iterations of a longer run coincide with the bundled desk-scale run because
// every random stream is keyed by the iteration index.
TorusRun run_torus(const std::string& name, std::uint64_t n) {
    const PreparedRun run = load(name, n);
    const ConstraintMap& cm = run.problem.constraint;
    TorusRun out;
    out.name = name;
    Vec previous = run.problem.initial_point;
    const auto start = std::chrono::steady_clock::now();
    const RecordSink sink = [&](const IterationRecord& rec) {
        out.worst_residual = std::max(out.worst_residual, constraint_residual(cm, rec.x));
        if (rec.iter < kDesk) record_iteration(out.desk, rec, previous, run.sampler.component);
        previous = rec.x;
        if ((rec.iter + 1) % kStride != 0) return;
        const TorusAngles a = torus_angles(rec.x, 1.0, 0.5);
        out.phi.push_back(a.phi);
        out.theta.push_back(a.theta);
        if (rec.iter < kDesk) {
            out.phi_desk.push_back(a.phi);
            out.theta_desk.push_back(a.theta);
        }
    };
    out.stats = run_chain(cm, run.sampler, run.problem.initial_point, std::nullopt, sink).stats;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("  ran %s: n=%llu in %.1fs\n", name.c_str(), static_cast<unsigned long long>(n),
                out.seconds);
    std::fflush(stdout);
    return out;
}

double gof(const std::vector<double>& angles, std::size_t bins, bool phi) {
    Histogram1D h(0.0, kTwoPi, bins);
    for (double a : angles) h.add(a);
    if (phi) return chi_square_gof(h, [](double x) { return torus_phi_reference_density(x, 1.0, 0.5); }).p_value;
    return chi_square_gof(h, [](double) { return 1.0 / kTwoPi; }).p_value;
}

// Targets for the Newton and all-roots schemes on the uniform torus.
void check_newton(Verdict& v, const ChainStats& s, const std::string& tag) {
    const SummaryRates r = summary_rates(s);
    v.near(tag + "zero_solutions", fraction(s.forward_hist, 0), 0.480, 0.010);
    v.near(tag + "fsr", r.fsr, 0.52, 0.01);
    v.near(tag + "bsr", r.bsr.value_or(-1.0), 0.90, 0.01);
    v.near(tag + "tar", r.tar, 0.45, 0.01);
    v.near(tag + "mean_jump", r.mean_jump.value_or(-1.0), 0.73, 0.02);
}

void check_all_roots(Verdict& v, const ChainStats& s, const std::string& tag) {
    const SummaryRates r = summary_rates(s);
    v.near(tag + "fwd0", fraction(s.forward_hist, 0), 0.459, 0.010);
    v.near(tag + "fwd2", fraction(s.forward_hist, 2), 0.499, 0.010);
    v.near(tag + "fwd4", fraction(s.forward_hist, 4), 0.042, 0.010);
    v.near(tag + "bwd2", fraction(s.backward_hist, 2), 0.912, 0.010);
    v.near(tag + "bwd4", fraction(s.backward_hist, 4), 0.088, 0.010);
    v.require(tag + "bsr is exactly 1", r.bsr && *r.bsr == 1.0);
    v.note(tag + "bsr", r.bsr.value_or(-1.0));
    v.near(tag + "tar", r.tar, 0.44, 0.01);
    v.near(tag + "mean_jump", r.mean_jump.value_or(-1.0), 1.13, 0.02);
}

void check_far(Verdict& v, const ChainStats& s, const std::string& tag) {
    const SummaryRates r = summary_rates(s);
    v.near(tag + "tar", r.tar, 0.43, 0.01);
    v.near(tag + "mean_jump", r.mean_jump.value_or(-1.0), 1.18, 0.02);
}

double angle_of(const Vec& x) {
    double a = std::atan2(x[1], x[0]);
    if (a < 0.0) a += kTwoPi;
    return a;
}

// Circle, V = 0: runs n iterations and returns every `stride`-th angle; the
// visitor sees each record with the angle before the iteration.
std::vector<double> circle_chain(Algorithm algorithm, double tau, std::uint64_t n, std::uint64_t seed,
                                 std::uint64_t stride,
                                 const std::function<void(double, const IterationRecord&)>& visit) {
    const Problem c = testing::circle();
    SamplerConfig cfg;
    cfg.algorithm = algorithm;
    cfg.tau = tau;
    cfg.solver.kind = SolverKind::poly_all_roots;
    cfg.n_iterations = n;
    cfg.seed = seed;
    std::vector<double> out;
    double before = angle_of(c.initial_point);
    run_chain(c.constraint, cfg, c.initial_point, std::nullopt, [&](const IterationRecord& rec) {
        const double after = angle_of(rec.x);
        if (visit) visit(before, rec);
        before = after;
        if ((rec.iter + 1) % stride == 0) out.push_back(after);
    });
    return out;
}

void property_suite(Verdict& v, double worst_run_residual) {
    const Problem tb = testing::torus("bimodal");
    const ConstraintMap& cm = tb.constraint;
    const MassMatrix id = MassMatrix::identity(3);
    Vec diag(3);
    diag << 1.3, 0.8, 1.1;
    const MassMatrix heavy(diag);

    {  // Stepping again with lambda_p returns to the start.
        Engine e = make_engine(2024, Stream::initial, 0);
        int n = 0;
        double worst = 0.0;
        for (int trial = 0; trial < 1000 && n < 100; ++trial) {
            const PhasePoint z = testing::random_torus_phase_point(e);
            const double err = testing::reverse_step_error(cm, z, id, 0.8, tb.potential, SolverSpec{});
            if (err < 0.0) continue;
            worst = std::max(worst, err);
            ++n;
        }
        v.require("reverse-step points tested = 100", n == 100);
        v.within("reverse_step_worst", worst, 0.0, 1e-10);
    }
    {  // Symplecticity: chart Jacobian determinant of one step.
        Engine e = make_engine(2025, Stream::initial, 0);
        int n = 0;
        double worst = 0.0;
        for (int trial = 0; trial < 200 && n < 20; ++trial) {
            const PhasePoint z = testing::random_torus_phase_point(e);
            const double det = testing::chart_jacobian_determinant(cm, z, 0.8);
            if (det < 0.0) continue;
            worst = std::max(worst, std::abs(det - 1.0));
            ++n;
        }
        v.require("chart determinant points tested = 20", n == 20);
        v.within("chart_det_worst_dev", worst, 0.0, 1e-4);
    }
    {  // G_x o F_x on MALA sets and G_{M,x} on RATTLE sets.
        Engine e = make_engine(2026, Stream::initial, 0);
        double worst_g = 0.0;
        double worst_gm = 0.0;
        int n_g = 0;
        int n_gm = 0;
        for (int trial = 0; trial < 400; ++trial) {
            PhasePoint z = testing::random_torus_phase_point(e);
            const auto f = tangent_frame(cm, z.x, id);
            const Vec vel = standard_normal(e, 2);
            for (const auto& s : solve_mala_set(cm, z.x, f, vel, 0.3, tb.potential, SolverSpec{},
                                                SolverKind::poly_all_roots, {}, nullptr).solutions) {
                worst_g = std::max(worst_g, (mala_reverse_velocity(z.x, f, s.y, 0.3, tb.potential) - vel).norm());
                ++n_g;
            }
            const MassMatrix& m = trial % 2 == 0 ? id : heavy;
            z.p = project_cotangent(cm.jacobian(z.x), m, m.apply(z.p));
            for (const auto& s : solve_rattle_set(cm, z, m, 0.8, tb.potential, SolverSpec{},
                                                  SolverKind::poly_all_roots, {}, nullptr).solutions) {
                const Vec p = rattle_reverse_momentum(cm, z.x, s.z1.x, m, 0.8, tb.potential);
                worst_gm = std::max(worst_gm, (p - z.p).norm());
                ++n_gm;
            }
        }
        v.require("G round trips tested >= 100", n_g >= 100 && n_gm >= 100);
        v.within("G_worst", worst_g, 0.0, 1e-10);
        v.within("G_M_worst", worst_gm, 0.0, 1e-10);
    }
    {  // Residual invariants of emitted states, including HMC tangency.
        double worst_x = worst_run_residual;
        double worst_p = 0.0;
        bool frozen = true;
        for (const SolverKind kind : {SolverKind::newton_single, SolverKind::poly_all_roots}) {
            SamplerConfig cfg;
            cfg.tau = 0.8;
            cfg.alpha = 0.7;
            cfg.beta = 20.0;
            cfg.potential = tb.potential;
            cfg.proposal_potential = tb.potential;
            cfg.solver.kind = kind;
            cfg.seed = 77;
            ChainStreams streams(cfg.seed, 0);
            Engine init = make_engine(cfg.seed, Stream::initial, 0);
            PhasePoint z{tb.initial_point, sample_cotangent_gaussian(cm, tb.initial_point, id, 20.0, init)};
            for (std::uint64_t i = 0; i < 100000; ++i) {
                const Vec before = z.x;
                const IterationRecord rec = hmc_iteration(cm, cfg, z, i, streams);
                worst_x = std::max(worst_x, constraint_residual(cm, z.x));
                worst_p = std::max(worst_p, tangency_residual(cm, z.x, z.p, id));
                if (rec.stage != Stage::accepted && !(z.x == before)) frozen = false;
            }
        }
        v.within("worst_position_residual", worst_x, 0.0, kDefaultConstraintTol);
        v.within("worst_tangency_residual", worst_p, 0.0, 1e-10);
        v.require("rejections leave the position bitwise unchanged", frozen);
    }
    {  // Two-sided flow balance of circle MALA over 64 arc cells.
        constexpr int cells = 64;
        std::vector<std::uint64_t> flow(cells * cells, 0);
        auto cell = [](double a) { return std::min(cells - 1, static_cast<int>(a / kTwoPi * cells)); };
        circle_chain(Algorithm::mala, 0.5, kDesk, 31, kDesk, [&](double before, const IterationRecord& rec) {
            ++flow[static_cast<std::size_t>(cell(before) * cells + cell(angle_of(rec.x)))];
        });
        double worst = 0.0;
        int pairs = 0;
        for (int i = 0; i < cells; ++i) {
            for (int j = i + 1; j < cells; ++j) {
                const double a = static_cast<double>(flow[static_cast<std::size_t>(i * cells + j)]);
                const double b = static_cast<double>(flow[static_cast<std::size_t>(j * cells + i)]);
                if (a + b == 0.0) continue;
                worst = std::max(worst, std::abs(a - b) / std::sqrt(a + b));
                ++pairs;
            }
        }
        v.note("flow_pairs", pairs);
        v.within("flow_worst_z", worst, 0.0, 4.0);
    }
    {  // HMC with M = I, alpha = 0 and MALA share the angle marginal.
        // HMC step tau matches MALA step tau^2 / 2; thinning by 10 decorrelates.
        const auto hmc = circle_chain(Algorithm::hmc, 1.0, kDesk, 41, 10, {});
        const auto mala = circle_chain(Algorithm::mala, 0.5, kDesk, 42, 10, {});
        const KsResult ks = ks_two_sample(hmc, mala);
        v.note("ks_statistic", ks.statistic);
        v.within("ks_p", ks.p_value, 0.01, 1.0);
    }
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    bool all = true;
    auto report = [&](int id, const std::string& title, const Verdict& v) {
        v.print(id, title);
        all = all && v.passed();
    };

    try {
        std::printf("running the long torus chains\n");
        const TorusRun newton = run_torus("torus_uniform_newton", kFull);
        const TorusRun pr = run_torus("torus_uniform_pr", kFull);
        const TorusRun far = run_torus("torus_uniform_pr_far", kFull);
        const TorusRun hybrid = run_torus("torus_uniform_pr50_far", kFull);
        double worst_residual = 0.0;
        for (const TorusRun* r : {&newton, &pr, &far, &hybrid}) {
            worst_residual = std::max(worst_residual, r->worst_residual);
        }

        Verdict c1;
        check_newton(c1, newton.desk, "");
        report(1, "uniform torus, Newton scheme", c1);

        Verdict c2;
        check_all_roots(c2, pr.desk, "PR.");
        check_far(c2, far.desk, "PR-far.");
        report(2, "uniform torus, all-roots schemes", c2);

        Verdict c3;
        const SummaryRates h = summary_rates(hybrid.desk);
        c3.near("tar", h.tar, 0.45, 0.01);
        c3.near("expensive_tar", h.expensive_tar.value_or(-1.0), 0.43, 0.02);
        c3.near("expensive_mean_jump", h.expensive_mean_jump.value_or(-1.0), 1.18, 0.04);
        report(3, "uniform torus, hybrid scheme with period 50", c3);

        Verdict c4;
        for (const TorusRun* r : {&newton, &pr, &far, &hybrid}) {
            c4.within(r->name + ".phi_p(1e7,100 bins)", gof(r->phi, 100, true), 0.01, 1.0);
            c4.within(r->name + ".theta_p(1e7,100 bins)", gof(r->theta, 100, false), 0.01, 1.0);
            c4.within(r->name + ".phi_p(1e6,20 bins)", gof(r->phi_desk, 20, true), 0.01, 1.0);
            c4.within(r->name + ".theta_p(1e6,20 bins)", gof(r->theta_desk, 20, false), 0.01, 1.0);
        }
        report(4, "stationary angle laws", c4);

        Verdict c5;
        {
            std::map<std::string, ChainStats> bimodal;
            for (const char* name : {"torus_bimodal_newton", "torus_bimodal_pr", "torus_bimodal_pr50_far"}) {
                const PreparedRun run = load(name, kDesk);
                bimodal[name] = run_chain(run.problem.constraint, run.sampler, run.problem.initial_point).stats;
                std::printf("  ran %s\n", name);
                std::fflush(stdout);
            }
            const ChainStats& n = bimodal["torus_bimodal_newton"];
            const ChainStats& p = bimodal["torus_bimodal_pr"];
            const ChainStats& hy = bimodal["torus_bimodal_pr50_far"];
            c5.within("Newton.large_jump_rate", summary_rates(n).large_jump_rate, 0.0, 1e-5);
            c5.within("Newton.max_mode", std::max(occupancy(n, 0), occupancy(n, 1)), 0.9, 1.0);
            c5.within("PR.large_jump_rate", summary_rates(p).large_jump_rate, 2e-3, 6e-3);
            c5.near("PR.mode0", occupancy(p, 0), 0.50, 0.02);
            c5.near("PR.mode1", occupancy(p, 1), 0.50, 0.02);
            c5.within("PR50-far.large_jump_rate", summary_rates(hy).large_jump_rate, 3e-5, 2e-4);
        }
        report(5, "bimodal torus", c5);

        Verdict c6;
        {
            const TorusRun n7 = run_torus("torus_uniform_newton_alpha07", kDesk);
            const TorusRun p7 = run_torus("torus_uniform_pr_alpha07", kDesk);
            const TorusRun f7 = run_torus("torus_uniform_pr_far_alpha07", kDesk);
            for (const TorusRun* r : {&n7, &p7, &f7}) worst_residual = std::max(worst_residual, r->worst_residual);
            check_newton(c6, n7.desk, "Newton.");
            check_all_roots(c6, p7.desk, "PR.");
            check_far(c6, f7.desk, "PR-far.");
        }
        report(6, "alpha = 0.7 matches alpha = 0", c6);

        Verdict c7;
        property_suite(c7, worst_residual);
        report(7, "property suite", c7);

        Verdict c8;
        {
            const PreparedRun single = load("sphere9d_newton", kDesk);
            const PreparedRun multi = load("sphere9d_multistart", kDesk);
            c8.require("matched seeds", single.sampler.seed == multi.sampler.seed);
            const ChainStats s =
                run_chain(single.problem.constraint, single.sampler, single.problem.initial_point).stats;
            std::printf("  ran sphere9d_newton\n");
            std::fflush(stdout);
            const ChainStats m =
                run_chain(multi.problem.constraint, multi.sampler, multi.problem.initial_point).stats;
            std::printf("  ran sphere9d_multistart\n");
            const double ctf_single = summary_rates(s).ctf;
            const double ctf_multi = summary_rates(m).ctf;
            c8.note("Newton.ctf", ctf_single);
            c8.note("multistart.ctf", ctf_multi);
            c8.require("multistart ctf >= 10 x Newton ctf", ctf_multi >= 10.0 * ctf_single && ctf_multi > 0.0);
            for (int k = 0; k < 4; ++k) {
                c8.within("multistart.P(C" + std::to_string(k) + ")", occupancy(m, k), 1e-12, 1.0);
            }
            c8.within("|P(C0)-P(C1)|", std::abs(occupancy(m, 0) - occupancy(m, 1)), 0.0, 0.05);
            c8.within("|P(C2)-P(C3)|", std::abs(occupancy(m, 2) - occupancy(m, 3)), 0.0, 0.05);
        }
        report(8, "9D sphere, multistart Newton", c8);
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }

    std::printf("acceptance %s in %.0fs\n", all ? "PASSED" : "FAILED",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return all ? 0 : 1;
}
