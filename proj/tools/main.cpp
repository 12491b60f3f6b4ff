// mpmc: run multiple-projection samplers from a JSON run file.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpmc/config.hpp"
#include "mpmc/diagnostics.hpp"
#include "mpmc/error.hpp"

namespace {

using nlohmann::json;
using namespace mpmc;

constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;
constexpr std::uint64_t kFullIterations = 10'000'000;

int report(const Error& e) {
    std::string msg = e.what();
    for (char& ch : msg) {
        if (ch == '\n') ch = ' ';
    }
    std::cerr << "error: " << to_string(e.code()) << ": " << msg << '\n';
    return e.code() == ErrorCode::ChainAbort ? kExitAbort : kExitConfig;
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json histogram_array(const std::map<int, std::uint64_t>& h) {
    json out = json::array();
    if (h.empty()) return out;
    const int top = h.rbegin()->first;
    for (int n = 0; n <= top; ++n) {
        const auto it = h.find(n);
        out.push_back(it == h.end() ? 0 : it->second);
    }
    return out;
}

json stats_json(const RunConfig& cfg, const ChainStats& s) {
    json rates = json::object();
    const SummaryRates r = summary_rates(s);
    rates["fsr"] = r.fsr;
    rates["bsr"] = optional_json(r.bsr);
    rates["tar"] = r.tar;
    rates["mean_jump"] = optional_json(r.mean_jump);
    rates["large_jump_rate"] = r.large_jump_rate;
    rates["ctf"] = r.ctf;
    rates["expensive_tar"] = optional_json(r.expensive_tar);
    rates["expensive_mean_jump"] = optional_json(r.expensive_mean_jump);

    json occupancy = json::object();
    std::vector<int> labels;
    for (const auto& [c, n] : s.component_occupancy) {
        occupancy[std::to_string(c)] = n;
        labels.push_back(c);
    }
    for (const auto& [key, n] : s.component_transitions) {
        for (int c : {key.first, key.second}) {
            if (std::find(labels.begin(), labels.end(), c) == labels.end()) labels.push_back(c);
        }
    }
    std::sort(labels.begin(), labels.end());
    json matrix = json::array();
    for (int from : labels) {
        json row = json::array();
        for (int to : labels) {
            const auto it = s.component_transitions.find({from, to});
            row.push_back(it == s.component_transitions.end() ? 0 : it->second);
        }
        matrix.push_back(row);
    }

    return {
        {"config", to_json(cfg)},
        {"seed", cfg.sampler.seed},
        {"scheme_label", cfg.scheme_label},
        {"wall_time_seconds", s.wall_time_seconds},
        {"rates", rates},
        {"forward_hist", histogram_array(s.forward_hist)},
        {"backward_hist", histogram_array(s.backward_hist)},
        {"counts",
         {{"n_total", s.n_total},
          {"n_reversibility_invoked", s.n_reversibility_invoked},
          {"n_reversibility_passed", s.n_reversibility_passed},
          {"n_accepted_moves", s.n_accepted_moves},
          {"n_large_jumps", s.n_large_jumps},
          {"n_expensive", s.n_expensive},
          {"n_expensive_accepted", s.n_expensive_accepted},
          {"n_multiplier_mismatch", s.n_multiplier_mismatch},
          {"n_waived_membership_misses", s.n_waived_membership_misses},
          {"n_omega_fallbacks", s.n_omega_fallbacks}}},
        {"component_labels", labels},
        {"component_occupancy", occupancy},
        {"transition_matrix", matrix},
    };
}

class SampleWriter {
public:
    SampleWriter(const std::filesystem::path& path, int d, std::uint64_t every)
        : out_(path), every_(every) {
        if (!out_) throw Error(ErrorCode::InvalidConfig, "output_dir: cannot write " + path.string());
        out_ << "iter";
        for (int i = 1; i <= d; ++i) out_ << ",x_" << i;
        out_ << ",accepted,n_forward,n_backward,jump_distance,stage\n";
    }
    void operator()(const IterationRecord& rec) {
        if (rec.iter % every_ != 0) return;
        out_ << rec.iter;
        for (Eigen::Index i = 0; i < rec.x.size(); ++i) out_ << ',' << fmt17(rec.x[i]);
        out_ << ',' << (rec.accepted ? 1 : 0) << ',' << rec.n_forward << ',' << rec.n_backward
             << ',' << fmt17(rec.jump_distance) << ',' << to_string(rec.stage) << '\n';
    }

private:
    std::ofstream out_;
    std::uint64_t every_;
};

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed,
            std::optional<std::string> output, bool quiet, bool full) {
    RunConfig cfg = load_run_config(path);
    if (seed) cfg.sampler.seed = *seed;
    if (output) cfg.output_dir = *output;
    if (full) cfg.sampler.n_iterations = kFullIterations;
    const PreparedRun run = prepare_run(cfg);

    const std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::InvalidConfig, "output_dir: " + ec.message());

    const int d = run.problem.constraint.ambient_dim;
    std::vector<std::shared_ptr<SampleWriter>> writers;
    for (int c = 0; c < cfg.n_chains; ++c) {
        writers.push_back(std::make_shared<SampleWriter>(
            dir / ("samples_" + std::to_string(c) + ".csv"), d, cfg.record_every));
    }
    const ChainStats stats = run_chains(run.problem.constraint, run.sampler,
                                        run.problem.initial_point, cfg.n_chains, [&](int c) {
                                            auto w = writers[static_cast<std::size_t>(c)];
                                            return RecordSink([w](const IterationRecord& r) { (*w)(r); });
                                        });
    writers.clear();

    const json out = stats_json(cfg, stats);
    std::ofstream f(dir / "stats.json");
    f << out.dump(2) << '\n';
    if (!f) throw Error(ErrorCode::InvalidConfig, "output_dir: cannot write stats.json");
    if (!quiet) {
        const json& r = out["rates"];
        std::cout << (cfg.scheme_label.empty() ? cfg.problem : cfg.scheme_label)
                  << ": n=" << stats.n_total << " fsr=" << r["fsr"] << " bsr=" << r["bsr"]
                  << " tar=" << r["tar"] << " mean_jump=" << r["mean_jump"]
                  << " large_jump_rate=" << r["large_jump_rate"] << " ctf=" << r["ctf"]
                  << " time=" << stats.wall_time_seconds << "s\n";
    }
    return 0;
}

int cmd_validate(const std::string& path) {
    const RunConfig cfg = load_run_config(path);
    prepare_run(cfg);
    std::cout << "ok\n";
    return 0;
}

int cmd_reference_density(const std::string& problem, const std::vector<std::string>& params,
                          int bins) {
    if (problem != "torus") {
        throw Error(ErrorCode::UnknownProblem, "reference density is only tabulated for torus");
    }
    std::map<std::string, double> values;
    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "--param " + p + ": expected KEY=VALUE");
        try {
            values[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidConfig, "--param " + p + ": value is not a number");
        }
    }
    for (const char* key : {"R", "r"}) {
        if (!values.count(key)) throw Error(ErrorCode::MissingParam, std::string("problem torus needs parameter ") + key);
    }
    if (bins < 1) throw Error(ErrorCode::InvalidConfig, "--bins must be >= 1");
    const double h = 2.0 * std::numbers::pi / bins;
    std::cout << "phi,density\n";
    for (int i = 0; i < bins; ++i) {
        const double phi = (i + 0.5) * h;
        std::cout << fmt17(phi) << ','
                  << fmt17(torus_phi_reference_density(phi, values["R"], values["r"])) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple-projection MCMC on level sets"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    bool quiet = false;
    bool full = false;
    auto* run = app.add_subcommand("run", "Run the chains of a configuration");
    run->add_option("--config", config_path, "Run file (JSON)")->required();
    run->add_option("--seed", seed, "Override the seed");
    run->add_option("--output", output, "Override the output directory");
    run->add_flag("--quiet", quiet, "No summary line");
    run->add_flag("--full", full, "Use 10^7 iterations");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a run file");
    validate->add_option("--config", validate_path, "Run file (JSON)")->required();

    std::string problem;
    std::vector<std::string> params;
    int bins = 100;
    auto* density = app.add_subcommand("reference-density", "Tabulate the phi marginal");
    density->add_option("--problem", problem)->required();
    density->add_option("--param", params, "KEY=VALUE");
    density->add_option("--bins", bins);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: Usage: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path, seed, output, quiet, full);
        if (*validate) return cmd_validate(validate_path);
        return cmd_reference_density(problem, params, bins);
    } catch (const Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << '\n';
        return 1;
    }
}
