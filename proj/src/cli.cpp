#include "sfl/cli.hpp"

#include "sfl/convergence.hpp"
#include "sfl/csv.hpp"
#include "sfl/errors.hpp"
#include "sfl/joint_optimizer.hpp"
#include "sfl/micro_trainer.hpp"
#include "sfl/profiler.hpp"
#include "sfl/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

namespace sfl::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

struct Options {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string arch;
};

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("--config: cannot open '{}'", path));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

class Run {
public:
    Run(const Options& opts, std::string command, std::ostream& out) : opts_(opts), command_(std::move(command)), out_(out) {
        if (!opts_.config_path.empty()) config_text_ = read_file(opts_.config_path);
        std::error_code ec;
        std::filesystem::create_directories(opts_.out_dir, ec);
        if (ec) throw ConfigError(fmt::format("--out: cannot create '{}': {}", opts_.out_dir, ec.message()));
    }

    const std::string& config_text() const { return config_text_; }

    Scenario scenario() const {
        Scenario s = config_text_.empty()
                         ? default_scenario(opts_.arch.empty() ? "alexnet20" : opts_.arch)
                         : parse_scenario(config_text_, std::filesystem::path(opts_.config_path).parent_path());
        if (!config_text_.empty() && !opts_.arch.empty()) {
            s.architecture = builtin_architecture(opts_.arch);
            s.convergence.num_layers = s.architecture.layers.size();
            if (s.max_split) s.max_split = std::min(*s.max_split, s.architecture.layers.size());
        }
        if (opts_.seed) {
            reseed(s, *opts_.seed);
            s.train.seed = *opts_.seed;
            s.simulate.seeds = {*opts_.seed};
        }
        return s;
    }

    std::ofstream open(const std::string& name) {
        const auto path = std::filesystem::path(opts_.out_dir) / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ConfigError(fmt::format("--out: cannot write '{}'", path.string()));
        outputs_.push_back(name);
        return f;
    }

    void write_manifest(std::uint64_t seed) {
        if (!config_text_.empty()) {
            std::ofstream copy(std::filesystem::path(opts_.out_dir) / "config.yaml", std::ios::binary);
            copy << config_text_;
        }
        nlohmann::ordered_json manifest;
        manifest["tool"] = "sflctl";
        manifest["version"] = kVersion;
        manifest["subcommand"] = command_;
        manifest["config"] = opts_.config_path.empty() ? "<built-in defaults>" : opts_.config_path;
        manifest["config_fnv1a64"] = fmt::format("{:016x}", fnv1a64(config_text_));
        manifest["seed"] = seed;
        manifest["architecture_override"] = opts_.arch;
        manifest["outputs"] = outputs_;
        manifest["replay"] = fmt::format("sflctl {} {}--seed {} --out <dir>", command_,
                                         config_text_.empty() ? "" : "--config config.yaml ", seed);
        std::ofstream f(std::filesystem::path(opts_.out_dir) / "manifest.json", std::ios::binary);
        f << manifest.dump(2) << '\n';
    }

    std::ostream& out() { return out_; }
    const Options& opts() const { return opts_; }

private:
    const Options& opts_;
    std::string command_;
    std::ostream& out_;
    std::string config_text_;
    std::vector<std::string> outputs_;
};

void cmd_profile(Run& run) {
    NetworkArchitecture arch;
    std::uint64_t seed = 0;
    bool is_arch_file = false;
    if (!run.config_text().empty()) {
        try {
            is_arch_file = static_cast<bool>(YAML::Load(run.config_text())["layers"]);
        } catch (const YAML::Exception& e) {
            throw ConfigError(fmt::format("config: malformed YAML: {}", e.what()));
        }
    }
    if (is_arch_file) {
        arch = parse_architecture(run.config_text());
    } else {
        const auto s = run.scenario();
        arch = s.architecture;
        seed = s.system.seed;
    }
    const auto prof = profile(arch);
    {
        auto f = run.open("profile.csv");
        write_profile_csv(f, arch, prof);
    }
    Macs conv_macs = 0;
    for (std::size_t i = 0; i < arch.layers.size(); ++i) {
        if (arch.layers[i].kind == LayerKind::conv) conv_macs += prof.layer_macs[i];
    }
    const auto total = prof.cumulative_macs.back();
    run.out() << fmt::format("{}: {} layers, {} MACs, conv share {:.1f}%, {} parameters\n", arch.name,
                             arch.layers.size(), total, 100.0 * static_cast<double>(conv_macs) / static_cast<double>(total),
                             parameter_count(arch));
    run.write_manifest(seed);
}

void cmd_optimize(Run& run) {
    const auto s = run.scenario();
    const auto problem = build_problem(s);
    const auto sol = alternating_optimize(problem, s.optimizer);
    {
        auto f = run.open("solution.csv");
        write_solution_csv(f, problem, sol);
    }
    {
        auto f = run.open("allocation.csv");
        write_allocation_csv(f, bandwidth_demands(problem, sol.splits), sol.allocation);
    }
    {
        auto f = run.open("policies.csv");
        write_policy_csv(f, sol.policies);
    }
    {
        auto f = run.open("trace.csv");
        write_trace_csv(f, sol);
    }
    run.out() << fmt::format(
        "devices={} max_split={} iterations={} converged={} expected_total_latency_s={} splits=[{}]\n",
        problem.num_devices(), problem.max_split, sol.iterations, sol.converged ? "yes" : "no",
        format_double(sol.expected_total_latency), join_indices(sol.splits, ' '));
    run.write_manifest(s.system.seed);
}

void cmd_simulate(Run& run) {
    const auto s = run.scenario();
    // Surface infeasibility up front instead of as per-row errors.
    resolve_max_split(s);
    const auto result = run_campaign(s, run.opts().jobs);
    {
        auto f = run.open("campaign.csv");
        write_campaign_csv(f, result);
    }
    if (s.simulate.write_rounds) {
        auto f = run.open("rounds.csv");
        write_rounds_csv(f, result);
    }
    std::size_t failed = 0;
    for (const auto& row : result.rows) {
        if (!row.ok) {
            ++failed;
            continue;
        }
        run.out() << fmt::format("{}={} seed={} mean_split={:.3f} sfl_mean_s={} fedavg_mean_s={}\n",
                                 to_string(row.parameter), format_double(row.value), row.seed, row.mean_split,
                                 format_double(row.sfl.mean), format_double(row.fedavg.mean));
    }
    if (failed) run.out() << fmt::format("{} of {} grid points failed; see campaign.csv\n", failed, result.rows.size());
    run.write_manifest(s.system.seed);
}

void cmd_train(Run& run) {
    const auto s = run.scenario();
    const auto result = micro::train(s.train);
    const bool all_zero = std::all_of(result.splits.begin(), result.splits.end(), [](auto v) { return v == 0; });
    {
        auto f = run.open("metrics.csv");
        micro::write_metrics_csv(f, result, all_zero ? "fedavg" : "sfl");
    }
    run.out() << fmt::format("final_accuracy={} splits=[{}]\n", format_double(result.final_accuracy),
                             join_indices(result.splits, ' '));
    run.write_manifest(s.train.seed);
}

void cmd_bound(Run& run) {
    const auto s = run.scenario();
    validate(s.convergence);
    {
        auto f = run.open("bound.csv");
        write_bound_csv(f, s.convergence, s.bound_iterations);
    }
    run.out() << fmt::format("P={} dP/dsplit={}\n", format_double(p_term(s.convergence)),
                             format_double(dp_dsplit(s.convergence)));
    run.write_manifest(s.system.seed);
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Split federated learning latency optimizer and simulator", "sflctl"};
    app.require_subcommand(1);
    Options opts;
    app.add_option("--config", opts.config_path, "Scenario (or architecture, for profile) YAML file");
    app.add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", opts.seed, "Override every seed in the config");
    app.add_option("--jobs", opts.jobs, "Worker threads for campaigns")->check(CLI::PositiveNumber);
    app.add_option("--arch", opts.arch, "Built-in architecture (alexnet20, vgg16)");

    const std::pair<const char*, const char*> commands[] = {
        {"profile", "Per-layer MACs and intermediate sizes"},
        {"optimize", "Alternating split/bandwidth optimization"},
        {"simulate", "Monte-Carlo SFL vs FedAvg rounds, optionally over a sweep"},
        {"train", "Micro split-federated training on synthetic data"},
        {"bound", "Convergence bound table"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ExitCode::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::config_error;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        Run r(opts, command, out);
        if (command == "profile") cmd_profile(r);
        if (command == "optimize") cmd_optimize(r);
        if (command == "simulate") cmd_simulate(r);
        if (command == "train") cmd_train(r);
        if (command == "bound") cmd_bound(r);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return ExitCode::config_error;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return ExitCode::config_error;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return ExitCode::infeasible;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return ExitCode::numerical_failure;
    }
    return ExitCode::ok;
}

}  // namespace sfl::cli
