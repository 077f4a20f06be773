#include "sfl/scenario.hpp"

#include "sfl/csv.hpp"
#include "sfl/errors.hpp"
#include "sfl/split_policy.hpp"
#include "sfl/units.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace sfl {

std::string_view to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::none: return "none";
        case SweepParameter::distance: return "distance";
        case SweepParameter::a: return "a";
        case SweepParameter::max_split: return "max_split";
    }
    return "none";
}

namespace {

template <typename T>
T read(const YAML::Node& node, const std::string& field) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(fmt::format("{}: invalid value", field));
    }
}

template <typename T>
void read_into(const YAML::Node& parent, const char* key, const std::string& section, T& target) {
    if (const auto node = parent[key]) target = read<T>(node, section + "." + key);
}

void read_count(const YAML::Node& parent, const char* key, const std::string& section, std::size_t& target) {
    if (const auto node = parent[key]) {
        const auto field = section + "." + key;
        const auto value = read<long long>(node, field);
        if (value < 0) throw ConfigError(fmt::format("{}: must be >= 0", field));
        target = static_cast<std::size_t>(value);
    }
}

std::pair<double, double> read_range(const YAML::Node& node, const std::string& field) {
    if (!node.IsSequence() || node.size() != 2) throw ConfigError(fmt::format("{}: expected [min, max]", field));
    const auto lo = read<double>(node[0], field);
    const auto hi = read<double>(node[1], field);
    if (!(lo <= hi)) throw ConfigError(fmt::format("{}: empty range [{}, {}]", field, lo, hi));
    return {lo, hi};
}

void parse_system(const YAML::Node& node, SystemParams& sys) {
    if (!node) return;
    read_into(node, "bandwidth_hz", "system", sys.bandwidth_hz);
    read_into(node, "noise_dbm", "system", sys.noise_dbm);
    read_into(node, "include_downlink", "system", sys.include_downlink);
    read_into(node, "seed", "system", sys.seed);
    if (const auto nm = node["noise_model"]) {
        const auto text = read<std::string>(nm, "system.noise_model");
        if (text == "total_power") {
            sys.noise_model = NoiseModel::total_power;
        } else if (text == "psd") {
            sys.noise_model = NoiseModel::psd;
        } else {
            throw ConfigError(fmt::format("system.noise_model: expected total_power or psd, got '{}'", text));
        }
    }
}

DeviceProfile parse_device(const YAML::Node& node, std::size_t idx) {
    const auto field = fmt::format("fleet.devices[{}]", idx);
    DeviceProfile dev;
    if (!node["a"]) throw ConfigError(field + ".a: missing");
    dev.a = read<double>(node["a"], field + ".a");
    if (!(dev.a > 0.0)) throw ConfigError(field + ".a: must be > 0");
    dev.eps = 2.0 / dev.a;
    if (const auto eps = node["eps"]) {
        const auto text = read<std::string>(eps, field + ".eps");
        // "X/a" shorthand sets eps = X / a.
        if (const auto slash = text.find("/a"); slash != std::string::npos && slash + 2 == text.size()) {
            try {
                dev.eps = std::stod(text.substr(0, slash)) / dev.a;
            } catch (const std::exception&) {
                throw ConfigError(field + ".eps: malformed '<x>/a' shorthand");
            }
        } else {
            dev.eps = read<double>(eps, field + ".eps");
        }
    }
    read_into(node, "p_dbm", field, dev.p_dbm);
    if (!node["distance"]) throw ConfigError(field + ".distance: missing");
    dev.d_m = read<double>(node["distance"], field + ".distance");
    try {
        validate(dev);
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", field, e.what()));
    }
    return dev;
}

void parse_fleet(const YAML::Node& node, Scenario& s) {
    if (!node) return;
    if (const auto mode = node["channel"]) {
        const auto text = read<std::string>(mode, "fleet.channel");
        if (text == "sampled") {
            s.channel_mode = ChannelMode::sampled;
        } else if (text == "mean") {
            s.channel_mode = ChannelMode::mean;
        } else {
            throw ConfigError(fmt::format("fleet.channel: expected sampled or mean, got '{}'", text));
        }
    }
    if (const auto devices = node["devices"]) {
        if (!devices.IsSequence() || devices.size() == 0) throw ConfigError("fleet.devices: expected a non-empty list");
        s.generator.reset();
        s.fleet.clear();
        for (std::size_t i = 0; i < devices.size(); ++i) s.fleet.push_back(parse_device(devices[i], i));
        return;
    }
    if (const auto gen = node["generate"]) {
        FleetGenerator g;
        read_count(gen, "count", "fleet.generate", g.count);
        if (g.count < 1) throw ConfigError("fleet.generate.count: must be >= 1");
        if (gen["a_range"]) std::tie(g.a_min, g.a_max) = read_range(gen["a_range"], "fleet.generate.a_range");
        if (!(g.a_min > 0.0)) throw ConfigError("fleet.generate.a_range: a must be > 0");
        read_into(gen, "eps_times_a", "fleet.generate", g.eps_times_a);
        if (!(g.eps_times_a > 0.0)) throw ConfigError("fleet.generate.eps_times_a: must be > 0");
        read_into(gen, "p_dbm", "fleet.generate", g.p_dbm);
        if (gen["distance_range"]) {
            std::tie(g.d_min, g.d_max) = read_range(gen["distance_range"], "fleet.generate.distance_range");
        }
        if (!(g.d_min > 0.0)) throw ConfigError("fleet.generate.distance_range: distances must be > 0");
        s.generator = g;
    }
}

void parse_architecture_node(const YAML::Node& node, Scenario& s, const std::filesystem::path& base_dir) {
    if (!node) return;
    if (node.IsScalar()) {
        s.architecture = builtin_architecture(read<std::string>(node, "architecture"));
        return;
    }
    // batch_size and element_bits override whatever the file or preset says.
    auto apply_overrides = [&] {
        read_count(node, "batch_size", "architecture", s.architecture.batch_size);
        read_count(node, "element_bits", "architecture", s.architecture.element_bits);
        validate(s.architecture);
    };
    if (const auto file = node["file"]) {
        auto path = std::filesystem::path(read<std::string>(file, "architecture.file"));
        if (path.is_relative()) path = base_dir / path;
        if (!std::filesystem::exists(path)) {
            throw ConfigError(fmt::format("architecture.file: '{}' does not exist", path.string()));
        }
        s.architecture = load_architecture(path);
        apply_overrides();
        return;
    }
    if (const auto name = node["builtin"]) {
        s.architecture = builtin_architecture(read<std::string>(name, "architecture.builtin"));
        apply_overrides();
        return;
    }
    YAML::Emitter emitter;
    emitter << node;
    s.architecture = parse_architecture(emitter.c_str());
}

void parse_convergence(const YAML::Node& node, Scenario& s) {
    if (!node) return;
    auto& c = s.convergence;
    if (const auto ms = node["max_split"]) {
        std::size_t value = 0;
        read_count(node, "max_split", "convergence", value);
        s.max_split = value;
    }
    read_into(node, "phi_sq", "convergence", s.phi_sq);
    read_into(node, "phi_hat_sq", "convergence", s.phi_hat_sq);
    read_into(node, "beta", "convergence", c.beta);
    read_into(node, "mu", "convergence", c.mu);
    read_into(node, "z_sq", "convergence", c.z_sq);
    read_into(node, "sigma_sq", "convergence", c.sigma_sq);
    read_into(node, "gamma", "convergence", c.gamma_gap);
    read_into(node, "delta1", "convergence", c.delta1);
    read_count(node, "local_iters", "convergence", c.local_iters);
    read_count(node, "num_devices", "convergence", c.num_devices);
    read_count(node, "num_layers", "convergence", c.num_layers);
    read_count(node, "split", "convergence", c.split);
    if (const auto coeff = node["gamma_coefficient"]) {
        const auto text = read<std::string>(coeff, "convergence.gamma_coefficient");
        if (text == "theorem") {
            c.coefficient = GammaCoefficient::theorem;
        } else if (text == "proof") {
            c.coefficient = GammaCoefficient::proof;
        } else {
            throw ConfigError(fmt::format("convergence.gamma_coefficient: expected theorem or proof, got '{}'", text));
        }
    }
    if (const auto its = node["iterations"]) {
        if (!its.IsSequence() || its.size() == 0) throw ConfigError("convergence.iterations: expected a non-empty list");
        s.bound_iterations.clear();
        for (std::size_t i = 0; i < its.size(); ++i) {
            const auto v = read<long long>(its[i], "convergence.iterations");
            if (v < 1) throw ConfigError("convergence.iterations: entries must be >= 1");
            s.bound_iterations.push_back(static_cast<std::size_t>(v));
        }
    }
}

void parse_optimizer(const YAML::Node& node, Scenario& s) {
    if (!node) return;
    read_count(node, "n_iter", "optimizer", s.optimizer.n_iter);
    read_into(node, "eps_tol", "optimizer", s.optimizer.eps_tol);
}

void parse_simulate(const YAML::Node& node, Scenario& s) {
    if (!node) return;
    auto& sim = s.simulate;
    read_count(node, "local_iters", "simulate", sim.round.local_iters);
    read_count(node, "rounds", "simulate", sim.rounds);
    read_count(node, "fedavg_samples", "simulate", sim.fedavg_samples);
    read_into(node, "fresh_fading", "simulate", sim.round.fresh_fading);
    read_into(node, "write_rounds", "simulate", sim.write_rounds);
    if (const auto mode = node["sampling"]) {
        const auto text = read<std::string>(mode, "simulate.sampling");
        if (text == "independent") {
            sim.round.sampling = ComputeSampling::independent;
        } else if (text == "incremental") {
            sim.round.sampling = ComputeSampling::incremental;
        } else {
            throw ConfigError(fmt::format("simulate.sampling: expected independent or incremental, got '{}'", text));
        }
    }
    if (const auto seeds = node["seeds"]) {
        if (!seeds.IsSequence() || seeds.size() == 0) throw ConfigError("simulate.seeds: expected a non-empty list");
        sim.seeds.clear();
        for (std::size_t i = 0; i < seeds.size(); ++i) sim.seeds.push_back(read<std::uint64_t>(seeds[i], "simulate.seeds"));
    }
    if (const auto sweep = node["sweep"]) {
        const auto param = read<std::string>(sweep["parameter"], "simulate.sweep.parameter");
        if (param == "none") {
            sim.sweep = SweepParameter::none;
        } else if (param == "distance") {
            sim.sweep = SweepParameter::distance;
        } else if (param == "a") {
            sim.sweep = SweepParameter::a;
        } else if (param == "max_split") {
            sim.sweep = SweepParameter::max_split;
        } else {
            throw ConfigError(fmt::format("simulate.sweep.parameter: unknown parameter '{}'", param));
        }
        sim.sweep_values.clear();
        if (const auto values = sweep["values"]) {
            if (!values.IsSequence()) throw ConfigError("simulate.sweep.values: expected a list");
            for (std::size_t i = 0; i < values.size(); ++i) {
                sim.sweep_values.push_back(read<double>(values[i], "simulate.sweep.values"));
            }
        }
        if (sim.sweep != SweepParameter::none && sim.sweep_values.empty()) {
            throw ConfigError("simulate.sweep.values: empty grid");
        }
    }
}

void parse_train(const YAML::Node& node, Scenario& s) {
    if (!node) return;
    auto& t = s.train;
    read_count(node, "num_devices", "train", t.num_devices);
    read_count(node, "local_iters", "train", t.local_iters);
    read_count(node, "iterations", "train", t.iterations);
    read_count(node, "batch_size", "train", t.batch_size);
    read_into(node, "learning_rate", "train", t.learning_rate);
    read_into(node, "iteration_seconds", "train", t.iteration_seconds);
    read_into(node, "seed", "train", t.seed);
    read_count(node, "dim", "train", t.data.dim);
    read_count(node, "classes", "train", t.data.classes);
    read_into(node, "separation", "train", t.data.separation);
    read_into(node, "noise", "train", t.data.noise);
    read_count(node, "samples_per_device", "train", t.data.samples_per_device);
    read_count(node, "test_samples", "train", t.data.test_samples);
    read_into(node, "dirichlet_alpha", "train", t.data.dirichlet_alpha);
    if (const auto p = node["partition"]) {
        const auto text = read<std::string>(p, "train.partition");
        if (text == "iid") {
            t.data.partition = micro::Partition::iid;
        } else if (text == "dirichlet" || text == "non_iid") {
            t.data.partition = micro::Partition::dirichlet;
        } else {
            throw ConfigError(fmt::format("train.partition: expected iid or dirichlet, got '{}'", text));
        }
    }
    auto read_list = [&](const char* key, std::vector<std::size_t>& target) {
        if (const auto list = node[key]) {
            const auto field = std::string("train.") + key;
            target.clear();
            if (list.IsScalar()) {
                target.push_back(read<std::size_t>(list, field));
                return;
            }
            for (std::size_t i = 0; i < list.size(); ++i) target.push_back(read<std::size_t>(list[i], field));
        }
    };
    read_list("splits", t.splits);
    read_list("hidden", t.hidden);
}

double mean_of(const std::vector<DeviceProfile>& fleet, double DeviceProfile::*member) {
    double total = 0.0;
    for (const auto& d : fleet) total += d.*member;
    return total / static_cast<double>(fleet.size());
}

void validate_scenario(const Scenario& s) {
    validate(s.system);
    if (s.fleet.empty()) throw ConfigError("fleet: no devices");
    if (s.architecture.layers.empty()) throw ConfigError("architecture: missing");
    if (s.optimizer.n_iter < 1) throw ConfigError("optimizer.n_iter: must be >= 1");
    if (!(s.optimizer.eps_tol > 0.0 && s.optimizer.eps_tol < 0.1)) {
        throw ConfigError("optimizer.eps_tol: must be in (0, 0.1)");
    }
    if (s.max_split && (*s.max_split < 1 || *s.max_split > s.architecture.layers.size())) {
        throw ConfigError(fmt::format("convergence.max_split: {} outside [1, {}]", *s.max_split,
                                      s.architecture.layers.size()));
    }
    if (!s.max_split && (s.phi_sq <= 0.0 || s.phi_hat_sq <= 0.0) && s.fleet.size() > 1) {
        throw ConfigError("convergence: set max_split or both phi_sq and phi_hat_sq");
    }
    if (s.simulate.round.local_iters < 1) throw ConfigError("simulate.local_iters: must be >= 1");
    if (s.simulate.rounds < 1) throw ConfigError("simulate.rounds: must be >= 1");
    if (s.simulate.sweep == SweepParameter::max_split) {
        for (double v : s.simulate.sweep_values) {
            if (v < 1.0 || v > static_cast<double>(s.architecture.layers.size()) || v != std::floor(v)) {
                throw ConfigError(fmt::format("simulate.sweep.values: {} is not a valid split cap", v));
            }
        }
    } else if (s.simulate.sweep != SweepParameter::none) {
        for (double v : s.simulate.sweep_values) {
            if (!(v > 0.0)) throw ConfigError(fmt::format("simulate.sweep.values: {} must be > 0", v));
        }
    }
    micro::validate(s.train);
}

}  // namespace

void reseed(Scenario& s, std::uint64_t seed) {
    s.system.seed = seed;
    if (s.generator) {
        const auto& g = *s.generator;
        auto rng = make_stream(seed, 7);
        std::uniform_real_distribution<double> a_dist(g.a_min, g.a_max);
        std::uniform_real_distribution<double> d_dist(g.d_min, g.d_max);
        s.fleet.clear();
        for (std::size_t k = 0; k < g.count; ++k) {
            DeviceProfile dev;
            dev.a = g.a_max > g.a_min ? a_dist(rng) : g.a_min;
            dev.eps = g.eps_times_a / dev.a;
            dev.p_dbm = g.p_dbm;
            dev.d_m = g.d_max > g.d_min ? d_dist(rng) : g.d_min;
            s.fleet.push_back(dev);
        }
    }
    s.system.num_devices = s.fleet.size();
    auto rng = make_stream(seed, 11);
    std::exponential_distribution<double> fading(1.0);
    s.fading.resize(s.fleet.size());
    for (auto& x : s.fading) x = fading(rng);
}

Scenario default_scenario(std::string_view architecture) {
    Scenario s;
    s.generator = FleetGenerator{};
    s.architecture = builtin_architecture(architecture);
    s.max_split = s.architecture.name == "vgg16" ? 6 : 8;
    s.convergence.num_layers = s.architecture.layers.size();
    reseed(s, s.system.seed);
    return s;
}

Scenario parse_scenario(std::string_view yaml_text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(fmt::format("config: malformed YAML: {}", e.what()));
    }
    if (!root.IsMap()) throw ConfigError("config: expected a mapping of sections");
    Scenario s;
    s.generator = FleetGenerator{};
    s.architecture = builtin_architecture("alexnet20");
    parse_system(root["system"], s.system);
    parse_fleet(root["fleet"], s);
    parse_architecture_node(root["architecture"], s, base_dir);
    s.convergence.num_layers = s.architecture.layers.size();
    parse_convergence(root["convergence"], s);
    parse_optimizer(root["optimizer"], s);
    parse_simulate(root["simulate"], s);
    parse_train(root["train"], s);
    reseed(s, s.system.seed);
    if (!root["convergence"] || (!root["convergence"]["max_split"] && !root["convergence"]["phi_sq"])) {
        s.max_split = std::min<std::size_t>(8, s.architecture.layers.size());
    }
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("--config: cannot open '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path.parent_path());
}

std::size_t resolve_max_split(const Scenario& s) {
    const auto layers = s.architecture.layers.size();
    if (s.max_split) return std::min(*s.max_split, layers);
    return layer_bound(s.phi_sq, s.phi_hat_sq, s.fleet.size(), layers);
}

OptimizationProblem build_problem(const Scenario& s) {
    OptimizationProblem p;
    p.profile = profile(s.architecture);
    p.fleet = s.fleet;
    p.system = s.system;
    p.system.num_devices = s.fleet.size();
    p.max_split = resolve_max_split(s);
    p.channels.reserve(s.fleet.size());
    for (std::size_t k = 0; k < s.fleet.size(); ++k) {
        const double rho = units::db_to_linear(-path_loss_db(s.fleet[k].d_m));
        const double x = s.channel_mode == ChannelMode::mean ? 1.0 : s.fading.at(k);
        p.channels.push_back(channel_from_gain(rho * x, s.fleet[k], p.system));
    }
    return p;
}

Scenario apply_sweep(const Scenario& scenario, SweepParameter parameter, double value) {
    Scenario s = scenario;
    s.generator.reset();
    switch (parameter) {
        case SweepParameter::none: break;
        case SweepParameter::distance: {
            const double scale = value / mean_of(s.fleet, &DeviceProfile::d_m);
            for (auto& d : s.fleet) d.d_m *= scale;
            break;
        }
        case SweepParameter::a: {
            const double scale = value / mean_of(s.fleet, &DeviceProfile::a);
            for (auto& d : s.fleet) {
                d.a *= scale;
                d.eps /= scale;
            }
            break;
        }
        case SweepParameter::max_split:
            s.max_split = static_cast<std::size_t>(value);
            break;
    }
    return s;
}

FedAvgPlan fedavg_plan_for(const Scenario& s, const OptimizationProblem& problem) {
    const double model_bits =
        static_cast<double>(parameter_count(s.architecture)) * static_cast<double>(s.architecture.element_bits);
    const double per_sample_macs = static_cast<double>(problem.profile.cumulative_macs.back()) /
                                   static_cast<double>(s.architecture.batch_size);
    return make_fedavg_plan(problem, model_bits, per_sample_macs * static_cast<double>(s.simulate.fedavg_samples),
                            s.optimizer.eps_tol);
}

CampaignResult run_campaign(const Scenario& scenario, std::size_t jobs) {
    const auto& sim = scenario.simulate;
    std::vector<double> grid = sim.sweep_values;
    if (sim.sweep == SweepParameter::none || grid.empty()) grid = {0.0};
    const auto n_tasks = grid.size() * sim.seeds.size();

    std::vector<CampaignRow> rows(n_tasks);
    std::vector<std::vector<RoundRecord>> rounds(n_tasks);

    auto run_task = [&](std::size_t task) {
        const auto gi = task / sim.seeds.size();
        const auto seed = sim.seeds[task % sim.seeds.size()];
        auto& row = rows[task];
        row.parameter = sim.sweep;
        row.value = grid[gi];
        row.seed = seed;
        try {
            Scenario base = scenario;
            reseed(base, seed);
            const auto s = apply_sweep(base, sim.sweep, grid[gi]);
            const auto problem = build_problem(s);
            const auto solution = alternating_optimize(problem, s.optimizer);
            row.splits = solution.splits;
            row.mean_split = std::accumulate(solution.splits.begin(), solution.splits.end(), 0.0) /
                             static_cast<double>(solution.splits.size());
            row.expected_total_s = solution.expected_total_latency;

            const auto plan = fedavg_plan_for(s, problem);
            auto rng = make_stream(seed, 1000 + gi);
            std::vector<double> sfl_lat;
            std::vector<double> fed_lat;
            for (std::size_t r = 0; r < sim.rounds; ++r) {
                auto out = simulate_sfl_round(problem, solution, sim.round, rng);
                sfl_lat.push_back(out.round_latency);
                if (sim.write_rounds) rounds[task].push_back({task, r + 1, std::move(out)});
            }
            for (std::size_t r = 0; r < sim.rounds; ++r) {
                auto out = simulate_fedavg_round(problem, plan, sim.round, rng);
                fed_lat.push_back(out.round_latency);
                if (sim.write_rounds) rounds[task].push_back({task, r + 1, std::move(out)});
            }
            row.sfl = summarize(std::move(sfl_lat));
            row.fedavg = summarize(std::move(fed_lat));
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            rounds[task].clear();
        }
    };

    jobs = std::max<std::size_t>(1, std::min(jobs, n_tasks));
    if (jobs == 1) {
        for (std::size_t t = 0; t < n_tasks; ++t) run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (auto t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) run_task(t);
            });
        }
    }

    CampaignResult result;
    result.rows = std::move(rows);
    for (auto& r : rounds) {
        for (auto& rec : r) result.rounds.push_back(std::move(rec));
    }
    return result;
}

void write_campaign_csv(std::ostream& out, const CampaignResult& result) {
    CsvWriter csv(out);
    csv.header({"parameter", "value", "seed", "status", "mean_split", "splits", "expected_total_s", "sfl_mean_s",
                "sfl_p50_s", "sfl_p95_s", "fedavg_mean_s", "fedavg_p50_s", "fedavg_p95_s", "error"});
    for (const auto& row : result.rows) {
        csv.cell(to_string(row.parameter)).cell(row.value).cell(row.seed).cell(row.ok ? "ok" : "error");
        if (row.ok) {
            csv.cell(row.mean_split)
                .cell(join_indices(row.splits))
                .cell(row.expected_total_s)
                .cell(row.sfl.mean)
                .cell(row.sfl.p50)
                .cell(row.sfl.p95)
                .cell(row.fedavg.mean)
                .cell(row.fedavg.p50)
                .cell(row.fedavg.p95)
                .cell(std::string_view{});
        } else {
            for (int i = 0; i < 9; ++i) csv.cell(std::string_view{});
            csv.cell(row.error);
        }
        csv.end_row();
    }
}

void write_rounds_csv(std::ostream& out, const CampaignResult& result) {
    CsvWriter csv(out);
    csv.header({"scheme", "parameter", "value", "seed", "round", "compute_s", "comm_s", "total_s", "splits"});
    for (const auto& rec : result.rounds) {
        const auto& row = result.rows[rec.row];
        const auto& o = rec.outcome;
        csv.cell(to_string(o.scheme))
            .cell(to_string(row.parameter))
            .cell(row.value)
            .cell(row.seed)
            .cell(static_cast<std::uint64_t>(rec.round))
            .cell(o.compute_s[o.bottleneck])
            .cell(o.comm_s[o.bottleneck])
            .cell(o.round_latency)
            .cell(o.scheme == Scheme::sfl ? join_indices(row.splits) : std::string{});
        csv.end_row();
    }
}

}  // namespace sfl
