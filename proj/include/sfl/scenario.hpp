#pragma once

#include "sfl/convergence.hpp"
#include "sfl/joint_optimizer.hpp"
#include "sfl/micro_trainer.hpp"
#include "sfl/profiler.hpp"
#include "sfl/simulator.hpp"
#include "sfl/wireless.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sfl {

// Randomized fleet: a drawn uniformly in [a_min, a_max], eps = eps_times_a / a,
// distance uniform in [d_min, d_max].
struct FleetGenerator {
    std::size_t count = 20;
    double a_min = 0.2e-9;
    double a_max = 1e-9;
    double eps_times_a = 2.0;
    double p_dbm = 10.0;
    double d_min = 100.0;
    double d_max = 300.0;
};

enum class ChannelMode {
    sampled,  // one small-scale fading draw per device, fixed for the run
    mean,     // large-scale path loss only
};

enum class SweepParameter { none, distance, a, max_split };
std::string_view to_string(SweepParameter p);

struct SimulateConfig {
    RoundOptions round;
    std::size_t rounds = 1000;
    std::vector<std::uint64_t> seeds = {1};
    std::size_t fedavg_samples = 1500;   // local objects processed per FedAvg round
    SweepParameter sweep = SweepParameter::none;
    std::vector<double> sweep_values;
    bool write_rounds = true;
};

struct Scenario {
    SystemParams system;
    std::optional<FleetGenerator> generator;
    std::vector<DeviceProfile> fleet;
    std::vector<double> fading;          // Exp(1) small-scale draw per device
    ChannelMode channel_mode = ChannelMode::sampled;
    NetworkArchitecture architecture;
    std::optional<std::size_t> max_split;
    double phi_sq = 0.0;
    double phi_hat_sq = 0.0;
    ConvergenceParams convergence;
    std::vector<std::size_t> bound_iterations = {1, 10, 100, 1000, 10000};
    AlternatingOptions optimizer;
    SimulateConfig simulate;
    micro::TrainConfig train;
};

// Parses and validates a scenario. `base_dir` resolves relative file paths.
Scenario parse_scenario(std::string_view yaml_text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

// Redraws the random parts (generated fleet, fading) for `seed`.
void reseed(Scenario& scenario, std::uint64_t seed);

// Default setup: 20 devices, W = 20 MHz, p = 10 dBm, N0 = -114 dBm,
// a in [0.2, 1] ns/MAC with eps = 2/a, AlexNet with split cap 8.
Scenario default_scenario(std::string_view architecture = "alexnet20");

std::size_t resolve_max_split(const Scenario& scenario);
OptimizationProblem build_problem(const Scenario& scenario);

// Copy of `scenario` moved to one sweep grid point. distance and a rescale
// the fleet so its mean equals `value` (eps*a kept per device); max_split
// sets the cap directly.
Scenario apply_sweep(const Scenario& scenario, SweepParameter parameter, double value);

FedAvgPlan fedavg_plan_for(const Scenario& scenario, const OptimizationProblem& problem);

struct CampaignRow {
    SweepParameter parameter = SweepParameter::none;
    double value = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::vector<std::size_t> splits;
    double mean_split = 0.0;
    double expected_total_s = 0.0;
    LatencySummary sfl;
    LatencySummary fedavg;
};

struct RoundRecord {
    std::size_t row = 0;                 // index into the campaign rows
    std::size_t round = 0;
    RoundOutcome outcome;
};

struct CampaignResult {
    std::vector<CampaignRow> rows;
    std::vector<RoundRecord> rounds;
};

// Grid points x seeds run as independent tasks on up to `jobs` threads;
// output order is fixed (grid-major, then seed) regardless of `jobs`.
CampaignResult run_campaign(const Scenario& scenario, std::size_t jobs = 1);

void write_campaign_csv(std::ostream& out, const CampaignResult& result);
void write_rounds_csv(std::ostream& out, const CampaignResult& result);

}  // namespace sfl
