#pragma once

#include "sfl/bandwidth.hpp"
#include "sfl/joint_optimizer.hpp"
#include "sfl/rng.hpp"

#include <string_view>
#include <vector>

namespace sfl {

enum class Scheme { sfl, fedavg };
std::string_view to_string(Scheme scheme);

enum class ComputeSampling {
    independent,  // one shifted-exponential draw at the cumulative load, as the optimizer models it
    incremental,  // per-layer draws on the incremental loads, accumulated
};

struct RoundOptions {
    std::size_t local_iters = 5;   // E split iterations per round
    ComputeSampling sampling = ComputeSampling::independent;
    bool fresh_fading = true;      // false: reuse the channel state the optimizer saw
};

struct RoundOutcome {
    std::vector<double> compute_s;
    std::vector<double> comm_s;
    double round_latency = 0.0;
    std::size_t bottleneck = 0;    // device attaining the max
    Scheme scheme = Scheme::sfl;
};

// One SFL round: per device, a compute draw at its split and a transfer of
// D at ratio b_k over a channel draw, both scaled by E; latency is the max.
RoundOutcome simulate_sfl_round(const OptimizationProblem& problem, const JointSolution& solution,
                                const RoundOptions& opts, Rng& rng);

// FedAvg: every device runs the full network over its local data and uploads
// the full parameter set once per round.
struct FedAvgPlan {
    double model_bits = 0.0;
    double round_macs = 0.0;       // full-network MACs per round per device
    BandwidthAllocation allocation;
};

FedAvgPlan make_fedavg_plan(const OptimizationProblem& problem, double model_bits, double round_macs,
                            double eps_tol = 1e-3);

RoundOutcome simulate_fedavg_round(const OptimizationProblem& problem, const FedAvgPlan& plan,
                                   const RoundOptions& opts, Rng& rng);

struct LatencySummary {
    double mean = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    double max = 0.0;
};

LatencySummary summarize(std::vector<double> latencies);

}  // namespace sfl
