#pragma once

#include "sfl/bandwidth.hpp"
#include "sfl/profiler.hpp"
#include "sfl/split_policy.hpp"
#include "sfl/wireless.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace sfl {

// Everything the optimizer needs: the network profile, the fleet with the
// channel state each device is optimized against, and the split cap.
struct OptimizationProblem {
    NetworkProfile profile;
    std::vector<DeviceProfile> fleet;
    std::vector<ChannelRealization> channels;
    SystemParams system;
    std::size_t max_split = 1;

    std::size_t num_devices() const { return fleet.size(); }
    double link_factor() const { return system.include_downlink ? 2.0 : 1.0; }
    double unit_rate_of(std::size_t k) const { return unit_rate(channels.at(k), system); }
};

struct AlternatingOptions {
    std::size_t n_iter = 10;
    double eps_tol = 1e-3;
};

struct JointSolution {
    std::vector<std::size_t> splits;        // 1-based split point per device
    BandwidthAllocation allocation;
    double expected_total_latency = 0.0;
    std::vector<double> trace;              // best objective seen after each iteration
    std::vector<double> raw_trace;          // objective of each iteration's own solution
    std::vector<SplitPolicy> policies;      // policies that produced `splits`
    std::size_t iterations = 0;
    bool converged = false;                 // split vector repeated before n_iter ran out
};

void validate(const OptimizationProblem& problem);

// max_k of expected compute at the split plus transfer time at ratio b_k.
double expected_total_latency(const OptimizationProblem& problem, std::span<const std::size_t> splits,
                              std::span<const double> ratios);

// Per-device backward induction for fixed ratios.
std::vector<SplitPolicy> optimize_splits(const OptimizationProblem& problem, std::span<const double> ratios);

std::vector<BandwidthDemand> bandwidth_demands(const OptimizationProblem& problem,
                                               std::span<const std::size_t> splits);

BandwidthAllocation allocate_for_splits(const OptimizationProblem& problem, std::span<const std::size_t> splits,
                                        double eps_tol);

JointSolution alternating_optimize(const OptimizationProblem& problem, const AlternatingOptions& opts = {});

void write_solution_csv(std::ostream& out, const OptimizationProblem& problem, const JointSolution& sol);
void write_trace_csv(std::ostream& out, const JointSolution& sol);

}  // namespace sfl
