#include "sfl/joint_optimizer.hpp"

#include "sfl/csv.hpp"
#include "sfl/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace sfl {

void validate(const OptimizationProblem& problem) {
    if (problem.fleet.empty()) throw ConfigError("fleet: no devices");
    if (problem.channels.size() != problem.fleet.size()) {
        throw ConfigError(fmt::format("fleet: {} devices but {} channel states", problem.fleet.size(),
                                      problem.channels.size()));
    }
    if (problem.max_split < 1 || problem.max_split > problem.profile.num_layers()) {
        throw InfeasibleError(fmt::format("convergence.max_split: {} outside [1, {}]", problem.max_split,
                                          problem.profile.num_layers()));
    }
    for (const auto& dev : problem.fleet) validate(dev);
    validate(problem.system);
}

double expected_total_latency(const OptimizationProblem& problem, std::span<const std::size_t> splits,
                              std::span<const double> ratios) {
    if (splits.size() != problem.num_devices() || ratios.size() != problem.num_devices()) {
        throw DomainError("expected_total_latency: dimension mismatch");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < problem.num_devices(); ++k) {
        const auto split = splits[k];
        const double compute =
            expected_compute_latency(problem.fleet[k], static_cast<double>(problem.profile.macs_at(split)));
        const double bits = problem.link_factor() * static_cast<double>(problem.profile.bits_at(split));
        const double comm = comm_latency(bits, ratios[k] * problem.unit_rate_of(k));
        worst = std::max(worst, compute + comm);
    }
    return worst;
}

std::vector<SplitPolicy> optimize_splits(const OptimizationProblem& problem, std::span<const double> ratios) {
    std::vector<SplitPolicy> policies;
    policies.reserve(problem.num_devices());
    for (std::size_t k = 0; k < problem.num_devices(); ++k) {
        const double rate = ratios[k] * problem.unit_rate_of(k);
        const auto comm = layer_comm_latencies(problem.profile, rate, problem.max_split, problem.link_factor());
        policies.push_back(backward_induction(problem.profile, problem.fleet[k], comm, problem.max_split));
    }
    return policies;
}

std::vector<BandwidthDemand> bandwidth_demands(const OptimizationProblem& problem,
                                               std::span<const std::size_t> splits) {
    std::vector<BandwidthDemand> demands(problem.num_devices());
    for (std::size_t k = 0; k < problem.num_devices(); ++k) {
        demands[k].data_bits = problem.link_factor() * static_cast<double>(problem.profile.bits_at(splits[k]));
        demands[k].compute_s =
            expected_compute_latency(problem.fleet[k], static_cast<double>(problem.profile.macs_at(splits[k])));
        demands[k].unit_rate = problem.unit_rate_of(k);
    }
    return demands;
}

BandwidthAllocation allocate_for_splits(const OptimizationProblem& problem, std::span<const std::size_t> splits,
                                        double eps_tol) {
    const auto demands = bandwidth_demands(problem, splits);
    AllocationOptions opts;
    opts.eps_tol = eps_tol;
    return binary_search_allocation(demands, opts);
}

JointSolution alternating_optimize(const OptimizationProblem& problem, const AlternatingOptions& opts) {
    validate(problem);
    if (opts.n_iter < 1) throw ConfigError("optimizer.n_iter: must be >= 1");
    const auto k = problem.num_devices();

    JointSolution best;
    best.expected_total_latency = kInfiniteLatency;
    std::vector<double> ratios(k, 1.0 / static_cast<double>(k));
    std::vector<std::size_t> previous;
    std::vector<double> trace;
    std::vector<double> raw_trace;

    for (std::size_t it = 1; it <= opts.n_iter; ++it) {
        auto policies = optimize_splits(problem, ratios);
        std::vector<std::size_t> splits(k);
        std::transform(policies.begin(), policies.end(), splits.begin(),
                       [](const SplitPolicy& p) { return p.chosen_split; });
        if (splits == previous) {
            best.converged = true;
            break;
        }
        auto alloc = allocate_for_splits(problem, splits, opts.eps_tol);
        const double objective = expected_total_latency(problem, splits, alloc.ratios);
        if (!std::isfinite(objective)) throw NumericalError("alternating_optimize: non-finite objective");
        raw_trace.push_back(objective);
        if (objective < best.expected_total_latency) {
            best.splits = splits;
            best.allocation = alloc;
            best.expected_total_latency = objective;
            best.policies = std::move(policies);
        }
        trace.push_back(best.expected_total_latency);
        best.iterations = it;
        ratios = alloc.ratios;
        previous = std::move(splits);
    }
    best.trace = std::move(trace);
    best.raw_trace = std::move(raw_trace);
    return best;
}

void write_solution_csv(std::ostream& out, const OptimizationProblem& problem, const JointSolution& sol) {
    CsvWriter csv(out);
    csv.header({"device", "a_s_per_mac", "eps_mac_per_s", "distance_m", "snr_db", "split", "ratio", "compute_s",
                "comm_s", "total_s"});
    for (std::size_t k = 0; k < problem.num_devices(); ++k) {
        const auto split = sol.splits[k];
        const auto& dev = problem.fleet[k];
        const double compute = expected_compute_latency(dev, static_cast<double>(problem.profile.macs_at(split)));
        const double comm = comm_latency(problem.link_factor() * static_cast<double>(problem.profile.bits_at(split)),
                                         sol.allocation.ratios[k] * problem.unit_rate_of(k));
        csv.cell(static_cast<std::uint64_t>(k + 1))
            .cell(dev.a)
            .cell(dev.eps)
            .cell(dev.d_m)
            .cell(10.0 * std::log10(problem.channels[k].snr_linear))
            .cell(static_cast<std::uint64_t>(split))
            .cell(sol.allocation.ratios[k])
            .cell(compute)
            .cell(comm)
            .cell(compute + comm);
        csv.end_row();
    }
}

void write_trace_csv(std::ostream& out, const JointSolution& sol) {
    CsvWriter csv(out);
    csv.header({"iteration", "objective_s", "best_s"});
    for (std::size_t i = 0; i < sol.trace.size(); ++i) {
        csv.cell(static_cast<std::uint64_t>(i + 1)).cell(sol.raw_trace[i]).cell(sol.trace[i]);
        csv.end_row();
    }
}

}  // namespace sfl
