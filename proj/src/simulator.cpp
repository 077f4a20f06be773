#include "sfl/simulator.hpp"

#include "sfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sfl {

std::string_view to_string(Scheme scheme) { return scheme == Scheme::sfl ? "sfl" : "fedavg"; }

namespace {

double sample_split_compute(const DeviceProfile& dev, const NetworkProfile& prof, std::size_t split,
                            ComputeSampling mode, Rng& rng) {
    if (mode == ComputeSampling::independent) {
        return sample_compute_latency(dev, static_cast<double>(prof.macs_at(split)), rng);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < split; ++i) {
        total += sample_compute_latency(dev, static_cast<double>(prof.layer_macs[i]), rng);
    }
    return total;
}

const ChannelRealization& pick_channel(const OptimizationProblem& problem, std::size_t k, bool fresh, Rng& rng,
                                       ChannelRealization& scratch) {
    if (!fresh) return problem.channels[k];
    scratch = sample_channel(problem.fleet[k], problem.system, rng);
    return scratch;
}

void close_round(RoundOutcome& out) {
    out.round_latency = 0.0;
    for (std::size_t k = 0; k < out.compute_s.size(); ++k) {
        const double total = out.compute_s[k] + out.comm_s[k];
        if (k == 0 || total > out.round_latency) {
            out.round_latency = total;
            out.bottleneck = k;
        }
    }
}

}  // namespace

RoundOutcome simulate_sfl_round(const OptimizationProblem& problem, const JointSolution& solution,
                                const RoundOptions& opts, Rng& rng) {
    const auto n = problem.num_devices();
    if (solution.splits.size() != n || solution.allocation.ratios.size() != n) {
        throw DomainError("simulate_sfl_round: solution does not match the fleet");
    }
    const double e = static_cast<double>(opts.local_iters);
    RoundOutcome out;
    out.scheme = Scheme::sfl;
    out.compute_s.resize(n);
    out.comm_s.resize(n);
    ChannelRealization scratch;
    for (std::size_t k = 0; k < n; ++k) {
        const auto split = solution.splits[k];
        const double compute = sample_split_compute(problem.fleet[k], problem.profile, split, opts.sampling, rng);
        const auto& ch = pick_channel(problem, k, opts.fresh_fading, rng, scratch);
        const double bits = problem.link_factor() * static_cast<double>(problem.profile.bits_at(split));
        const double comm = comm_latency(bits, solution.allocation.ratios[k] * unit_rate(ch, problem.system));
        out.compute_s[k] = e * compute;
        out.comm_s[k] = e * comm;
    }
    close_round(out);
    return out;
}

FedAvgPlan make_fedavg_plan(const OptimizationProblem& problem, double model_bits, double round_macs,
                            double eps_tol) {
    FedAvgPlan plan;
    plan.model_bits = model_bits;
    plan.round_macs = round_macs;
    std::vector<BandwidthDemand> demands(problem.num_devices());
    for (std::size_t k = 0; k < demands.size(); ++k) {
        demands[k].data_bits = model_bits;
        demands[k].compute_s = expected_compute_latency(problem.fleet[k], round_macs);
        demands[k].unit_rate = problem.unit_rate_of(k);
    }
    AllocationOptions opts;
    opts.eps_tol = eps_tol;
    plan.allocation = binary_search_allocation(demands, opts);
    return plan;
}

RoundOutcome simulate_fedavg_round(const OptimizationProblem& problem, const FedAvgPlan& plan,
                                   const RoundOptions& opts, Rng& rng) {
    const auto n = problem.num_devices();
    RoundOutcome out;
    out.scheme = Scheme::fedavg;
    out.compute_s.resize(n);
    out.comm_s.resize(n);
    ChannelRealization scratch;
    for (std::size_t k = 0; k < n; ++k) {
        out.compute_s[k] = sample_compute_latency(problem.fleet[k], plan.round_macs, rng);
        const auto& ch = pick_channel(problem, k, opts.fresh_fading, rng, scratch);
        out.comm_s[k] = comm_latency(plan.model_bits, plan.allocation.ratios[k] * unit_rate(ch, problem.system));
    }
    close_round(out);
    return out;
}

LatencySummary summarize(std::vector<double> latencies) {
    LatencySummary s;
    if (latencies.empty()) return s;
    std::sort(latencies.begin(), latencies.end());
    s.mean = std::accumulate(latencies.begin(), latencies.end(), 0.0) / static_cast<double>(latencies.size());
    // Nearest-rank percentiles.
    auto rank = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(latencies.size())));
        return latencies[std::clamp<std::size_t>(idx, 1, latencies.size()) - 1];
    };
    s.p50 = rank(0.5);
    s.p95 = rank(0.95);
    s.max = latencies.back();
    return s;
}

}  // namespace sfl
