#include "sfl/split_policy.hpp"

#include "sfl/csv.hpp"
#include "sfl/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace sfl {

std::size_t layer_bound(double phi_sq, double phi_hat_sq, std::size_t num_devices, std::size_t num_layers) {
    if (num_devices < 1) throw DomainError("layer_bound: num_devices must be >= 1");
    if (num_devices == 1) return num_layers;
    if (!(phi_sq > 0.0) || !(phi_hat_sq > 0.0)) {
        throw DomainError(fmt::format("layer_bound: phi_sq and phi_hat_sq must be > 0 (got {}, {})", phi_sq, phi_hat_sq));
    }
    const double k = static_cast<double>(num_devices);
    // phi_hat / ((1 - 1/K) phi) rearranged to avoid rounding 1 - 1/K.
    const double raw = std::floor(phi_hat_sq * k / ((k - 1.0) * phi_sq));
    if (raw < 1.0) {
        throw InfeasibleError(fmt::format(
            "convergence.phi_hat_sq: bound floor({} / ((1 - 1/{}) * {})) = {} admits no split point", phi_hat_sq,
            num_devices, phi_sq, raw));
    }
    if (raw >= static_cast<double>(num_layers)) return num_layers;
    return static_cast<std::size_t>(raw);
}

double stop_survival(const DeviceProfile& dev, double macs, double threshold) {
    const double floor = dev.a * macs;
    if (!(threshold > floor)) return 1.0;
    if (std::isinf(threshold)) return 0.0;
    return std::clamp(std::exp(-(dev.eps / macs) * (threshold - floor)), 0.0, 1.0);
}

SplitPolicy backward_induction(const NetworkProfile& prof, const DeviceProfile& dev,
                               std::span<const double> comm_latencies, std::size_t max_split) {
    if (max_split < 1 || max_split > prof.num_layers()) {
        throw DomainError(fmt::format("backward_induction: max_split {} outside [1, {}]", max_split, prof.num_layers()));
    }
    if (comm_latencies.size() < max_split) {
        throw DomainError(fmt::format("backward_induction: need {} comm latencies, got {}", max_split,
                                      comm_latencies.size()));
    }
    SplitPolicy policy;
    policy.thresholds.assign(max_split, kInfiniteLatency);
    policy.expected_values.assign(max_split, 0.0);
    policy.survival.assign(max_split, 0.0);

    const auto last = max_split - 1;
    policy.expected_values[last] =
        expected_compute_latency(dev, static_cast<double>(prof.cumulative_macs[last])) + comm_latencies[last];

    for (std::size_t i = last; i-- > 0;) {
        const double c = static_cast<double>(prof.cumulative_macs[i]);
        const double comm = comm_latencies[i];
        const double next = policy.expected_values[i + 1];
        const double threshold = next - comm;
        const double floor = dev.a * c;
        const double survival = stop_survival(dev, c, threshold);
        policy.thresholds[i] = threshold;
        policy.survival[i] = survival;

        if (survival == 1.0) {
            policy.expected_values[i] = next;
            continue;
        }
        // E[min(X + comm, next)] for X shifted exponential with floor a*c and
        // tail rate eps/c: the stop branch integrates X + comm over
        // [floor, threshold) and the continuation branch carries next with
        // the remaining mass.
        const double tail_mean = std::isinf(dev.eps) ? 0.0 : c / dev.eps;
        double value = floor + tail_mean + (1.0 - survival) * comm;
        if (survival > 0.0) value += survival * (next - threshold - tail_mean);
        policy.expected_values[i] = value;
    }

    policy.split_probs = split_probabilities(policy.survival);
    policy.chosen_split = select_split(policy.split_probs);
    return policy;
}

std::vector<double> split_probabilities(std::span<const double> survival) {
    std::vector<double> probs(survival.size(), 0.0);
    if (survival.empty()) return probs;
    double reach = 1.0;
    const auto last = survival.size() - 1;
    for (std::size_t i = 0; i < last; ++i) {
        const double s = std::clamp(survival[i], 0.0, 1.0);
        probs[i] = reach * (1.0 - s);
        reach *= s;
    }
    probs[last] = reach;
    return probs;
}

std::size_t select_split(std::span<const double> split_probs) {
    if (split_probs.empty()) throw DomainError("select_split: empty probability vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < split_probs.size(); ++i) {
        if (split_probs[i] > split_probs[best]) best = i;
    }
    return best + 1;
}

double expected_latency_at_split(const DeviceProfile& dev, const NetworkProfile& prof, std::size_t split,
                                 std::span<const double> comm_latencies) {
    if (split < 1 || split > prof.num_layers() || split > comm_latencies.size()) {
        throw DomainError(fmt::format("expected_latency_at_split: split {} out of range", split));
    }
    return expected_compute_latency(dev, static_cast<double>(prof.macs_at(split))) + comm_latencies[split - 1];
}

std::vector<double> layer_comm_latencies(const NetworkProfile& prof, double rate, std::size_t count,
                                         double link_factor) {
    count = std::min(count, prof.num_layers());
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = link_factor * comm_latency(static_cast<double>(prof.data_size_bits[i]), rate);
    }
    return out;
}

void write_policy_csv(std::ostream& out, std::span<const SplitPolicy> policies) {
    CsvWriter csv(out);
    csv.header({"device", "layer", "threshold_s", "expected_value_s", "split_prob", "chosen"});
    for (std::size_t k = 0; k < policies.size(); ++k) {
        const auto& p = policies[k];
        for (std::size_t i = 0; i < p.max_split(); ++i) {
            csv.cell(static_cast<std::uint64_t>(k + 1))
                .cell(static_cast<std::uint64_t>(i + 1))
                .cell(p.thresholds[i])
                .cell(p.expected_values[i])
                .cell(p.split_probs[i])
                .cell(static_cast<std::int64_t>(p.chosen_split == i + 1));
            csv.end_row();
        }
    }
}

}  // namespace sfl
