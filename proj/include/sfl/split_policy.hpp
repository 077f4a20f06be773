#pragma once

#include "sfl/profiler.hpp"
#include "sfl/wireless.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace sfl {

// Backward-induction result for one device. Arrays are indexed by split
// point ell-1 for ell in [1, max_split].
struct SplitPolicy {
    std::vector<double> thresholds;       // stop at ell if compute latency < threshold; +inf at the last layer
    std::vector<double> expected_values;  // E(V_ell)
    std::vector<double> survival;         // P[no stop at ell]; 0 at the last layer
    std::vector<double> split_probs;      // P(ell)
    std::size_t chosen_split = 1;         // argmax P, smallest index on ties

    std::size_t max_split() const { return expected_values.size(); }
};

// Largest split point admitted by the convergence constraint, capped at L.
// Throws InfeasibleError when no layer is admissible. K = 1 makes the
// constraint vacuous.
std::size_t layer_bound(double phi_sq, double phi_hat_sq, std::size_t num_devices, std::size_t num_layers);

// Probability that the compute latency at load `macs` is not below
// `threshold`, clamped to [0, 1].
double stop_survival(const DeviceProfile& dev, double macs, double threshold);

// comm_latencies[i] is the transfer time of layer i+1's output. Only the first
// max_split entries are read.
SplitPolicy backward_induction(const NetworkProfile& prof, const DeviceProfile& dev,
                               std::span<const double> comm_latencies, std::size_t max_split);

std::vector<double> split_probabilities(std::span<const double> survival);
std::size_t select_split(std::span<const double> split_probs);

double expected_latency_at_split(const DeviceProfile& dev, const NetworkProfile& prof, std::size_t split,
                                  std::span<const double> comm_latencies);

// Transfer times D_ell / rate for ell = 1..count. `link_factor` is 2 when the
// downlink gradient is charged at the uplink rate, 1 otherwise.
std::vector<double> layer_comm_latencies(const NetworkProfile& prof, double rate, std::size_t count,
                                         double link_factor = 1.0);

void write_policy_csv(std::ostream& out, std::span<const SplitPolicy> policies);

}  // namespace sfl
