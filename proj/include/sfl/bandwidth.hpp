#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace sfl {

// What one device needs from the uplink at its chosen split point.
struct BandwidthDemand {
    double data_bits = 0.0;   // D at the split point (doubled when downlink is charged)
    double compute_s = 0.0;   // expected compute latency at the split point
    double unit_rate = 0.0;   // W * log2(1 + snr), bits/s with the whole band
};

struct BandwidthAllocation {
    std::vector<double> ratios;
    double tau_star = 0.0;     // common finish time of the devices that transmit
    double residual = 0.0;     // 1 - sum(ratios), left unallocated
    std::size_t iterations = 0;
};

struct AllocationOptions {
    double eps_tol = 1e-3;
    double tau_up_init = 0.0;   // <= lower bound means "derive automatically"
    std::size_t max_iterations = 200;
};

// b_k = D_k / ((tau - compute_k) * unit_rate_k). Devices without data get 0.
// Throws DomainError naming the first device whose compute latency is not
// below tau.
std::vector<double> ratio_for_tau(double tau, std::span<const BandwidthDemand> demands);

// Bisection on the common finish time until the ratios sum into
// (1 - eps_tol, 1]. Throws NumericalError if the cap is hit.
BandwidthAllocation binary_search_allocation(std::span<const BandwidthDemand> demands,
                                             const AllocationOptions& opts = {});

// compute_k + D_k / (b_k * unit_rate_k) per device.
std::vector<double> finish_times(std::span<const BandwidthDemand> demands, std::span<const double> ratios);

void write_allocation_csv(std::ostream& out, std::span<const BandwidthDemand> demands,
                          const BandwidthAllocation& alloc);

}  // namespace sfl
