#include "sfl/bandwidth.hpp"

#include "sfl/csv.hpp"
#include "sfl/errors.hpp"
#include "sfl/wireless.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sfl {

namespace {

// Sum of ratios at tau, +inf when tau does not exceed some active device's
// compute latency.
double ratio_sum(double tau, std::span<const BandwidthDemand> demands) {
    double total = 0.0;
    for (const auto& d : demands) {
        if (d.data_bits <= 0.0) continue;
        if (!(tau > d.compute_s)) return kInfiniteLatency;
        total += d.data_bits / ((tau - d.compute_s) * d.unit_rate);
    }
    return total;
}

}  // namespace

std::vector<double> ratio_for_tau(double tau, std::span<const BandwidthDemand> demands) {
    std::vector<double> ratios(demands.size(), 0.0);
    for (std::size_t k = 0; k < demands.size(); ++k) {
        const auto& d = demands[k];
        if (d.data_bits <= 0.0) continue;
        if (!(tau > d.compute_s)) {
            throw DomainError(fmt::format("ratio_for_tau: tau {} s does not exceed compute latency {} s of device {}",
                                          tau, d.compute_s, k + 1));
        }
        ratios[k] = d.data_bits / ((tau - d.compute_s) * d.unit_rate);
    }
    return ratios;
}

BandwidthAllocation binary_search_allocation(std::span<const BandwidthDemand> demands,
                                             const AllocationOptions& opts) {
    if (demands.empty()) throw DomainError("binary_search_allocation: no devices");
    if (!(opts.eps_tol > 0.0 && opts.eps_tol < 0.1)) {
        throw DomainError(fmt::format("binary_search_allocation: eps_tol must be in (0, 0.1), got {}", opts.eps_tol));
    }
    // Devices without data finish at their compute latency and do not bound
    // the common finish time of the transmitting devices.
    double tau_low = 0.0;
    double idle_finish = 0.0;
    double worst_share_latency = 0.0;
    const double k = static_cast<double>(demands.size());
    bool any_data = false;
    for (std::size_t i = 0; i < demands.size(); ++i) {
        const auto& d = demands[i];
        if (!std::isfinite(d.compute_s) || d.compute_s < 0.0) {
            throw DomainError(fmt::format("binary_search_allocation: device {} has invalid compute latency", i + 1));
        }
        idle_finish = std::max(idle_finish, d.compute_s);
        if (d.data_bits <= 0.0) continue;
        tau_low = std::max(tau_low, d.compute_s);
        if (!(d.unit_rate > 0.0) || !std::isfinite(d.unit_rate)) {
            throw DomainError(fmt::format("binary_search_allocation: device {} has no usable link rate", i + 1));
        }
        any_data = true;
        worst_share_latency = std::max(worst_share_latency, d.data_bits * k / d.unit_rate);
    }

    BandwidthAllocation alloc;
    if (!any_data) {
        alloc.ratios.assign(demands.size(), 0.0);
        alloc.tau_star = idle_finish;
        alloc.residual = 1.0;
        return alloc;
    }

    double tau_up = opts.tau_up_init > tau_low ? opts.tau_up_init : tau_low + worst_share_latency;
    for (double gap = tau_up - tau_low; ratio_sum(tau_up, demands) > 1.0; gap *= 2.0) {
        tau_up = tau_low + 2.0 * gap;
        if (!std::isfinite(tau_up)) throw NumericalError("binary_search_allocation: upper bound diverged");
    }

    double tau = tau_up;
    const double lower_accept = 1.0 - opts.eps_tol;
    for (std::size_t it = 1;; ++it) {
        if (it > opts.max_iterations) {
            throw NumericalError(
                fmt::format("binary_search_allocation: no convergence after {} iterations", opts.max_iterations));
        }
        const double sum = ratio_sum(tau, demands);
        if (sum > lower_accept && sum <= 1.0) {
            alloc.iterations = it;
            break;
        }
        if (sum <= lower_accept) {
            tau_up = tau;
            tau = 0.5 * (tau + tau_low);
        } else {
            tau_low = tau;
            tau = 0.5 * (tau + tau_up);
        }
    }
    alloc.ratios = ratio_for_tau(tau, demands);
    alloc.tau_star = tau;
    alloc.residual = 1.0 - std::accumulate(alloc.ratios.begin(), alloc.ratios.end(), 0.0);
    return alloc;
}

std::vector<double> finish_times(std::span<const BandwidthDemand> demands, std::span<const double> ratios) {
    std::vector<double> out(demands.size());
    for (std::size_t k = 0; k < demands.size(); ++k) {
        const auto& d = demands[k];
        out[k] = d.compute_s + comm_latency(d.data_bits, ratios[k] * d.unit_rate);
    }
    return out;
}

void write_allocation_csv(std::ostream& out, std::span<const BandwidthDemand> demands,
                          const BandwidthAllocation& alloc) {
    CsvWriter csv(out);
    csv.header({"device", "ratio", "compute_s", "comm_s", "total_s"});
    const auto totals = finish_times(demands, alloc.ratios);
    for (std::size_t k = 0; k < demands.size(); ++k) {
        csv.cell(static_cast<std::uint64_t>(k + 1))
            .cell(alloc.ratios[k])
            .cell(demands[k].compute_s)
            .cell(totals[k] - demands[k].compute_s)
            .cell(totals[k]);
        csv.end_row();
    }
}

}  // namespace sfl
