#include "sfl/convergence.hpp"

#include "sfl/csv.hpp"
#include "sfl/errors.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace sfl {

void validate(const ConvergenceParams& p) {
    if (!(p.mu > 0.0)) throw ConfigError("convergence.mu: must be > 0");
    if (!(p.beta >= p.mu)) throw ConfigError("convergence.beta: must be >= mu");
    if (p.z_sq < 0.0) throw ConfigError("convergence.z_sq: must be >= 0");
    if (p.sigma_sq < 0.0) throw ConfigError("convergence.sigma_sq: must be >= 0");
    if (p.gamma_gap < 0.0) throw ConfigError("convergence.gamma: must be >= 0");
    if (p.delta1 < 0.0) throw ConfigError("convergence.delta1: must be >= 0");
    if (p.local_iters < 1) throw ConfigError("convergence.local_iters: must be >= 1");
    if (p.num_devices < 1) throw ConfigError("convergence.num_devices: must be >= 1");
    if (p.split < 1 || p.split > p.num_layers) {
        throw ConfigError(fmt::format("convergence.split: {} outside [1, {}]", p.split, p.num_layers));
    }
}

double p_term(const ConvergenceParams& p) {
    const double e_minus_1 = static_cast<double>(p.local_iters) - 1.0;
    const double layers = static_cast<double>(p.num_layers);
    const double split = static_cast<double>(p.split);
    const double unaggregated = layers - split;
    const double inv_k = 1.0 / static_cast<double>(p.num_devices);
    const double gamma_coeff = p.coefficient == GammaCoefficient::theorem ? 6.0 : 4.0;
    // l Z^2 + (L-l) Z^2 / K + l sigma^2 + (L-l) sigma^2 / K, grouped so that
    // K = 1 collapses to exactly L (Z^2 + sigma^2) for every l.
    const double layer_weight = split + inv_k * unaggregated;
    return 2.0 * e_minus_1 * e_minus_1 * layers * p.z_sq + gamma_coeff * p.beta * p.gamma_gap +
           layer_weight * (p.z_sq + p.sigma_sq);
}

double bound_at(const ConvergenceParams& p, double iterations) {
    if (!(iterations >= 1.0)) throw DomainError(fmt::format("bound_at: iterations must be >= 1, got {}", iterations));
    const double alpha = p.beta / p.mu;
    const double gamma = std::max(8.0 * alpha, static_cast<double>(p.local_iters));
    return alpha / (gamma + iterations) * (2.0 * p_term(p) / p.mu + 0.5 * p.mu * (gamma + 1.0) * p.delta1);
}

double dp_dsplit(const ConvergenceParams& p) {
    return (1.0 - 1.0 / static_cast<double>(p.num_devices)) * (p.z_sq + p.sigma_sq);
}

void write_bound_csv(std::ostream& out, const ConvergenceParams& params, std::span<const std::size_t> iterations) {
    CsvWriter csv(out);
    csv.header({"iterations", "p_term", "bound"});
    const double p = p_term(params);
    for (auto t : iterations) {
        csv.cell(static_cast<std::uint64_t>(t)).cell(p).cell(bound_at(params, static_cast<double>(t)));
        csv.end_row();
    }
}

}  // namespace sfl
