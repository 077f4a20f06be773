#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>

namespace sfl {

// The heterogeneity term enters P as 6*beta*Gamma in the theorem statement
// and as 4*beta*Gamma in the body of its proof. Both are available.
enum class GammaCoefficient { theorem, proof };

struct ConvergenceParams {
    double beta = 1.0;       // smoothness
    double mu = 0.5;         // strong convexity
    double z_sq = 1.0;       // per-layer gradient norm bound
    double sigma_sq = 1.0;   // per-layer gradient variance bound
    double gamma_gap = 0.0;  // heterogeneity gap Gamma
    double delta1 = 1.0;     // initial mean squared distance to the optimum
    std::size_t local_iters = 1;   // E
    std::size_t num_devices = 1;   // K
    std::size_t num_layers = 1;    // L
    std::size_t split = 1;         // aggregation boundary, max_k ell_k
    GammaCoefficient coefficient = GammaCoefficient::theorem;
};

void validate(const ConvergenceParams& params);

double p_term(const ConvergenceParams& params);
// Upper bound on the expected optimality gap after `iterations` steps with
// the decaying step size 2 / (mu (gamma + t)).
double bound_at(const ConvergenceParams& params, double iterations);
// dP/d(split) = (1 - 1/K)(Z^2 + sigma^2); P is affine in the split.
double dp_dsplit(const ConvergenceParams& params);

void write_bound_csv(std::ostream& out, const ConvergenceParams& params, std::span<const std::size_t> iterations);

}  // namespace sfl
