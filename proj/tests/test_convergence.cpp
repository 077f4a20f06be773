#include "sfl/convergence.hpp"
#include "sfl/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace sfl;

namespace {

ConvergenceParams worked_example() {
    ConvergenceParams p;
    p.z_sq = 1.0;
    p.sigma_sq = 1.0;
    p.num_devices = 2;
    p.num_layers = 10;
    p.split = 4;
    p.local_iters = 2;
    p.beta = 1.0;
    p.gamma_gap = 0.5;
    p.mu = 0.5;
    p.delta1 = 1.0;
    return p;
}

// Term-by-term transcription, kept separate from the library's grouping.
double reference_p(const ConvergenceParams& p, double gamma_coeff) {
    const double e = static_cast<double>(p.local_iters), l = static_cast<double>(p.num_layers),
                 s = static_cast<double>(p.split), k = static_cast<double>(p.num_devices);
    return 2 * (e - 1) * (e - 1) * l * p.z_sq + gamma_coeff * p.beta * p.gamma_gap + s * p.z_sq +
           (l - s) * p.z_sq / k + s * p.sigma_sq + (l - s) * p.sigma_sq / k;
}

double reference_bound(const ConvergenceParams& p, double t, double gamma_coeff) {
    const double alpha = p.beta / p.mu;
    const double gamma = std::max(8 * alpha, static_cast<double>(p.local_iters));
    return alpha / (gamma + t) * (2 * reference_p(p, gamma_coeff) / p.mu + p.mu / 2 * (gamma + 1) * p.delta1);
}

}  // namespace

TEST(PTerm, WorkedExampleIs37) {
    EXPECT_DOUBLE_EQ(p_term(worked_example()), 37.0);
    auto proof = worked_example();
    proof.coefficient = GammaCoefficient::proof;
    EXPECT_DOUBLE_EQ(p_term(proof), 36.0);
}

TEST(PTerm, CollapsesToLayerSum) {
    ConvergenceParams p;
    p.num_layers = 12;
    p.z_sq = 0.3;
    p.sigma_sq = 0.7;
    for (std::size_t l = 1; l <= 12; ++l) {
        p.split = l;
        p.num_devices = 1;
        EXPECT_DOUBLE_EQ(p_term(p), 12.0);
    }
    p.split = 12;
    for (std::size_t k : {2u, 3u, 7u, 50u}) {
        p.num_devices = k;
        EXPECT_DOUBLE_EQ(p_term(p), 12.0);
    }
}

TEST(PTerm, FiniteDifferenceEqualsDerivativeExactlyOnDyadicInputs) {
    ConvergenceParams p;
    p.num_layers = 20;
    p.z_sq = 1.5;
    p.sigma_sq = 0.25;
    p.gamma_gap = 0.75;
    p.local_iters = 3;
    for (std::size_t k : {1u, 2u, 4u, 8u, 64u}) {
        p.num_devices = k;
        for (std::size_t l = 1; l < p.num_layers; ++l) {
            p.split = l;
            const double lo = p_term(p);
            p.split = l + 1;
            EXPECT_EQ(p_term(p) - lo, dp_dsplit(p)) << "K=" << k << " l=" << l;
        }
    }
}

TEST(PTerm, FiniteDifferenceMatchesDerivativeOnRandomInputs) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        ConvergenceParams p;
        p.num_layers = 2 + trial % 30;
        p.num_devices = 1 + trial % 13;
        p.z_sq = u(rng);
        p.sigma_sq = u(rng);
        p.gamma_gap = u(rng);
        for (std::size_t l = 1; l < p.num_layers; ++l) {
            p.split = l;
            const double lo = p_term(p);
            p.split = l + 1;
            EXPECT_NEAR(p_term(p) - lo, dp_dsplit(p), 1e-12 * std::max(1.0, p_term(p)));
        }
    }
}

TEST(PTerm, MatchesTermByTermTranscription) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        ConvergenceParams p;
        p.num_layers = 1 + trial % 25;
        p.split = 1 + trial % p.num_layers;
        p.num_devices = 1 + trial % 9;
        p.local_iters = 1 + trial % 4;
        p.z_sq = u(rng);
        p.sigma_sq = u(rng);
        p.gamma_gap = u(rng);
        p.beta = 1.0 + u(rng);
        EXPECT_NEAR(p_term(p), reference_p(p, 6.0), 1e-12 * reference_p(p, 6.0));
    }
}

TEST(DpDsplit, Limits) {
    ConvergenceParams p;
    p.z_sq = 2.0;
    p.sigma_sq = 1.0;
    p.num_devices = 1;
    EXPECT_EQ(dp_dsplit(p), 0.0);
    p.num_devices = 1'000'000'000;
    EXPECT_NEAR(dp_dsplit(p), 3.0, 1e-8);
}

TEST(Bound, WorkedExampleDualEvaluation) {
    const auto p = worked_example();
    // alpha = 2, gamma = max(16, 2) = 16: 2/116 * (2*37/0.5 + 0.25*17).
    const double by_hand = 2.0 / 116.0 * (148.0 + 4.25);
    EXPECT_NEAR(bound_at(p, 100.0), by_hand, 1e-12);
    EXPECT_NEAR(bound_at(p, 100.0), reference_bound(p, 100.0, 6.0), 1e-12);
}

TEST(Bound, InverseScalingAndDecay) {
    const auto p = worked_example();
    const double gamma = 16.0;
    // Doubling gamma + T halves the bound.
    EXPECT_NEAR(bound_at(p, 2 * (gamma + 50.0) - gamma), 0.5 * bound_at(p, 50.0), 1e-12);
    EXPECT_LT(bound_at(p, 1e12), 1e-9);
    double prev = bound_at(p, 1.0);
    for (double t = 2.0; t < 1e6; t *= 1.7) {
        const double b = bound_at(p, t);
        EXPECT_GT(b, 0.0);
        EXPECT_LT(b, prev);
        prev = b;
    }
    EXPECT_THROW(bound_at(p, 0.5), DomainError);
}

TEST(Bound, IncreasingInPAndDelta) {
    auto p = worked_example();
    const double base = bound_at(p, 100.0);
    p.delta1 = 2.0;
    EXPECT_GT(bound_at(p, 100.0), base);
    p = worked_example();
    p.gamma_gap = 1.0;
    EXPECT_GT(bound_at(p, 100.0), base);
}

TEST(Bound, SingleDeviceIndependentOfSplit) {
    auto p = worked_example();
    p.num_devices = 1;
    p.z_sq = 0.37;
    p.sigma_sq = 1.13;
    p.split = 1;
    const double ref = bound_at(p, 250.0);
    for (std::size_t l = 2; l <= p.num_layers; ++l) {
        p.split = l;
        EXPECT_EQ(bound_at(p, 250.0), ref);
    }
}

TEST(Validate, Ranges) {
    auto p = worked_example();
    EXPECT_NO_THROW(validate(p));
    p.beta = 0.1;
    EXPECT_THROW(validate(p), ConfigError);
    p = worked_example();
    p.split = 11;
    EXPECT_THROW(validate(p), ConfigError);
}

TEST(Csv, BoundTable) {
    const std::vector<std::size_t> ts = {1, 10, 100};
    std::ostringstream out;
    write_bound_csv(out, worked_example(), ts);
    const auto text = out.str();
    EXPECT_EQ(text.rfind("iterations,p_term,bound\n1,37,", 0), 0u);
}
