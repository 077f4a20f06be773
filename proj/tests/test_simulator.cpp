#include "sfl/errors.hpp"
#include "sfl/simulator.hpp"

#include "support/instances.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace sfl;

namespace {

struct Setup {
    OptimizationProblem problem;
    JointSolution solution;
};

Setup solved(std::uint64_t seed, std::size_t k = 4, std::size_t layers = 6) {
    Rng rng = make_stream(seed, 0);
    Setup s;
    s.problem = fixtures::random_problem(rng, k, layers);
    s.solution = alternating_optimize(s.problem);
    return s;
}

}  // namespace

TEST(SflRound, DeterministicLimitEqualsExpectedLatency) {
    auto s = solved(3);
    for (auto& dev : s.problem.fleet) dev.eps = std::numeric_limits<double>::infinity();
    s.solution = alternating_optimize(s.problem);
    RoundOptions opts;
    opts.local_iters = 3;
    opts.fresh_fading = false;
    Rng rng = make_stream(1, 0);
    const auto out = simulate_sfl_round(s.problem, s.solution, opts, rng);
    EXPECT_NEAR(out.round_latency, 3.0 * s.solution.expected_total_latency, 1e-12 * out.round_latency);
}

TEST(SflRound, MeanDominatesExpectedLatency) {
    const auto s = solved(5);
    RoundOptions opts;
    opts.local_iters = 1;
    opts.fresh_fading = false;
    Rng rng = make_stream(2, 0);
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) sum += simulate_sfl_round(s.problem, s.solution, opts, rng).round_latency;
    EXPECT_GE(sum / n, s.solution.expected_total_latency);
}

TEST(SflRound, ShiftBoundAndMaxInvariant) {
    const auto s = solved(7);
    for (auto sampling : {ComputeSampling::independent, ComputeSampling::incremental}) {
        RoundOptions opts;
        opts.sampling = sampling;
        Rng rng = make_stream(4, 0);
        for (int i = 0; i < 500; ++i) {
            const auto out = simulate_sfl_round(s.problem, s.solution, opts, rng);
            double worst = 0.0;
            for (std::size_t k = 0; k < s.problem.num_devices(); ++k) {
                const double floor = s.problem.fleet[k].a *
                                     static_cast<double>(s.problem.profile.macs_at(s.solution.splits[k])) *
                                     static_cast<double>(opts.local_iters);
                ASSERT_GE(out.compute_s[k], floor * (1.0 - 1e-12));
                ASSERT_GE(out.comm_s[k], 0.0);
                worst = std::max(worst, out.compute_s[k] + out.comm_s[k]);
            }
            ASSERT_EQ(out.round_latency, worst);
            ASSERT_EQ(out.compute_s[out.bottleneck] + out.comm_s[out.bottleneck], worst);
        }
    }
}

TEST(SflRound, IncrementalSamplingHasSameMean) {
    const auto s = solved(9, 1, 5);
    RoundOptions ind, inc;
    ind.local_iters = inc.local_iters = 1;
    ind.fresh_fading = inc.fresh_fading = false;
    inc.sampling = ComputeSampling::incremental;
    Rng r1 = make_stream(1, 0), r2 = make_stream(1, 1);
    double m1 = 0.0, m2 = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        m1 += simulate_sfl_round(s.problem, s.solution, ind, r1).compute_s[0];
        m2 += simulate_sfl_round(s.problem, s.solution, inc, r2).compute_s[0];
    }
    EXPECT_NEAR(m1 / m2, 1.0, 0.02);
}

TEST(SflRound, SameSeedSameOutcome) {
    const auto s = solved(11);
    RoundOptions opts;
    Rng a = make_stream(9, 9), b = make_stream(9, 9);
    for (int i = 0; i < 20; ++i) {
        const auto x = simulate_sfl_round(s.problem, s.solution, opts, a);
        const auto y = simulate_sfl_round(s.problem, s.solution, opts, b);
        ASSERT_EQ(x.compute_s, y.compute_s);
        ASSERT_EQ(x.comm_s, y.comm_s);
    }
}

TEST(FedAvg, TwoHundredMegabyteUploadTakesEightySeconds) {
    auto s = solved(1, 1, 3);
    s.problem.channels[0].snr_linear = 1.0;  // 20 Mbit/s with the whole band
    const auto plan = make_fedavg_plan(s.problem, 200.0 * 8e6, 1e6);
    RoundOptions opts;
    opts.fresh_fading = false;
    Rng rng = make_stream(1, 0);
    const auto out = simulate_fedavg_round(s.problem, plan, opts, rng);
    EXPECT_NEAR(out.comm_s[0], 80.0, 80.0 * 1e-3);
    EXPECT_GE(out.comm_s[0], 80.0);
}

TEST(FedAvg, ZeroSizeModelHasNoComm) {
    const auto s = solved(2, 3, 3);
    const auto plan = make_fedavg_plan(s.problem, 0.0, 1e8);
    Rng rng = make_stream(1, 0);
    const auto out = simulate_fedavg_round(s.problem, plan, {}, rng);
    for (double c : out.comm_s) EXPECT_EQ(c, 0.0);
}

TEST(FedAvg, ShallowSplitComputesLess) {
    auto s = solved(4, 3, 6);
    for (auto& dev : s.problem.fleet) dev.eps = std::numeric_limits<double>::infinity();
    s.solution.splits.assign(3, 1);
    const double full = static_cast<double>(s.problem.profile.cumulative_macs.back());
    const auto plan = make_fedavg_plan(s.problem, 1e6, full);
    RoundOptions opts;
    opts.local_iters = 1;
    Rng rng = make_stream(1, 0);
    const auto sfl = simulate_sfl_round(s.problem, s.solution, opts, rng);
    const auto fed = simulate_fedavg_round(s.problem, plan, opts, rng);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_LT(sfl.compute_s[k], fed.compute_s[k]);
}

TEST(Summary, NearestRankPercentiles) {
    std::vector<double> v;
    for (int i = 100; i >= 1; --i) v.push_back(i);
    const auto s = summarize(v);
    EXPECT_DOUBLE_EQ(s.mean, 50.5);
    EXPECT_EQ(s.p50, 50.0);
    EXPECT_EQ(s.p95, 95.0);
    EXPECT_EQ(s.max, 100.0);
    const auto empty = summarize({});
    EXPECT_EQ(empty.mean, 0.0);
}

TEST(SflRound, RejectsMismatchedSolution) {
    auto s = solved(1, 3, 3);
    s.solution.splits.pop_back();
    Rng rng = make_stream(1, 0);
    EXPECT_THROW(simulate_sfl_round(s.problem, s.solution, {}, rng), DomainError);
}
