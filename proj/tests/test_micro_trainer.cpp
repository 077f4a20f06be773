#include "sfl/errors.hpp"
#include "sfl/micro_trainer.hpp"

#include "support/reference_training.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace sfl;
using namespace sfl::micro;

namespace {

MicroNet small_net(std::uint64_t seed, std::vector<std::size_t> widths = {5, 7, 6, 3}) {
    Rng rng = make_stream(seed, 1);
    return make_net(widths, rng);
}

Dataset small_data(std::uint64_t seed, std::size_t n = 40) {
    SyntheticConfig cfg;
    cfg.dim = 5;
    cfg.classes = 3;
    cfg.samples_per_device = n;
    cfg.test_samples = 10;
    Rng rng = make_stream(seed, 0);
    return make_synthetic(cfg, 1, rng).devices[0];
}

std::vector<DeviceTrainState> one_device(std::size_t split, std::uint64_t seed) {
    std::vector<DeviceTrainState> devs(1);
    devs[0].split = split;
    devs[0].data = small_data(seed);
    devs[0].rng = make_stream(seed, 100);
    return devs;
}

void expect_same_net(const MicroNet& a, const MicroNet& b) {
    ASSERT_EQ(a.num_layers(), b.num_layers());
    for (std::size_t l = 0; l < a.num_layers(); ++l) {
        EXPECT_EQ(a.layers[l].weights.data, b.layers[l].weights.data) << "layer " << l;
        EXPECT_EQ(a.layers[l].bias, b.layers[l].bias) << "layer " << l;
    }
}

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.num_devices = 3;
    cfg.iterations = 40;
    cfg.local_iters = 4;
    cfg.hidden = {12, 10};
    cfg.data.samples_per_device = 32;
    cfg.data.test_samples = 200;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST(Network, HeUniformInitWithinLimits) {
    const auto net = small_net(1);
    ASSERT_EQ(net.num_layers(), 3u);
    EXPECT_EQ(net.layers.back().activation, Activation::softmax);
    for (const auto& l : net.layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(l.in_dim()));
        for (double w : l.weights.data) EXPECT_LE(std::abs(w), limit);
        for (double b : l.bias) EXPECT_EQ(b, 0.0);
    }
}

TEST(Loss, UniformLogitsGiveLogClasses) {
    Matrix logits(2, 4);
    Matrix grad;
    const std::vector<int> labels = {0, 3};
    EXPECT_NEAR(softmax_cross_entropy(logits, labels, &grad), std::log(4.0), 1e-15);
    EXPECT_NEAR(grad(0, 0), (0.25 - 1.0) / 2.0, 1e-15);
    EXPECT_NEAR(grad(0, 1), 0.25 / 2.0, 1e-15);
}

TEST(Sgd, ZeroLearningRateLeavesParametersUnchanged) {
    auto devs = one_device(1, 3);
    const auto global = small_net(3);
    auto server = split_model(global, devs);
    const auto first = sfl_iteration(devs, server, 0.0, 8);
    expect_same_net(device_model(devs[0], server, 0), global);
    // Same batch again gives the same loss.
    auto devs2 = one_device(1, 3);
    auto server2 = split_model(global, devs2);
    EXPECT_EQ(sfl_iteration(devs2, server2, 0.0, 8), first);
}

TEST(Split, OneIterationEqualsUnsplitBackprop) {
    const auto global = small_net(7);
    for (std::size_t split = 0; split <= global.num_layers(); ++split) {
        auto devs = one_device(split, 7);
        auto server = split_model(global, devs);
        sfl_iteration(devs, server, 0.1, 8);

        // Unsplit: same batch drawn from a fresh copy of the device stream.
        Rng rng = make_stream(7, 100);
        const auto batch = sample_batch(small_data(7), 8, rng);
        auto whole = global;
        const auto cache = forward(whole.layers, batch.x);
        Matrix grad;
        softmax_cross_entropy(cache.output, batch.labels, &grad);
        std::vector<LayerGrad> grads;
        backward(whole.layers, cache, grad, grads);
        apply_sgd(whole.layers, grads, 0.1);
        expect_same_net(device_model(devs[0], server, 0), whole);
    }
}

TEST(Split, BoundaryGradientMatchesFiniteDifferences) {
    // 3-layer net split after layer 1: the server's gradient w.r.t. the
    // intermediate result must match central differences of the loss.
    const auto net = small_net(11, {5, 6, 6, 3});
    Rng rng = make_stream(11, 100);
    const auto batch = sample_batch(small_data(11), 4, rng);
    const std::span<const DenseLayer> front(net.layers.data(), 1);
    const std::span<const DenseLayer> back(net.layers.data() + 1, 2);
    const auto boundary = forward(front, batch.x).output;

    const auto cache = forward(back, boundary);
    Matrix grad_logits;
    softmax_cross_entropy(cache.output, batch.labels, &grad_logits);
    std::vector<LayerGrad> grads;
    const auto analytic = backward(back, cache, grad_logits, grads);

    const double h = 1e-5;
    double max_err = 0.0, max_ref = 0.0;
    for (std::size_t j = 0; j < boundary.data.size(); ++j) {
        auto plus = boundary, minus = boundary;
        plus.data[j] += h;
        minus.data[j] -= h;
        const double fp = softmax_cross_entropy(forward(back, plus).output, batch.labels, nullptr);
        const double fm = softmax_cross_entropy(forward(back, minus).output, batch.labels, nullptr);
        const double fd = (fp - fm) / (2.0 * h);
        max_err = std::max(max_err, std::abs(fd - analytic.data[j]));
        max_ref = std::max(max_ref, std::abs(fd));
    }
    ASSERT_GT(max_ref, 0.0);
    EXPECT_LT(max_err, 1e-4 * max_ref);
}

TEST(Aggregate, MeanOfTwoBackEnds) {
    auto global = small_net(2, {3, 4, 2});
    std::vector<DeviceTrainState> devs(2);
    devs[0].split = devs[1].split = 1;
    auto server = split_model(global, devs);
    for (auto& v : server.back[0][0].weights.data) v = 1.0;
    for (auto& v : server.back[1][0].weights.data) v = 3.0;
    const auto fronts = std::vector{devs[0].front, devs[1].front};
    aggregate_common(server, devs);
    for (std::size_t d = 0; d < 2; ++d) {
        for (double v : server.back[d][0].weights.data) EXPECT_EQ(v, 2.0);
        EXPECT_EQ(server.back[d][0].weights.rows, 2u);
        EXPECT_EQ(server.back[d][0].weights.cols, 4u);
    }
    // Device-side layers are untouched.
    for (std::size_t d = 0; d < 2; ++d) EXPECT_EQ(devs[d].front[0].weights.data, fronts[d][0].weights.data);
}

TEST(Aggregate, IdenticalBackEndsAreAFixedPoint) {
    const auto global = small_net(4);
    std::vector<DeviceTrainState> devs(3);
    for (auto& d : devs) d.split = 1;
    auto server = split_model(global, devs);
    const auto before = server.back;
    aggregate_common(server, devs);
    // (x + x + x) / 3 can round by an ulp, so compare to double precision.
    for (std::size_t d = 0; d < 3; ++d) {
        for (std::size_t l = 0; l < before[d].size(); ++l) {
            for (std::size_t j = 0; j < before[d][l].weights.data.size(); ++j) {
                EXPECT_DOUBLE_EQ(server.back[d][l].weights.data[j], before[d][l].weights.data[j]);
            }
        }
    }
}

TEST(Aggregate, MixedSplitsOnlyTouchCommonLayers) {
    const auto global = small_net(5);  // 3 layers
    std::vector<DeviceTrainState> devs(2);
    devs[0].split = 0;
    devs[1].split = 2;
    auto server = split_model(global, devs);
    EXPECT_EQ(server.boundary(devs), 2u);
    for (auto& v : server.back[0][0].weights.data) v = 5.0;   // layer 0 on device 1's server copy
    for (auto& v : server.back[0][2].weights.data) v = 1.0;   // layer 2
    for (auto& v : server.back[1][0].weights.data) v = 3.0;   // layer 2 for device 2
    aggregate_common(server, devs);
    for (double v : server.back[0][0].weights.data) EXPECT_EQ(v, 5.0);
    for (double v : server.back[0][2].weights.data) EXPECT_EQ(v, 2.0);
    for (double v : server.back[1][0].weights.data) EXPECT_EQ(v, 2.0);
}

TEST(Train, SingleDeviceIsCentralizedSgd) {
    auto cfg = quick_config();
    cfg.num_devices = 1;
    const std::size_t layers = cfg.hidden.size() + 1;
    for (std::size_t split = 0; split <= layers; ++split) {
        cfg.splits = {split};
        const auto got = train(cfg);
        const auto ref = reference::fedavg(cfg);
        ASSERT_EQ(got.metrics.size(), ref.loss.size());
        std::size_t a = 0;
        for (std::size_t t = 0; t < ref.loss.size(); ++t) {
            ASSERT_EQ(got.metrics[t].loss, ref.loss[t]) << "split " << split << " iteration " << t + 1;
            if (got.metrics[t].accuracy) ASSERT_EQ(*got.metrics[t].accuracy, ref.accuracy[a++]);
        }
    }
}

TEST(Train, SplitZeroIsFedAvg) {
    for (auto partition : {Partition::iid, Partition::dirichlet}) {
        auto cfg = quick_config();
        cfg.splits = {0};
        cfg.data.partition = partition;
        const auto got = train(cfg);
        const auto ref = reference::fedavg(cfg);
        ASSERT_EQ(got.metrics.size(), ref.loss.size());
        std::size_t a = 0;
        for (std::size_t t = 0; t < ref.loss.size(); ++t) {
            ASSERT_EQ(got.metrics[t].loss, ref.loss[t]) << "iteration " << t + 1;
            if (got.metrics[t].accuracy) ASSERT_EQ(*got.metrics[t].accuracy, ref.accuracy[a++]);
        }
        EXPECT_EQ(a, ref.accuracy.size());
    }
}

TEST(Train, DeterministicAndLearns) {
    auto cfg = quick_config();
    cfg.iterations = 200;
    cfg.splits = {1};
    const auto a = train(cfg), b = train(cfg);
    ASSERT_EQ(a.metrics.size(), b.metrics.size());
    for (std::size_t t = 0; t < a.metrics.size(); ++t) EXPECT_EQ(a.metrics[t].loss, b.metrics[t].loss);
    EXPECT_GT(a.final_accuracy, 0.5);
    EXPECT_EQ(a.metrics.back().model_time_s, 200.0);
}

TEST(Train, DivergenceNamesIteration) {
    auto cfg = quick_config();
    cfg.learning_rate = 1e200;
    try {
        train(cfg);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
    }
}

TEST(Train, RejectsBadConfig) {
    auto cfg = quick_config();
    cfg.splits = {9};
    EXPECT_THROW(train(cfg), ConfigError);
    cfg.splits = {1, 2};
    EXPECT_THROW(train(cfg), ConfigError);
    cfg = quick_config();
    cfg.local_iters = 0;
    EXPECT_THROW(train(cfg), ConfigError);
}

TEST(Synthetic, DirichletSkewsLabels) {
    SyntheticConfig cfg;
    cfg.samples_per_device = 400;
    cfg.partition = Partition::dirichlet;
    cfg.dirichlet_alpha = 0.1;
    Rng rng = make_stream(3, 0);
    const auto fed = make_synthetic(cfg, 6, rng);
    double max_share = 0.0;
    for (const auto& d : fed.devices) {
        std::vector<double> counts(cfg.classes, 0.0);
        for (int y : d.labels) counts[static_cast<std::size_t>(y)] += 1.0;
        max_share += *std::max_element(counts.begin(), counts.end()) / 400.0;
    }
    // Uniform labels would put about 0.25 of a device's data in its top class.
    EXPECT_GT(max_share / 6.0, 0.6);
}

TEST(Csv, MetricsLeaveAccuracyBlankBetweenAggregations) {
    auto cfg = quick_config();
    cfg.iterations = 8;
    std::ostringstream out;
    write_metrics_csv(out, train(cfg), "sfl");
    std::istringstream lines(out.str());
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    EXPECT_EQ(header, "iteration,model_time_s,loss,accuracy,scheme,splits");
    EXPECT_NE(first.find(",,sfl,1;1;1"), std::string::npos);
}
