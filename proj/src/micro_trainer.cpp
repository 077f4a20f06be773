#include "sfl/micro_trainer.hpp"

#include "sfl/csv.hpp"
#include "sfl/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sfl::micro {

MicroNet make_net(std::span<const std::size_t> widths, Rng& rng) {
    if (widths.size() < 2) throw ConfigError("train.hidden: network needs an input and an output width");
    MicroNet net;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        DenseLayer layer;
        layer.weights = Matrix(widths[i + 1], widths[i]);
        layer.bias.assign(widths[i + 1], 0.0);
        layer.activation = i + 2 == widths.size() ? Activation::softmax : Activation::relu;
        const double limit = std::sqrt(6.0 / static_cast<double>(widths[i]));
        std::uniform_real_distribution<double> init(-limit, limit);
        for (auto& w : layer.weights.data) w = init(rng);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

ForwardCache forward(std::span<const DenseLayer> layers, const Matrix& input) {
    ForwardCache cache;
    Matrix current = input;
    for (const auto& layer : layers) {
        if (current.cols != layer.in_dim()) {
            throw ProtocolError(fmt::format("forward: input width {} does not match layer width {}", current.cols,
                                            layer.in_dim()));
        }
        Matrix pre(current.rows, layer.out_dim());
        for (std::size_t b = 0; b < current.rows; ++b) {
            const auto x = current.row(b);
            for (std::size_t o = 0; o < layer.out_dim(); ++o) {
                const auto w = layer.weights.row(o);
                double acc = layer.bias[o];
                for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i];
                pre(b, o) = acc;
            }
        }
        Matrix post = pre;
        if (layer.activation == Activation::relu) {
            for (auto& v : post.data) v = v > 0.0 ? v : 0.0;
        }
        cache.inputs.push_back(std::move(current));
        cache.pre_activation.push_back(std::move(pre));
        current = std::move(post);
    }
    cache.output = std::move(current);
    return cache;
}

Matrix backward(std::span<const DenseLayer> layers, const ForwardCache& cache, const Matrix& grad_output,
                std::vector<LayerGrad>& grads) {
    grads.assign(layers.size(), {});
    Matrix grad = grad_output;
    for (std::size_t li = layers.size(); li-- > 0;) {
        const auto& layer = layers[li];
        const auto& pre = cache.pre_activation[li];
        const auto& input = cache.inputs[li];
        if (grad.rows != pre.rows || grad.cols != pre.cols) {
            throw ProtocolError(fmt::format("backward: gradient shape {}x{} does not match activation {}x{}",
                                            grad.rows, grad.cols, pre.rows, pre.cols));
        }
        if (layer.activation == Activation::relu) {
            for (std::size_t j = 0; j < grad.data.size(); ++j) {
                if (!(pre.data[j] > 0.0)) grad.data[j] = 0.0;
            }
        }
        auto& g = grads[li];
        g.weights = Matrix(layer.out_dim(), layer.in_dim());
        g.bias.assign(layer.out_dim(), 0.0);
        Matrix grad_in(grad.rows, layer.in_dim());
        for (std::size_t b = 0; b < grad.rows; ++b) {
            const auto x = input.row(b);
            for (std::size_t o = 0; o < layer.out_dim(); ++o) {
                const double d = grad(b, o);
                g.bias[o] += d;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    g.weights(o, i) += d * x[i];
                    grad_in(b, i) += layer.weights(o, i) * d;
                }
            }
        }
        grad = std::move(grad_in);
    }
    return grad;
}

void apply_sgd(std::span<DenseLayer> layers, std::span<const LayerGrad> grads, double learning_rate) {
    for (std::size_t li = 0; li < layers.size(); ++li) {
        auto& w = layers[li].weights.data;
        const auto& gw = grads[li].weights.data;
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= learning_rate * gw[j];
        auto& b = layers[li].bias;
        for (std::size_t j = 0; j < b.size(); ++j) b[j] -= learning_rate * grads[li].bias[j];
    }
}

double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad_logits) {
    if (labels.size() != logits.rows) throw ProtocolError("softmax_cross_entropy: label count mismatch");
    const double inv_batch = 1.0 / static_cast<double>(logits.rows);
    if (grad_logits) *grad_logits = Matrix(logits.rows, logits.cols);
    double loss = 0.0;
    std::vector<double> probs(logits.cols);
    for (std::size_t b = 0; b < logits.rows; ++b) {
        const auto z = logits.row(b);
        const double peak = *std::max_element(z.begin(), z.end());
        double norm = 0.0;
        for (std::size_t c = 0; c < z.size(); ++c) {
            probs[c] = std::exp(z[c] - peak);
            norm += probs[c];
        }
        const auto label = static_cast<std::size_t>(labels[b]);
        loss -= (z[label] - peak - std::log(norm)) * inv_batch;
        if (grad_logits) {
            for (std::size_t c = 0; c < z.size(); ++c) {
                const double target = c == label ? 1.0 : 0.0;
                (*grad_logits)(b, c) = (probs[c] / norm - target) * inv_batch;
            }
        }
    }
    return loss;
}

namespace {

std::size_t correct_predictions(const MicroNet& net, const Dataset& data) {
    const auto out = forward(net.layers, data.x).output;
    std::size_t correct = 0;
    for (std::size_t b = 0; b < out.rows; ++b) {
        const auto z = out.row(b);
        const auto pred = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
        if (pred == data.labels[b]) ++correct;
    }
    return correct;
}

}  // namespace

double accuracy(const MicroNet& net, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    return static_cast<double>(correct_predictions(net, data)) / static_cast<double>(data.size());
}

std::size_t ServerTrainState::boundary(std::span<const DeviceTrainState> devices) const {
    std::size_t b = 0;
    for (const auto& d : devices) b = std::max(b, d.split);
    return b;
}

ServerTrainState split_model(const MicroNet& global, std::span<DeviceTrainState> devices) {
    ServerTrainState server;
    server.num_layers = global.num_layers();
    for (auto& dev : devices) {
        if (dev.split > global.num_layers()) {
            throw ConfigError(fmt::format("train.splits: split {} exceeds {} layers", dev.split, global.num_layers()));
        }
        const auto cut = global.layers.begin() + static_cast<std::ptrdiff_t>(dev.split);
        dev.front.assign(global.layers.begin(), cut);
        server.back.emplace_back(cut, global.layers.end());
    }
    return server;
}

MicroNet device_model(const DeviceTrainState& device, const ServerTrainState& server, std::size_t k) {
    MicroNet net;
    net.layers = device.front;
    net.layers.insert(net.layers.end(), server.back[k].begin(), server.back[k].end());
    return net;
}

Batch sample_batch(const Dataset& data, std::size_t batch_size, Rng& rng) {
    if (data.size() == 0) throw ConfigError("train.data: device has no samples");
    Batch batch;
    batch.x = Matrix(batch_size, data.x.cols);
    batch.labels.resize(batch_size);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    for (std::size_t b = 0; b < batch_size; ++b) {
        const auto idx = pick(rng);
        const auto src = data.x.row(idx);
        std::copy(src.begin(), src.end(), batch.x.data.begin() + static_cast<std::ptrdiff_t>(b * data.x.cols));
        batch.labels[b] = data.labels[idx];
    }
    return batch;
}

std::vector<double> sfl_iteration(std::span<DeviceTrainState> devices, ServerTrainState& server,
                                  double learning_rate, std::size_t batch_size) {
    if (server.back.size() != devices.size()) throw ProtocolError("sfl_iteration: server/device count mismatch");
    std::vector<double> losses(devices.size());
    std::vector<LayerGrad> front_grads;
    std::vector<LayerGrad> back_grads;
    for (std::size_t k = 0; k < devices.size(); ++k) {
        auto& dev = devices[k];
        auto& back = server.back[k];
        const auto batch = sample_batch(dev.data, batch_size, dev.rng);

        // Device: intermediate result A, sent with labels.
        const auto front_cache = forward(dev.front, batch.x);
        // Server: finish the forward pass, compute the loss, backpropagate to the cut.
        const auto back_cache = forward(back, front_cache.output);
        Matrix grad_logits;
        losses[k] = softmax_cross_entropy(back_cache.output, batch.labels, &grad_logits);
        const Matrix boundary_grad = backward(back, back_cache, grad_logits, back_grads);
        apply_sgd(back, back_grads, learning_rate);
        // Device: continue backpropagation from the returned boundary gradient G.
        backward(dev.front, front_cache, boundary_grad, front_grads);
        apply_sgd(dev.front, front_grads, learning_rate);
    }
    return losses;
}

void aggregate_common(ServerTrainState& server, std::span<const DeviceTrainState> devices) {
    if (devices.empty()) return;
    const auto boundary = server.boundary(devices);
    const double k = static_cast<double>(devices.size());
    for (std::size_t layer = boundary; layer < server.num_layers; ++layer) {
        auto& first = server.back[0][layer - devices[0].split];
        DenseLayer mean = first;
        std::fill(mean.weights.data.begin(), mean.weights.data.end(), 0.0);
        std::fill(mean.bias.begin(), mean.bias.end(), 0.0);
        for (std::size_t d = 0; d < devices.size(); ++d) {
            const auto& src = server.back[d][layer - devices[d].split];
            if (src.weights.rows != mean.weights.rows || src.weights.cols != mean.weights.cols) {
                throw ProtocolError(fmt::format("aggregate_common: layer {} shape differs on device {}", layer, d + 1));
            }
            for (std::size_t j = 0; j < mean.weights.data.size(); ++j) mean.weights.data[j] += src.weights.data[j];
            for (std::size_t j = 0; j < mean.bias.size(); ++j) mean.bias[j] += src.bias[j];
        }
        for (auto& v : mean.weights.data) v /= k;
        for (auto& v : mean.bias) v /= k;
        for (std::size_t d = 0; d < devices.size(); ++d) server.back[d][layer - devices[d].split] = mean;
    }
}

FederatedData make_synthetic(const SyntheticConfig& cfg, std::size_t num_devices, Rng& rng) {
    if (cfg.classes < 2) throw ConfigError("train.classes: need at least 2 classes");
    if (cfg.dim < 1) throw ConfigError("train.dim: must be >= 1");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix means(cfg.classes, cfg.dim);
    for (auto& v : means.data) v = cfg.separation * gauss(rng);

    auto draw = [&](Dataset& ds, std::size_t row, int label) {
        for (std::size_t j = 0; j < cfg.dim; ++j) ds.x(row, j) = means(label, j) + cfg.noise * gauss(rng);
        ds.labels[row] = label;
    };

    FederatedData out;
    std::uniform_int_distribution<int> uniform_label(0, static_cast<int>(cfg.classes) - 1);
    for (std::size_t k = 0; k < num_devices; ++k) {
        Dataset ds;
        ds.x = Matrix(cfg.samples_per_device, cfg.dim);
        ds.labels.resize(cfg.samples_per_device);
        std::vector<double> mix(cfg.classes, 1.0);
        if (cfg.partition == Partition::dirichlet) {
            std::gamma_distribution<double> gamma(cfg.dirichlet_alpha, 1.0);
            for (auto& m : mix) m = gamma(rng);
            if (std::accumulate(mix.begin(), mix.end(), 0.0) <= 0.0) std::fill(mix.begin(), mix.end(), 1.0);
        }
        std::discrete_distribution<int> skewed(mix.begin(), mix.end());
        for (std::size_t i = 0; i < cfg.samples_per_device; ++i) {
            const int label = cfg.partition == Partition::dirichlet ? skewed(rng) : uniform_label(rng);
            draw(ds, i, label);
        }
        out.devices.push_back(std::move(ds));
    }
    out.test.x = Matrix(cfg.test_samples, cfg.dim);
    out.test.labels.resize(cfg.test_samples);
    for (std::size_t i = 0; i < cfg.test_samples; ++i) draw(out.test, i, uniform_label(rng));
    return out;
}

void validate(const TrainConfig& cfg) {
    if (cfg.num_devices < 1) throw ConfigError("train.num_devices: must be >= 1");
    if (cfg.splits.empty()) throw ConfigError("train.splits: at least one split point required");
    if (cfg.splits.size() != 1 && cfg.splits.size() != cfg.num_devices) {
        throw ConfigError(fmt::format("train.splits: expected 1 or {} entries, got {}", cfg.num_devices,
                                      cfg.splits.size()));
    }
    const auto layers = cfg.hidden.size() + 1;
    for (auto s : cfg.splits) {
        if (s > layers) throw ConfigError(fmt::format("train.splits: split {} exceeds {} layers", s, layers));
    }
    if (cfg.local_iters < 1) throw ConfigError("train.local_iters: must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("train.batch_size: must be >= 1");
    if (!(cfg.learning_rate >= 0.0)) throw ConfigError("train.learning_rate: must be >= 0");
    if (cfg.data.samples_per_device < 1) throw ConfigError("train.samples_per_device: must be >= 1");
    if (cfg.data.partition == Partition::dirichlet && !(cfg.data.dirichlet_alpha > 0.0)) {
        throw ConfigError("train.dirichlet_alpha: must be > 0");
    }
}

TrainResult train(const TrainConfig& cfg) {
    validate(cfg);
    auto data_rng = make_stream(cfg.seed, 0);
    auto init_rng = make_stream(cfg.seed, 1);
    auto data = make_synthetic(cfg.data, cfg.num_devices, data_rng);

    std::vector<std::size_t> widths{cfg.data.dim};
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(cfg.data.classes);
    const auto global = make_net(widths, init_rng);

    std::vector<DeviceTrainState> devices(cfg.num_devices);
    TrainResult result;
    for (std::size_t k = 0; k < cfg.num_devices; ++k) {
        devices[k].split = cfg.splits.size() == 1 ? cfg.splits[0] : cfg.splits[k];
        devices[k].data = std::move(data.devices[k]);
        devices[k].rng = make_stream(cfg.seed, 100 + k);
        result.splits.push_back(devices[k].split);
    }
    auto server = split_model(global, devices);

    // Pooled over devices as integer counts, so K identical models score
    // exactly what one of them scores alone.
    auto evaluate = [&] {
        if (data.test.size() == 0) return 0.0;
        std::size_t correct = 0;
        for (std::size_t k = 0; k < devices.size(); ++k) {
            correct += correct_predictions(device_model(devices[k], server, k), data.test);
        }
        return static_cast<double>(correct) / static_cast<double>(devices.size() * data.test.size());
    };

    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        const auto losses = sfl_iteration(devices, server, cfg.learning_rate, cfg.batch_size);
        const double loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
        if (!std::isfinite(loss)) throw NumericalError(fmt::format("train: loss diverged at iteration {}", t));
        IterationMetrics m;
        m.iteration = t;
        m.model_time_s = static_cast<double>(t) * cfg.iteration_seconds;
        m.loss = loss;
        if (t % cfg.local_iters == 0) {
            aggregate_common(server, devices);
            m.accuracy = evaluate();
        }
        result.metrics.push_back(m);
    }
    result.final_accuracy = result.metrics.empty() || !result.metrics.back().accuracy
                                ? evaluate()
                                : *result.metrics.back().accuracy;
    return result;
}

void write_metrics_csv(std::ostream& out, const TrainResult& result, std::string_view scheme) {
    CsvWriter csv(out);
    csv.header({"iteration", "model_time_s", "loss", "accuracy", "scheme", "splits"});
    const auto splits = join_indices(result.splits);
    for (const auto& m : result.metrics) {
        csv.cell(static_cast<std::uint64_t>(m.iteration)).cell(m.model_time_s).cell(m.loss);
        if (m.accuracy) {
            csv.cell(*m.accuracy);
        } else {
            csv.cell(std::string_view{});
        }
        csv.cell(scheme).cell(splits);
        csv.end_row();
    }
}

}  // namespace sfl::micro
