#pragma once

#include "sfl/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sfl::micro {

// Row-major dense matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

// softmax is only valid on the last layer; it is fused with the
// cross-entropy loss, so the layer itself emits logits.
enum class Activation { relu, identity, softmax };

struct DenseLayer {
    Matrix weights;               // out x in
    std::vector<double> bias;     // out
    Activation activation = Activation::relu;

    std::size_t in_dim() const { return weights.cols; }
    std::size_t out_dim() const { return weights.rows; }
};

struct MicroNet {
    std::vector<DenseLayer> layers;
    std::size_t num_layers() const { return layers.size(); }
};

// Dense net with ReLU hidden layers and a softmax output; He-uniform init.
MicroNet make_net(std::span<const std::size_t> widths, Rng& rng);

struct Dataset {
    Matrix x;
    std::vector<int> labels;
    std::size_t size() const { return labels.size(); }
};

struct Batch {
    Matrix x;
    std::vector<int> labels;
};

// Activations cached by a forward pass over a contiguous run of layers.
struct ForwardCache {
    std::vector<Matrix> inputs;        // input to each layer
    std::vector<Matrix> pre_activation;
    Matrix output;
};

struct LayerGrad {
    Matrix weights;
    std::vector<double> bias;
};

ForwardCache forward(std::span<const DenseLayer> layers, const Matrix& input);
// Returns the gradient w.r.t. the run's input; fills per-layer gradients.
Matrix backward(std::span<const DenseLayer> layers, const ForwardCache& cache, const Matrix& grad_output,
                std::vector<LayerGrad>& grads);
void apply_sgd(std::span<DenseLayer> layers, std::span<const LayerGrad> grads, double learning_rate);

// Mean softmax cross-entropy and its gradient w.r.t. the logits.
double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad_logits);
double accuracy(const MicroNet& net, const Dataset& data);

// Device side: layers [0, split) of its model plus local data.
struct DeviceTrainState {
    std::size_t split = 0;
    std::vector<DenseLayer> front;
    Dataset data;
    Rng rng;
};

// Server side: one back-end sub-model per device, layers [split_k, L).
struct ServerTrainState {
    std::vector<std::vector<DenseLayer>> back;
    std::size_t num_layers = 0;

    // Layers at or above this index are common to every back-end.
    std::size_t boundary(std::span<const DeviceTrainState> devices) const;
};

// Splits `global` for each device at its split point (0..L). Each device
// starts from the same global model.
ServerTrainState split_model(const MicroNet& global, std::span<DeviceTrainState> devices);

// Device k's full model: its front followed by its server-side back-end.
MicroNet device_model(const DeviceTrainState& device, const ServerTrainState& server, std::size_t k);

Batch sample_batch(const Dataset& data, std::size_t batch_size, Rng& rng);

// One split iteration on every device: device forward, server forward and
// backward (boundary gradient returned to the device), SGD on both sides.
// Returns each device's loss on its batch.
std::vector<double> sfl_iteration(std::span<DeviceTrainState> devices, ServerTrainState& server,
                                  double learning_rate, std::size_t batch_size);

// Replaces every layer from the common boundary up with the uniform mean
// across devices, summed in device order.
void aggregate_common(ServerTrainState& server, std::span<const DeviceTrainState> devices);

enum class Partition { iid, dirichlet };

struct SyntheticConfig {
    std::size_t dim = 8;
    std::size_t classes = 4;
    double separation = 2.0;           // std-dev of class means
    double noise = 1.0;                // std-dev around each mean
    std::size_t samples_per_device = 64;
    std::size_t test_samples = 1000;
    Partition partition = Partition::iid;
    double dirichlet_alpha = 0.3;
};

struct FederatedData {
    std::vector<Dataset> devices;
    Dataset test;
};

FederatedData make_synthetic(const SyntheticConfig& cfg, std::size_t num_devices, Rng& rng);

struct TrainConfig {
    std::size_t num_devices = 4;
    std::vector<std::size_t> splits = {1};    // one per device, or one value for all
    std::vector<std::size_t> hidden = {16, 16, 16};
    std::size_t local_iters = 5;              // aggregate every E iterations
    std::size_t iterations = 200;             // T
    std::size_t batch_size = 8;
    double learning_rate = 0.05;
    double iteration_seconds = 1.0;           // model time charged per iteration
    SyntheticConfig data;
    std::uint64_t seed = 1;
};

struct IterationMetrics {
    std::size_t iteration = 0;
    double model_time_s = 0.0;
    double loss = 0.0;
    std::optional<double> accuracy;           // evaluated after each aggregation
};

struct TrainResult {
    std::vector<IterationMetrics> metrics;
    double final_accuracy = 0.0;
    std::vector<std::size_t> splits;
};

void validate(const TrainConfig& cfg);
// Throws NumericalError naming the iteration at which the loss went non-finite.
TrainResult train(const TrainConfig& cfg);

void write_metrics_csv(std::ostream& out, const TrainResult& result, std::string_view scheme);

}  // namespace sfl::micro
