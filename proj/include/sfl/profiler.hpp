#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sfl {

using Macs = std::uint64_t;
using Bits = std::uint64_t;

enum class LayerKind { conv, fully_connected, activation, pooling, normalization };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view text);

// One layer of a feed-forward network. Spatial output is 1x1 for fully
// connected layers; kernel dims are only meaningful for conv.
struct LayerSpec {
    LayerKind kind = LayerKind::conv;
    std::string name;
    std::uint64_t kernel_h = 1;
    std::uint64_t kernel_w = 1;
    std::uint64_t in_channels = 1;
    std::uint64_t out_channels = 1;
    std::uint64_t out_h = 1;
    std::uint64_t out_w = 1;

    std::uint64_t output_elements() const { return out_h * out_w * out_channels; }
};

// MAC-equivalents charged per output element of the cheap layer kinds.
struct CostFactors {
    std::uint64_t activation = 1;
    std::uint64_t pooling = 1;
    std::uint64_t normalization = 1;
};

struct NetworkArchitecture {
    std::string name;
    std::vector<LayerSpec> layers;
    std::uint64_t batch_size = 1;
    std::uint64_t element_bits = 32;
    CostFactors cost;
};

// Per-layer profile; index i holds layer i+1 (split point ell = i+1).
struct NetworkProfile {
    std::vector<Macs> layer_macs;
    std::vector<Macs> cumulative_macs;
    std::vector<Bits> data_size_bits;

    std::size_t num_layers() const { return cumulative_macs.size(); }
    // 1-based accessors in split-point terms.
    Macs macs_at(std::size_t ell) const { return cumulative_macs.at(ell - 1); }
    Bits bits_at(std::size_t ell) const { return data_size_bits.at(ell - 1); }
};

Macs layer_macs(const LayerSpec& layer, std::uint64_t batch_size, const CostFactors& cost = {});
Bits intermediate_size_bits(const LayerSpec& layer, std::uint64_t batch_size, std::uint64_t element_bits);

// Throws ConfigError when a dimension is zero or channels do not chain.
// Chaining: a fully connected layer consumes the flattened output of its
// predecessor; every other kind consumes the predecessor's channels.
void validate(const NetworkArchitecture& arch);

NetworkProfile profile(const NetworkArchitecture& arch);

// Trainable parameter count (weights + biases); sizes the FedAvg upload.
std::uint64_t parameter_count(const NetworkArchitecture& arch);

NetworkArchitecture builtin_architecture(std::string_view name);

NetworkArchitecture load_architecture(const std::filesystem::path& path);
NetworkArchitecture parse_architecture(std::string_view yaml_text);

void write_profile_csv(std::ostream& out, const NetworkArchitecture& arch, const NetworkProfile& prof);

}  // namespace sfl
