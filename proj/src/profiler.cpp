#include "sfl/profiler.hpp"

#include "sfl/csv.hpp"
#include "sfl/errors.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

namespace sfl {

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv: return "conv";
        case LayerKind::fully_connected: return "fully_connected";
        case LayerKind::activation: return "activation";
        case LayerKind::pooling: return "pooling";
        case LayerKind::normalization: return "normalization";
    }
    return "unknown";
}

LayerKind parse_layer_kind(std::string_view text) {
    if (text == "conv") return LayerKind::conv;
    if (text == "fully_connected" || text == "fc") return LayerKind::fully_connected;
    if (text == "activation" || text == "relu") return LayerKind::activation;
    if (text == "pooling" || text == "pool") return LayerKind::pooling;
    if (text == "normalization" || text == "norm") return LayerKind::normalization;
    throw ConfigError(fmt::format("layers[].kind: unknown layer kind '{}'", text));
}

Macs layer_macs(const LayerSpec& layer, std::uint64_t batch_size, const CostFactors& cost) {
    switch (layer.kind) {
        case LayerKind::conv:
            return layer.kernel_h * layer.kernel_w * layer.in_channels * layer.out_h * layer.out_w *
                   layer.out_channels * batch_size;
        case LayerKind::fully_connected:
            return layer.in_channels * layer.out_channels * batch_size;
        case LayerKind::activation:
            return cost.activation * layer.output_elements() * batch_size;
        case LayerKind::pooling:
            return cost.pooling * layer.output_elements() * batch_size;
        case LayerKind::normalization:
            return cost.normalization * layer.output_elements() * batch_size;
    }
    return 0;
}

Bits intermediate_size_bits(const LayerSpec& layer, std::uint64_t batch_size, std::uint64_t element_bits) {
    return layer.output_elements() * batch_size * element_bits;
}

void validate(const NetworkArchitecture& arch) {
    if (arch.layers.empty()) throw ConfigError("layers: architecture has no layers");
    if (arch.batch_size == 0) throw ConfigError("batch_size: must be >= 1");
    if (arch.element_bits == 0) throw ConfigError("element_bits: must be >= 1");
    for (std::size_t i = 0; i < arch.layers.size(); ++i) {
        const auto& l = arch.layers[i];
        if (l.kernel_h == 0 || l.kernel_w == 0 || l.in_channels == 0 || l.out_channels == 0 || l.out_h == 0 ||
            l.out_w == 0) {
            throw ConfigError(fmt::format("layers[{}] ({}): all dimensions must be >= 1", i, l.name));
        }
        if (l.kind == LayerKind::fully_connected && (l.out_h != 1 || l.out_w != 1)) {
            throw ConfigError(fmt::format("layers[{}] ({}): fully connected output must be 1x1", i, l.name));
        }
        if (l.kind != LayerKind::conv && l.kind != LayerKind::fully_connected && l.in_channels != l.out_channels) {
            throw ConfigError(
                fmt::format("layers[{}] ({}): {} layer must keep its channel count", i, l.name, to_string(l.kind)));
        }
        if (i == 0) continue;
        const auto& prev = arch.layers[i - 1];
        const std::uint64_t expected =
            l.kind == LayerKind::fully_connected ? prev.output_elements() : prev.out_channels;
        if (l.in_channels != expected) {
            throw ConfigError(fmt::format("layers[{}] ({}): in_channels {} does not chain with previous output {}", i,
                                          l.name, l.in_channels, expected));
        }
    }
}

NetworkProfile profile(const NetworkArchitecture& arch) {
    NetworkProfile prof;
    const auto n = arch.layers.size();
    prof.layer_macs.reserve(n);
    prof.cumulative_macs.reserve(n);
    prof.data_size_bits.reserve(n);
    Macs running = 0;
    for (const auto& layer : arch.layers) {
        const Macs macs = layer_macs(layer, arch.batch_size, arch.cost);
        running += macs;
        prof.layer_macs.push_back(macs);
        prof.cumulative_macs.push_back(running);
        prof.data_size_bits.push_back(intermediate_size_bits(layer, arch.batch_size, arch.element_bits));
    }
    return prof;
}

std::uint64_t parameter_count(const NetworkArchitecture& arch) {
    std::uint64_t total = 0;
    for (const auto& l : arch.layers) {
        if (l.kind == LayerKind::conv) {
            total += l.kernel_h * l.kernel_w * l.in_channels * l.out_channels + l.out_channels;
        } else if (l.kind == LayerKind::fully_connected) {
            total += l.in_channels * l.out_channels + l.out_channels;
        }
    }
    return total;
}

namespace {

LayerSpec conv(std::string name, std::uint64_t k, std::uint64_t in, std::uint64_t out, std::uint64_t hw) {
    return {LayerKind::conv, std::move(name), k, k, in, out, hw, hw};
}

LayerSpec same_shape(LayerKind kind, std::string name, std::uint64_t channels, std::uint64_t hw) {
    return {kind, std::move(name), 1, 1, channels, channels, hw, hw};
}

LayerSpec fc(std::string name, std::uint64_t in, std::uint64_t out) {
    return {LayerKind::fully_connected, std::move(name), 1, 1, in, out, 1, 1};
}

// AlexNet on 224x224 RGB input with local response normalization after the
// first two convolutions; 5 conv + 3 fully connected, 20 layers in total.
NetworkArchitecture alexnet20() {
    using K = LayerKind;
    NetworkArchitecture arch;
    arch.name = "alexnet20";
    arch.layers = {
        conv("conv1", 11, 3, 64, 55),
        same_shape(K::activation, "relu1", 64, 55),
        same_shape(K::normalization, "norm1", 64, 55),
        same_shape(K::pooling, "pool1", 64, 27),
        conv("conv2", 5, 64, 192, 27),
        same_shape(K::activation, "relu2", 192, 27),
        same_shape(K::normalization, "norm2", 192, 27),
        same_shape(K::pooling, "pool2", 192, 13),
        conv("conv3", 3, 192, 384, 13),
        same_shape(K::activation, "relu3", 384, 13),
        conv("conv4", 3, 384, 256, 13),
        same_shape(K::activation, "relu4", 256, 13),
        conv("conv5", 3, 256, 256, 13),
        same_shape(K::activation, "relu5", 256, 13),
        same_shape(K::pooling, "pool5", 256, 6),
        fc("fc6", 256 * 6 * 6, 4096),
        same_shape(K::activation, "relu6", 4096, 1),
        fc("fc7", 4096, 4096),
        same_shape(K::activation, "relu7", 4096, 1),
        fc("fc8", 4096, 1000),
    };
    return arch;
}

// VGG16 (configuration D) on 224x224 input: 13 conv, 5 max-pool, 3 fully
// connected, ReLU after every conv and after fc6/fc7; 36 layers.
NetworkArchitecture vgg16() {
    using K = LayerKind;
    NetworkArchitecture arch;
    arch.name = "vgg16";
    struct Block {
        int convs;
        std::uint64_t channels;
        std::uint64_t hw;
    };
    const Block blocks[] = {{2, 64, 224}, {2, 128, 112}, {3, 256, 56}, {3, 512, 28}, {3, 512, 14}};
    std::uint64_t in = 3;
    int block_idx = 1;
    for (const auto& b : blocks) {
        for (int c = 1; c <= b.convs; ++c) {
            const auto suffix = fmt::format("{}_{}", block_idx, c);
            arch.layers.push_back(conv("conv" + suffix, 3, in, b.channels, b.hw));
            arch.layers.push_back(same_shape(K::activation, "relu" + suffix, b.channels, b.hw));
            in = b.channels;
        }
        arch.layers.push_back(same_shape(K::pooling, fmt::format("pool{}", block_idx), b.channels, b.hw / 2));
        ++block_idx;
    }
    arch.layers.push_back(fc("fc6", 512 * 7 * 7, 4096));
    arch.layers.push_back(same_shape(K::activation, "relu6", 4096, 1));
    arch.layers.push_back(fc("fc7", 4096, 4096));
    arch.layers.push_back(same_shape(K::activation, "relu7", 4096, 1));
    arch.layers.push_back(fc("fc8", 4096, 1000));
    return arch;
}

std::uint64_t read_dim(const YAML::Node& node, const std::string& field) {
    const auto value = node.as<long long>();
    if (value < 1) throw ConfigError(fmt::format("{}: must be >= 1", field));
    return static_cast<std::uint64_t>(value);
}

// Reads "key: N" or "key: [A, B]" into a pair of dims.
std::pair<std::uint64_t, std::uint64_t> read_pair(const YAML::Node& node, const std::string& field) {
    if (node.IsSequence()) {
        if (node.size() != 2) throw ConfigError(fmt::format("{}: expected [h, w]", field));
        return {read_dim(node[0], field), read_dim(node[1], field)};
    }
    const auto v = read_dim(node, field);
    return {v, v};
}

}  // namespace

NetworkArchitecture builtin_architecture(std::string_view name) {
    NetworkArchitecture arch;
    if (name == "alexnet20" || name == "alexnet") {
        arch = alexnet20();
    } else if (name == "vgg16") {
        arch = vgg16();
    } else {
        throw ConfigError(fmt::format("architecture: unknown built-in architecture '{}'", name));
    }
    validate(arch);
    return arch;
}

NetworkArchitecture parse_architecture(std::string_view yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(fmt::format("architecture: malformed YAML: {}", e.what()));
    }
    NetworkArchitecture arch;
    try {
        arch.name = root["name"] ? root["name"].as<std::string>() : "custom";
        if (root["batch_size"]) arch.batch_size = read_dim(root["batch_size"], "batch_size");
        if (root["element_bits"]) arch.element_bits = read_dim(root["element_bits"], "element_bits");
        if (const auto cost = root["cost_factors"]) {
            if (cost["activation"]) arch.cost.activation = cost["activation"].as<std::uint64_t>();
            if (cost["pooling"]) arch.cost.pooling = cost["pooling"].as<std::uint64_t>();
            if (cost["normalization"]) arch.cost.normalization = cost["normalization"].as<std::uint64_t>();
        }
        const auto layers = root["layers"];
        if (!layers || !layers.IsSequence()) throw ConfigError("layers: missing ordered layer list");
        std::size_t idx = 0;
        for (const auto& node : layers) {
            const auto field = fmt::format("layers[{}]", idx);
            if (!node["kind"]) throw ConfigError(field + ".kind: missing");
            LayerSpec layer;
            layer.kind = parse_layer_kind(node["kind"].as<std::string>());
            layer.name = node["name"] ? node["name"].as<std::string>() : fmt::format("layer{}", idx + 1);
            if (node["kernel"]) std::tie(layer.kernel_h, layer.kernel_w) = read_pair(node["kernel"], field + ".kernel");
            if (!node["out"]) throw ConfigError(field + ".out: missing");
            layer.out_channels = read_dim(node["out"], field + ".out");
            layer.in_channels = node["in"] ? read_dim(node["in"], field + ".in") : layer.out_channels;
            if (node["out_hw"]) std::tie(layer.out_h, layer.out_w) = read_pair(node["out_hw"], field + ".out_hw");
            arch.layers.push_back(std::move(layer));
            ++idx;
        }
    } catch (const YAML::Exception& e) {
        throw ConfigError(fmt::format("architecture: {}", e.what()));
    }
    validate(arch);
    return arch;
}

NetworkArchitecture load_architecture(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("architecture: cannot open file '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_architecture(buffer.str());
}

void write_profile_csv(std::ostream& out, const NetworkArchitecture& arch, const NetworkProfile& prof) {
    CsvWriter csv(out);
    csv.header({"layer", "name", "kind", "layer_macs", "cumulative_macs", "data_bits"});
    for (std::size_t i = 0; i < prof.num_layers(); ++i) {
        csv.cell(static_cast<std::uint64_t>(i + 1))
            .cell(arch.layers[i].name)
            .cell(to_string(arch.layers[i].kind))
            .cell(prof.layer_macs[i])
            .cell(prof.cumulative_macs[i])
            .cell(prof.data_size_bits[i]);
        csv.end_row();
    }
}

}  // namespace sfl
