#include "robustgen/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "robustgen/errors.hpp"

namespace robustgen::nn {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json layer_to_json(const Layer& l) {
    json j;
    j["kind"] = l.spec.kind == LayerKind::dense ? "dense" : "conv2d";
    j["fan_in"] = l.spec.fan_in;
    j["fan_out"] = l.spec.fan_out;
    j["kernel_size"] = l.spec.kernel_size;
    j["has_bias"] = l.spec.has_bias;
    j["weights"] = l.weights.data;
    j["bias"] = l.bias.data;
    return j;
}

Layer layer_from_json(const json& j) {
    Layer l;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "dense")
        l.spec.kind = LayerKind::dense;
    else if (kind == "conv2d")
        l.spec.kind = LayerKind::conv2d;
    else
        throw ParseError("unknown layer kind '" + kind + "'");
    l.spec.fan_in = j.at("fan_in").get<std::size_t>();
    l.spec.fan_out = j.at("fan_out").get<std::size_t>();
    l.spec.kernel_size = j.at("kernel_size").get<std::size_t>();
    l.spec.has_bias = j.at("has_bias").get<bool>();
    auto wdata = j.at("weights").get<std::vector<double>>();
    if (l.spec.kind == LayerKind::dense) {
        l.weights = Tensor({l.spec.fan_out, l.spec.fan_in}, std::move(wdata));
    } else {
        l.weights = Tensor(
            {l.spec.fan_out, l.spec.fan_in, l.spec.kernel_size, l.spec.kernel_size},
            std::move(wdata));
    }
    auto bdata = j.at("bias").get<std::vector<double>>();
    if (l.spec.has_bias)
        l.bias = Tensor({l.spec.fan_out}, std::move(bdata));
    else if (!bdata.empty())
        throw ParseError("bias data on a bias-free layer");
    return l;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    ck.net.validate();
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "checkpoint";
    j["config_id"] = ck.config_id;
    j["seed"] = ck.seed;
    j["input_height"] = ck.net.input_height;
    j["input_width"] = ck.net.input_width;
    json layers = json::array(), init = json::array();
    for (const auto& l : ck.net.layers) layers.push_back(layer_to_json(l));
    for (const auto& l : ck.net.init_layers) init.push_back(layer_to_json(l));
    j["layers"] = std::move(layers);
    j["init_layers"] = std::move(init);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestionError("cannot open checkpoint for writing: " + path);
    out << j.dump() << '\n';
    if (!out) throw IngestionError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open checkpoint: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("corrupt checkpoint " + path + ": " + e.what(),
                         static_cast<long long>(e.byte));
    }
    Checkpoint ck;
    try {
        ck.format_version = j.at("format_version").get<int>();
        if (ck.format_version != kFormatVersion)
            throw VersionError("checkpoint format_version " +
                               std::to_string(ck.format_version) + " is not supported");
        ck.config_id = j.at("config_id").get<std::string>();
        ck.seed = j.at("seed").get<std::uint64_t>();
        ck.net.input_height = j.at("input_height").get<std::size_t>();
        ck.net.input_width = j.at("input_width").get<std::size_t>();
        for (const auto& lj : j.at("layers")) ck.net.layers.push_back(layer_from_json(lj));
        for (const auto& lj : j.at("init_layers"))
            ck.net.init_layers.push_back(layer_from_json(lj));
    } catch (const json::exception& e) {
        throw ParseError("malformed checkpoint " + path + ": " + e.what());
    }
    ck.net.validate();
    return ck;
}

}  // namespace robustgen::nn
