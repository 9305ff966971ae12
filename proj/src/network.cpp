#include "robustgen/network.hpp"

#include <cassert>
#include <cmath>

#include "robustgen/errors.hpp"
#include "robustgen/rng.hpp"

namespace robustgen::nn {

namespace {

std::size_t layer_input_dim(const Layer& l, std::size_t h, std::size_t w) {
    return l.spec.kind == LayerKind::dense ? l.spec.fan_in : l.spec.fan_in * h * w;
}

std::size_t layer_output_dim(const Layer& l, std::size_t h, std::size_t w) {
    return l.spec.kind == LayerKind::dense ? l.spec.fan_out : l.spec.fan_out * h * w;
}

void check_layer_shapes(const Layer& l, std::size_t index) {
    const auto& s = l.spec;
    if (s.fan_in == 0 || s.fan_out == 0)
        throw DimensionError("layer " + std::to_string(index) + " has zero fan");
    if (s.kind == LayerKind::dense) {
        if (l.weights.shape != std::vector<std::size_t>{s.fan_out, s.fan_in})
            throw DimensionError("dense weight shape mismatch at layer " + std::to_string(index));
    } else {
        if (s.kernel_size == 0 || s.kernel_size % 2 == 0)
            throw DimensionError("conv kernel size must be odd, layer " + std::to_string(index));
        if (l.weights.shape !=
            std::vector<std::size_t>{s.fan_out, s.fan_in, s.kernel_size, s.kernel_size})
            throw DimensionError("conv weight shape mismatch at layer " + std::to_string(index));
    }
    if (s.has_bias) {
        if (l.bias.shape != std::vector<std::size_t>{s.fan_out})
            throw DimensionError("bias shape mismatch at layer " + std::to_string(index));
    } else if (l.bias.size() != 0) {
        throw DimensionError("unexpected bias at layer " + std::to_string(index));
    }
}

// One example through one layer. Input/output are raw activation buffers.
void apply_layer(const Layer& l, const double* in, double* out, std::size_t h, std::size_t w) {
    const auto& s = l.spec;
    if (s.kind == LayerKind::dense) {
        const double* W = l.weights.data.data();
        for (std::size_t j = 0; j < s.fan_out; ++j) {
            const double* row = W + j * s.fan_in;
            double acc = s.has_bias ? l.bias.data[j] : 0.0;
            for (std::size_t k = 0; k < s.fan_in; ++k) acc += row[k] * in[k];
            out[j] = acc;
        }
        return;
    }
    // conv2d, stride 1, zero padding (k-1)/2: spatial extent is preserved.
    const std::size_t k = s.kernel_size;
    const std::size_t pad = (k - 1) / 2;
    const double* W = l.weights.data.data();
    for (std::size_t o = 0; o < s.fan_out; ++o) {
        const double b = s.has_bias ? l.bias.data[o] : 0.0;
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                double acc = b;
                for (std::size_t c = 0; c < s.fan_in; ++c) {
                    const double* Wk = W + ((o * s.fan_in + c) * k * k);
                    const double* plane = in + c * h * w;
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        const long yy = static_cast<long>(y + ky) - static_cast<long>(pad);
                        if (yy < 0 || yy >= static_cast<long>(h)) continue;
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            const long xx = static_cast<long>(x + kx) - static_cast<long>(pad);
                            if (xx < 0 || xx >= static_cast<long>(w)) continue;
                            acc += Wk[ky * k + kx] * plane[yy * w + xx];
                        }
                    }
                }
                out[(o * h + y) * w + x] = acc;
            }
        }
    }
}

}  // namespace

void Network::validate() const {
    if (layers.empty()) throw DimensionError("network has no layers");
    if (init_layers.size() != layers.size())
        throw DimensionError("init snapshot out of step with layers");
    const LayerKind kind = layers.front().spec.kind;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        check_layer_shapes(layers[i], i);
        check_layer_shapes(init_layers[i], i);
        if (layers[i].spec.kind != kind)
            throw DimensionError("mixed dense/conv stacks are not supported");
        if (init_layers[i].weights.shape != layers[i].weights.shape ||
            init_layers[i].bias.shape != layers[i].bias.shape)
            throw DimensionError("init snapshot shape mismatch at layer " + std::to_string(i));
        if (i + 1 < layers.size() && layers[i + 1].spec.fan_in != layers[i].spec.fan_out)
            throw DimensionError("fan chaining broken between layers " + std::to_string(i) +
                                 " and " + std::to_string(i + 1));
        layers[i].weights.require_finite("layer weights");
        layers[i].bias.require_finite("layer bias");
    }
    if (kind == LayerKind::conv2d && (input_height == 0 || input_width == 0))
        throw DimensionError("conv stack needs a spatial input extent");
}

Tensor forward(const Network& net, const Tensor& inputs) {
    if (net.layers.empty()) throw DimensionError("forward through empty network");
    if (inputs.rank() != 2) throw DimensionError("forward expects a [n, d] batch");
    const std::size_t h = net.input_height, w = net.input_width;
    const std::size_t in_dim = layer_input_dim(net.layers.front(), h, w);
    const std::size_t out_dim = layer_output_dim(net.layers.back(), h, w);
    if (inputs.dim(1) != in_dim)
        throw DimensionError("input dimension does not match the first layer");

    const std::size_t n = inputs.dim(0);
    Tensor out({n, out_dim});
    std::size_t widest = 0;
    for (const auto& l : net.layers)
        widest = std::max({widest, layer_input_dim(l, h, w), layer_output_dim(l, h, w)});
    std::vector<double> buf_a(widest), buf_b(widest);

    for (std::size_t i = 0; i < n; ++i) {
        double* cur = buf_a.data();
        double* nxt = buf_b.data();
        const double* src = inputs.data.data() + i * in_dim;
        for (std::size_t k = 0; k < in_dim; ++k) cur[k] = src[k];
        for (std::size_t li = 0; li < net.layers.size(); ++li) {
            const Layer& l = net.layers[li];
            apply_layer(l, cur, nxt, h, w);
            const std::size_t od = layer_output_dim(l, h, w);
            if (li + 1 < net.layers.size())
                for (std::size_t j = 0; j < od; ++j) nxt[j] = nxt[j] > 0.0 ? nxt[j] : 0.0;
            std::swap(cur, nxt);
        }
        for (std::size_t j = 0; j < out_dim; ++j) out.data[i * out_dim + j] = cur[j];
    }
    return out;
}

Tensor forward_squared_ones(const Network& net) {
    Network sq;
    sq.input_height = net.input_height;
    sq.input_width = net.input_width;
    sq.layers = net.layers;
    for (auto& l : sq.layers) {
        for (double& v : l.weights.data) v *= v;
        for (double& v : l.bias.data) v *= v;
    }
    sq.init_layers = sq.layers;
    const std::size_t in_dim =
        layer_input_dim(sq.layers.front(), sq.input_height, sq.input_width);
    Tensor ones({1, in_dim}, 1.0);
    Tensor out = forward(sq, ones);
    return Tensor::vec(std::move(out.data));
}

Network perturb(const Network& net, double sigma, PerturbMode mode, double epsilon,
                std::uint64_t seed) {
    if (sigma < 0.0) throw DimensionError("negative perturbation scale");
    Network p = net;
    Rng rng(seed);
    auto jiggle = [&](double& v) {
        const double z = rng.normal();
        if (mode == PerturbMode::isotropic) {
            v += sigma * z;
        } else {
            v += std::sqrt(sigma * sigma * v * v + epsilon * epsilon) * z;
        }
    };
    for (auto& l : p.layers) {
        for (double& v : l.weights.data) jiggle(v);
        for (double& v : l.bias.data) jiggle(v);
    }
    return p;
}

std::size_t count_params(const Network& net) {
    std::size_t n = 0;
    for (const auto& l : net.layers) n += l.weights.size() + l.bias.size();
    return n;
}

Network make_dense_network(const std::vector<std::size_t>& dims, bool with_bias,
                           std::uint64_t seed) {
    if (dims.size() < 2) throw DimensionError("network needs at least input and output dims");
    Network net;
    Rng rng(seed);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        l.spec = LayerSpec{LayerKind::dense, dims[i], dims[i + 1], 0, with_bias};
        l.weights = Tensor({dims[i + 1], dims[i]});
        const double std_dev = std::sqrt(2.0 / static_cast<double>(dims[i]));
        for (double& v : l.weights.data) v = std_dev * rng.normal();
        if (with_bias) l.bias = Tensor({dims[i + 1]}, 0.0);
        net.layers.push_back(std::move(l));
    }
    net.init_layers = net.layers;
    net.validate();
    return net;
}

std::vector<double> flatten_params(const Network& net) {
    std::vector<double> out;
    for (const auto& l : net.layers) {
        out.insert(out.end(), l.weights.data.begin(), l.weights.data.end());
        out.insert(out.end(), l.bias.data.begin(), l.bias.data.end());
    }
    return out;
}

std::vector<double> flatten_init_params(const Network& net) {
    std::vector<double> out;
    for (const auto& l : net.init_layers) {
        out.insert(out.end(), l.weights.data.begin(), l.weights.data.end());
        out.insert(out.end(), l.bias.data.begin(), l.bias.data.end());
    }
    return out;
}

}  // namespace robustgen::nn
