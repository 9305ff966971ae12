#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustgen/tensor.hpp"

namespace robustgen::nn {

enum class LayerKind { dense, conv2d };

// Static description of one weight layer. For dense layers fan_in/fan_out are
// feature counts; for conv2d they are channel counts and kernel_size is the
// (odd) side of the square kernel. Convolutions run with stride 1 and zero
// padding (kernel_size - 1) / 2, so spatial extent is preserved.
struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    std::size_t kernel_size = 0;
    bool has_bias = true;
};

// Weight shapes: dense [fan_out, fan_in]; conv2d [fan_out, fan_in, k, k].
// bias is [fan_out] when spec.has_bias, otherwise an empty tensor.
struct Layer {
    LayerSpec spec;
    Tensor weights;
    Tensor bias;
};

// Feed-forward stack with ReLU between layers and identity at the output.
// depth() counts weight layers, not activations. init_layers snapshots every
// parameter at initialization time; distance-to-init quantities are computed
// against it, so it must stay aligned with `layers` at all times.
//
// Networks are homogeneous: all dense or all conv2d. Conv stacks carry the
// spatial extent of their input in input_height/input_width.
struct Network {
    std::vector<Layer> layers;
    std::vector<Layer> init_layers;
    std::size_t input_height = 1;
    std::size_t input_width = 1;

    std::size_t depth() const { return layers.size(); }
    // Throws DimensionError on shape mismatches, broken fan chaining
    // (fan_in of layer i+1 must equal fan_out of layer i), mixed layer kinds,
    // an init snapshot out of step with the layers, or non-finite entries.
    void validate() const;
};

enum class PerturbMode { isotropic, magnitude_aware };

// Batched forward pass. `inputs` is [n, d] where d is the flattened input
// dimension (fan_in for dense stacks, c_in * h * w for conv stacks). Returns
// logits [n, out_dim]. An empty batch yields an empty [0, out_dim] result.
Tensor forward(const Network& net, const Tensor& inputs);

// Runs the network with every weight and bias replaced by its square on an
// all-ones input, returning the output vector. With non-negative activations
// throughout, ReLU is the identity, so entry j aggregates over all paths into
// output j the product of squared weights along the path (plus the squared-
// bias paths when biases are present). This is the standard trick for
// evaluating path norms in one pass instead of enumerating paths.
Tensor forward_squared_ones(const Network& net);

// Adds independent Gaussian noise to every trainable parameter:
//   isotropic        w += sigma * z
//   magnitude_aware  w += sqrt(sigma^2 * w^2 + epsilon^2) * z
// with z ~ N(0,1) drawn from a stream seeded by `seed`. The init snapshot is
// carried over untouched. sigma must be >= 0.
Network perturb(const Network& net, double sigma, PerturbMode mode, double epsilon,
                std::uint64_t seed);

// Number of trainable parameters: weights plus biases.
std::size_t count_params(const Network& net);

// Dense ReLU stack with He-style fan-in init: weights ~ N(0, 2/fan_in),
// biases zero. dims = {input, hidden..., output}; depth = dims.size() - 1.
Network make_dense_network(const std::vector<std::size_t>& dims, bool with_bias,
                           std::uint64_t seed);

// All trainable parameters flattened in layer order, weights then bias.
std::vector<double> flatten_params(const Network& net);
std::vector<double> flatten_init_params(const Network& net);

}  // namespace robustgen::nn
