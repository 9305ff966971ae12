#pragma once

#include <cstdint>
#include <vector>

#include "robustgen/network.hpp"
#include "robustgen/tensor.hpp"

namespace robustgen::nn {

double frobenius_norm_sq(const Tensor& t);

// Frobenius norm squared of the elementwise difference a - b.
double frobenius_dist_sq(const Tensor& a, const Tensor& b);

struct SpectralOptions {
    // Contractual relative accuracy of the returned value.
    double tol = 1e-6;
    // Internal stop is much tighter than `tol` so that rescaling the layer by
    // a constant rescales the result to ~machine precision (the iteration is
    // scale-equivariant; a sloppy stop would let the iteration count differ
    // between a layer and its scaled copy).
    double internal_tol = 1e-12;
    int max_iterations = 10000;
    std::uint64_t start_seed = 0x5eed5eed5eed5eedull;
};

// Largest singular value of the layer's linear map (bias excluded; a bias is
// an affine offset, not part of the map). Dense layers use the weight matrix
// directly; conv layers use the induced operator on [fan_in, h, w] inputs.
// Power iteration on M^T M from a fixed seeded start vector. Throws
// ConvergenceError (with the partial estimate) if the iteration cap is hit
// before the estimate settles to SpectralOptions::tol.
double spectral_norm(const Layer& layer, std::size_t input_height = 1,
                     std::size_t input_width = 1, const SpectralOptions& opts = {});

// Explicit matrix M with M * vec(x) == linear_part(layer)(x) for all x,
// built by applying the layer map to basis vectors. Throws SizeError when
// either side of the map exceeds `cap`.
Tensor materialize_linear_map(const Layer& layer, std::size_t input_height = 1,
                              std::size_t input_width = 1, std::size_t cap = 4096);

}  // namespace robustgen::nn
