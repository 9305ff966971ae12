#pragma once

#include <cstddef>
#include <vector>

namespace robustgen::nn {

// Dense row-major tensor of doubles. All arithmetic in this toolkit runs in
// 64-bit floats; there is no narrower storage anywhere.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape_, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape_, std::vector<double> data_);

    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    static Tensor vec(std::vector<double> values);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const;

    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;

    bool all_finite() const;
    // Throws DimensionError naming `what` if any entry is NaN or infinite.
    void require_finite(const char* what) const;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

}  // namespace robustgen::nn
