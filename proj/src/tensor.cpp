#include "robustgen/tensor.hpp"

#include <cmath>
#include <utility>

#include "robustgen/errors.hpp"

namespace robustgen::nn {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t p = 1;
    for (std::size_t d : shape) p *= d;
    return p;
}

Tensor::Tensor(std::vector<std::size_t> shape_, double fill)
    : shape(std::move(shape_)), data(shape_product(shape), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (shape_product(shape) != data.size())
        throw DimensionError("tensor data length does not match its shape");
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::vec(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

std::size_t Tensor::dim(std::size_t i) const {
    if (i >= shape.size()) throw DimensionError("tensor axis out of range");
    return shape[i];
}

double& Tensor::at(std::size_t r, std::size_t c) {
    return data[r * shape[1] + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    return data[r * shape[1] + c];
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::require_finite(const char* what) const {
    if (!all_finite()) throw DimensionError(std::string("non-finite values in ") + what);
}

}  // namespace robustgen::nn
