#include "driftbench/tensor.hpp"

#include <cmath>
#include <string>

#include "driftbench/errors.hpp"

namespace driftbench {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> values_)
    : shape(std::move(shape_)), values(std::move(values_)) {
    if (values.size() != shape_product(shape)) {
        throw DimensionError("Tensor: value count " + std::to_string(values.size()) +
                             " does not match shape product " +
                             std::to_string(shape_product(shape)));
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::vector<double> v(shape_product(shape), 0.0);
    return Tensor(std::move(shape), std::move(v));
}

void check_finite(const Tensor& t, const char* context) {
    for (double x : t.values) {
        if (!std::isfinite(x)) {
            throw Error(std::string(context) + ": tensor contains a non-finite value");
        }
    }
}

}  // namespace driftbench
