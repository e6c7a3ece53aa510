#pragma once

#include <cstddef>
#include <vector>

namespace driftbench {

// Dense row-major tensor of 64-bit reals. Every operation that returns a
// Tensor guarantees all values are finite.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shape_, std::vector<double> values_);

    static Tensor zeros(std::vector<std::size_t> shape);

    std::size_t size() const { return values.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    // 2-D element access, row-major.
    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

// Throws Error if any value is NaN or infinite.
void check_finite(const Tensor& t, const char* context);

}  // namespace driftbench
