#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pathomics {

// Dense row-major tensor of 64-bit floats. Rank 1 and 2 cover the whole
// pipeline; scalars are shape {1}.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<double> d);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double value);
    static Tensor ones(std::vector<std::size_t> shape);
    static Tensor scalar(double value);
    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;
};

std::size_t shape_size(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

// Throws std::invalid_argument naming both shapes when they disagree.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace pathomics
