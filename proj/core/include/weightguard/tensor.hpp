#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wg {

using MatrixXdRM =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Named 2-D weight tensor, row-major float32 storage. All entries finite.
struct WeightMatrix {
    std::string name;
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<float> values; // rows * cols, row-major

    int64_t size() const { return rows * cols; }
    float& at(int64_t r, int64_t c) { return values[r * cols + c]; }
    float at(int64_t r, int64_t c) const { return values[r * cols + c]; }
};

// Validates shape/size consistency and finiteness; throws wg::Error naming
// the tensor on violation.
WeightMatrix make_weight_matrix(std::string name, int64_t rows, int64_t cols,
                                std::vector<float> values);

void validate_finite(const WeightMatrix& w);

// Mean squared error between two equal-shaped tensors, accumulated in double.
double mse(const WeightMatrix& a, const WeightMatrix& b);
double mse(std::span<const float> a, std::span<const float> b);

// Sample standard deviation (n-1 denominator).
double sample_std(std::span<const float> values);

double frobenius_norm(std::span<const float> values);

// Conversions for the double-precision linear algebra paths.
MatrixXdRM to_eigen(const WeightMatrix& w);
WeightMatrix from_eigen(std::string name, const Eigen::MatrixXd& m);

} // namespace wg
