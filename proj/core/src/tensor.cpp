#include "weightguard/tensor.hpp"

#include "weightguard/common.hpp"

#include <cmath>

namespace wg {

WeightMatrix make_weight_matrix(std::string name, int64_t rows, int64_t cols,
                                std::vector<float> values) {
    check(rows >= 1 && cols >= 1,
          "tensor '" + name + "': dimensions must be positive");
    check(static_cast<int64_t>(values.size()) == rows * cols,
          "tensor '" + name + "': value count does not match shape");
    WeightMatrix w{std::move(name), rows, cols, std::move(values)};
    validate_finite(w);
    return w;
}

void validate_finite(const WeightMatrix& w) {
    for (float v : w.values) {
        check(std::isfinite(v),
              "tensor '" + w.name + "': non-finite value");
    }
}

double mse(std::span<const float> a, std::span<const float> b) {
    check(a.size() == b.size(), "mse: shape mismatch");
    check(!a.empty(), "mse: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

double mse(const WeightMatrix& a, const WeightMatrix& b) {
    check(a.rows == b.rows && a.cols == b.cols, "mse: shape mismatch");
    return mse(std::span<const float>(a.values),
               std::span<const float>(b.values));
}

double sample_std(std::span<const float> values) {
    check(values.size() >= 2, "sample_std: need at least two values");
    double mean = 0.0;
    for (float v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (float v : values) {
        const double d = v - mean;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double frobenius_norm(std::span<const float> values) {
    double acc = 0.0;
    for (float v : values) {
        acc += static_cast<double>(v) * static_cast<double>(v);
    }
    return std::sqrt(acc);
}

MatrixXdRM to_eigen(const WeightMatrix& w) {
    MatrixXdRM m(w.rows, w.cols);
    for (int64_t i = 0; i < w.size(); ++i) {
        m.data()[i] = w.values[i];
    }
    return m;
}

WeightMatrix from_eigen(std::string name, const Eigen::MatrixXd& m) {
    std::vector<float> values(static_cast<size_t>(m.rows() * m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            values[r * m.cols() + c] = static_cast<float>(m(r, c));
        }
    }
    return make_weight_matrix(std::move(name), m.rows(), m.cols(),
                              std::move(values));
}

} // namespace wg
