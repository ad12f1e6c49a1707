#pragma once

#include "weightguard/sweep.hpp"
#include "weightguard/tensor.hpp"

#include <Eigen/Dense>

#include <vector>

namespace wg {

struct RowCovariance {
    Eigen::VectorXd mu;    // per-row means, length d_o
    Eigen::MatrixXd sigma; // d_o x d_o, symmetric PSD
};

// mu = (1/d_i) W 1,  Sigma = (W - mu 1^T)(W - mu 1^T)^T / (d_i - 1).
// Requires d_i >= 2.
RowCovariance row_covariance(const Eigen::MatrixXd& w);

// Sum of squared off-diagonal covariance entries; zero iff the rows are
// decorrelated.
double covariance_penalty(const Eigen::MatrixXd& w);

// Analytic d(penalty)/dW = 4/(d_i-1) * offdiag(Sigma) * (W - mu 1^T);
// matches central finite differences.
Eigen::MatrixXd penalty_gradient(const Eigen::MatrixXd& w);

struct ResistResult {
    Eigen::MatrixXd weights;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    double initial_task_loss = 0.0;
    double final_task_loss = 0.0;
    double initial_penalty = 0.0;
    double final_penalty = 0.0;
    std::vector<double> objective_trace; // after each accepted step
    int accepted_steps = 0;
    int rejected_steps = 0;
};

// Gradient descent on ||X W - Y||_F^2 + lambda * penalty(W) with the same
// backtracking acceptance rule as recover_finetune, so the objective is
// non-increasing over accepted steps. lambda = 0 reduces to the plain
// recovery finetune.
ResistResult finetune_resistant(const Eigen::MatrixXd& w0,
                                const Eigen::MatrixXd& probe_inputs,
                                const Eigen::MatrixXd& targets, double lambda,
                                int steps, double lr);

struct ResistanceCurve {
    std::vector<SweepPoint> baseline;
    std::vector<SweepPoint> resistant;
    std::vector<double> mse_ratio; // resistant / baseline per grid point
};

// Runs the same sweep (identical grid and seeds) on both tensors and pairs
// up the rate-distortion points. Identical inputs give ratio 1 everywhere.
ResistanceCurve resistance_report(const WeightMatrix& baseline,
                                  const WeightMatrix& resistant,
                                  const SweepGrid& grid);

} // namespace wg
