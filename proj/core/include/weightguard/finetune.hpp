#pragma once

#include <Eigen/Dense>

#include <vector>

namespace wg {

struct FinetuneResult {
    Eigen::MatrixXd weights;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_trace; // after each accepted step
    int accepted_steps = 0;
    int rejected_steps = 0;
};

// Gradient descent on ||X*W - Y||_F^2 starting from w0. Each step is
// accepted only if it does not increase the loss; on increase the step is
// retried with a halved rate (up to 10 halvings) and finally rejected, so
// the loss trace is non-increasing. Aborts with wg::Error if the loss ever
// exceeds 10x its initial value.
FinetuneResult recover_finetune(const Eigen::MatrixXd& w0,
                                const Eigen::MatrixXd& probe_inputs,
                                const Eigen::MatrixXd& targets, int steps,
                                double lr);

// Least-squares W for ||X*W - Y||^2; the oracle the finetune converges to.
Eigen::MatrixXd least_squares_solution(const Eigen::MatrixXd& probe_inputs,
                                       const Eigen::MatrixXd& targets);

double task_loss(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x,
                 const Eigen::MatrixXd& y);

} // namespace wg
