#include "weightguard/finetune.hpp"

#include "weightguard/common.hpp"

#include <cmath>

namespace wg {

double task_loss(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x,
                 const Eigen::MatrixXd& y) {
    return (x * w - y).squaredNorm();
}

Eigen::MatrixXd least_squares_solution(const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& y) {
    return (x.transpose() * x)
            .ldlt()
            .solve(x.transpose() * y);
}

FinetuneResult recover_finetune(const Eigen::MatrixXd& w0,
                                const Eigen::MatrixXd& x,
                                const Eigen::MatrixXd& y, int steps,
                                double lr) {
    check(x.cols() == w0.rows(), "recover_finetune: X and W not conformable");
    check(x.rows() == y.rows() && w0.cols() == y.cols(),
          "recover_finetune: Y shape mismatch");
    check(steps >= 0, "recover_finetune: steps must be non-negative");
    check(lr >= 0.0, "recover_finetune: learning rate must be non-negative");

    FinetuneResult res;
    res.weights = w0;
    res.initial_loss = task_loss(res.weights, x, y);
    res.final_loss = res.initial_loss;

    const double divergence_bound = 10.0 * std::max(res.initial_loss, 1e-30);
    for (int step = 0; step < steps; ++step) {
        const Eigen::MatrixXd grad =
                2.0 * x.transpose() * (x * res.weights - y);
        double rate = lr;
        bool accepted = false;
        double cand_loss = res.final_loss;
        for (int attempt = 0; attempt < 11; ++attempt) {
            const Eigen::MatrixXd cand = res.weights - rate * grad;
            cand_loss = task_loss(cand, x, y);
            if (std::isfinite(cand_loss) && cand_loss <= res.final_loss) {
                res.weights = cand;
                res.final_loss = cand_loss;
                accepted = true;
                break;
            }
            rate *= 0.5;
        }
        // Backtracking rejects uphill steps, so a run that still overshoots
        // 10x the initial loss at the smallest rate is genuinely divergent.
        check(accepted || std::isfinite(cand_loss),
              "finetune diverged: non-finite loss");
        check(accepted || cand_loss <= divergence_bound,
              "finetune diverged: loss " + std::to_string(cand_loss) +
                      " exceeds 10x initial " +
                      std::to_string(res.initial_loss));
        if (accepted) {
            res.loss_trace.push_back(res.final_loss);
            ++res.accepted_steps;
        } else {
            ++res.rejected_steps;
        }
    }
    return res;
}

} // namespace wg
