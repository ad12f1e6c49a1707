#include "weightguard/resist.hpp"

#include "weightguard/common.hpp"
#include "weightguard/finetune.hpp"

#include <cmath>
#include <limits>

namespace wg {

RowCovariance row_covariance(const Eigen::MatrixXd& w) {
    const Eigen::Index d_i = w.cols();
    check(d_i >= 2, "row_covariance: need at least two columns");
    RowCovariance rc;
    rc.mu = w.rowwise().mean();
    const Eigen::MatrixXd centered = w.colwise() - rc.mu;
    rc.sigma = centered * centered.transpose() /
               static_cast<double>(d_i - 1);
    return rc;
}

double covariance_penalty(const Eigen::MatrixXd& w) {
    const RowCovariance rc = row_covariance(w);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rc.sigma.rows(); ++i) {
        for (Eigen::Index j = 0; j < rc.sigma.cols(); ++j) {
            if (i != j) {
                acc += rc.sigma(i, j) * rc.sigma(i, j);
            }
        }
    }
    return acc;
}

Eigen::MatrixXd penalty_gradient(const Eigen::MatrixXd& w) {
    const Eigen::Index d_i = w.cols();
    check(d_i >= 2, "penalty_gradient: need at least two columns");
    const Eigen::VectorXd mu = w.rowwise().mean();
    const Eigen::MatrixXd centered = w.colwise() - mu;
    Eigen::MatrixXd offdiag = centered * centered.transpose() /
                              static_cast<double>(d_i - 1);
    offdiag.diagonal().setZero();
    return (4.0 / static_cast<double>(d_i - 1)) * offdiag * centered;
}

ResistResult finetune_resistant(const Eigen::MatrixXd& w0,
                                const Eigen::MatrixXd& x,
                                const Eigen::MatrixXd& y, double lambda,
                                int steps, double lr) {
    check(x.cols() == w0.rows(),
          "finetune_resistant: X and W not conformable");
    check(x.rows() == y.rows() && w0.cols() == y.cols(),
          "finetune_resistant: Y shape mismatch");
    check(lambda >= 0.0, "finetune_resistant: lambda must be non-negative");
    check(steps >= 0 && lr >= 0.0,
          "finetune_resistant: bad steps or learning rate");

    const auto objective = [&](const Eigen::MatrixXd& w) {
        const double task = task_loss(w, x, y);
        return lambda > 0.0 ? task + lambda * covariance_penalty(w) : task;
    };

    ResistResult res;
    res.weights = w0;
    res.initial_task_loss = task_loss(w0, x, y);
    res.initial_penalty = covariance_penalty(w0);
    res.initial_objective = objective(w0);
    res.final_objective = res.initial_objective;
    const double divergence_bound =
            10.0 * std::max(res.initial_objective, 1e-30);

    for (int step = 0; step < steps; ++step) {
        Eigen::MatrixXd grad = 2.0 * x.transpose() * (x * res.weights - y);
        if (lambda > 0.0) {
            grad += lambda * penalty_gradient(res.weights);
        }
        double rate = lr;
        bool accepted = false;
        double cand_obj = res.final_objective;
        for (int attempt = 0; attempt < 11; ++attempt) {
            const Eigen::MatrixXd cand = res.weights - rate * grad;
            cand_obj = objective(cand);
            if (std::isfinite(cand_obj) && cand_obj <= res.final_objective) {
                res.weights = cand;
                res.final_objective = cand_obj;
                res.objective_trace.push_back(cand_obj);
                accepted = true;
                break;
            }
            rate *= 0.5;
        }
        if (accepted) {
            ++res.accepted_steps;
        } else {
            ++res.rejected_steps;
            check(std::isfinite(cand_obj) && cand_obj <= divergence_bound,
                  "finetune_resistant diverged");
        }
    }
    res.final_task_loss = task_loss(res.weights, x, y);
    res.final_penalty = covariance_penalty(res.weights);
    return res;
}

ResistanceCurve resistance_report(const WeightMatrix& baseline,
                                  const WeightMatrix& resistant,
                                  const SweepGrid& grid) {
    check(baseline.rows == resistant.rows &&
                  baseline.cols == resistant.cols,
          "resistance_report: tensor shapes differ");
    ResistanceCurve curve;
    curve.baseline = run_sweep(baseline, grid).points;
    curve.resistant = run_sweep(resistant, grid).points;
    check(curve.baseline.size() == curve.resistant.size(),
          "resistance_report: sweep sizes diverged");
    curve.mse_ratio.resize(curve.baseline.size());
    for (size_t i = 0; i < curve.baseline.size(); ++i) {
        const double base = curve.baseline[i].point.mse;
        const double res = curve.resistant[i].point.mse;
        if (base > 0.0) {
            curve.mse_ratio[i] = res / base;
        } else {
            curve.mse_ratio[i] =
                    res > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
        }
    }
    return curve;
}

} // namespace wg
