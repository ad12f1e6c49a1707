#pragma once

#include "weightguard/tensor.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace wg {

struct GaugeTransform {
    Eigen::MatrixXd o; // d x d invertible
    bool orthogonal = false;
    uint64_t seed = 0;
};

// Orthogonal path: QR of a seeded Gaussian matrix with positive-diagonal
// sign fix. Invertible path: random orthogonal * log-uniform singular
// values * random orthogonal, rejected above the condition bound.
GaugeTransform sample_gauge(int64_t d, uint64_t seed, bool orthogonal,
                            double condition_bound = 1e3);

// (W'_Q, W'_K) = (O^{-T} W_Q, O W_K); preserves W_Q^T W_K.
struct GaugedPair {
    Eigen::MatrixXd w_q;
    Eigen::MatrixXd w_k;
};

GaugedPair apply_gauge(const Eigen::MatrixXd& w_q,
                       const Eigen::MatrixXd& w_k,
                       const Eigen::MatrixXd& o);

struct GaugeSnapshot {
    int64_t round = 0;
    GaugedPair pair;
    double refresh_minutes = 0.0;
    uint64_t transform_seed = 0; // defender secret, keep out of exports
};

// ceil(dwell / interval): how many refreshes an attacker observes.
int64_t rounds_for_dwell(double dwell_minutes, double refresh_minutes);

// One snapshot per round, each under an independently-seeded transform.
std::vector<GaugeSnapshot> refresh_schedule(const Eigen::MatrixXd& w_q,
                                            const Eigen::MatrixXd& w_k,
                                            double refresh_minutes,
                                            int64_t rounds, uint64_t seed,
                                            bool orthogonal = true);

struct CanonicalPair {
    Eigen::MatrixXd w_q_star;
    Eigen::MatrixXd w_k_star;
    Eigen::VectorXd sigma;          // non-increasing
    bool degenerate_spectrum = false; // some gap below 1e-6 * sigma_max
};

// SVD of W'_Q^T W'_K with descending singular values and a sign convention
// (largest-magnitude entry of each left singular vector made positive), so
// snapshots of the same pair under different orthogonal gauges map to the
// same sigma and canonical product.
CanonicalPair canonicalize(const Eigen::MatrixXd& w_q_gauged,
                           const Eigen::MatrixXd& w_k_gauged);

struct ProcrustesResult {
    Eigen::MatrixXd rotation;
    bool degenerate = false; // rank-deficient A^T B; any optimizer returned
};

// Orthogonal R minimizing ||A R - B||_F.
ProcrustesResult procrustes_align(const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b);

struct RelearnResult {
    Eigen::MatrixXd rotation;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_trace;
};

// Gradient descent on ||X (W* R) - Y||_F^2 over R only, starting from the
// identity; backtracking acceptance keeps the loss non-increasing. With
// reproject=true each accepted step is pulled back to the orthogonal
// manifold by QR.
RelearnResult relearn_rotation(const Eigen::MatrixXd& w_star,
                               const Eigen::MatrixXd& probe_inputs,
                               const Eigen::MatrixXd& targets, int steps,
                               double lr, bool reproject = true);

struct NoiseReport {
    WeightMatrix noisy;
    double relative_change = 0.0; // ||W_noisy - W||_F / ||W||_F
    int64_t modified_entries = 0;
};

// Hardening noise. Specs:
//   sparse(fraction,magnitude)   spikes of +-magnitude*sigma_W at
//                                ceil(fraction*n) seeded positions
//   student_t(dof,scale)         heavy-tailed additive noise with the given
//                                tail index, scale in units of sigma_W
NoiseReport harden_with_noise(const WeightMatrix& w,
                              const std::string& noise_spec, uint64_t seed);

} // namespace wg
