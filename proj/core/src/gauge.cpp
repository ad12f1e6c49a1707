#include "weightguard/gauge.hpp"

#include "weightguard/common.hpp"
#include "weightguard/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace wg {

namespace {

Eigen::MatrixXd gaussian_matrix(int64_t rows, int64_t cols, RngStream& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (int64_t r = 0; r < rows; ++r) {
        for (int64_t c = 0; c < cols; ++c) {
            m(r, c) = rng.gaussian();
        }
    }
    return m;
}

// Haar-ish orthogonal sample: QR of a Gaussian matrix, columns sign-fixed
// so the R factor has a positive diagonal.
Eigen::MatrixXd random_orthogonal(int64_t d, RngStream& rng) {
    const Eigen::MatrixXd g = gaussian_matrix(d, d, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int64_t i = 0; i < d; ++i) {
        if (r(i, i) < 0) {
            q.col(i) = -q.col(i);
        }
    }
    return q;
}

} // namespace

GaugeTransform sample_gauge(int64_t d, uint64_t seed, bool orthogonal,
                            double condition_bound) {
    check(d >= 1, "sample_gauge: dimension must be >= 1");
    RngStream rng(seed, orthogonal ? "gauge/orthogonal" : "gauge/invertible");
    GaugeTransform g;
    g.orthogonal = orthogonal;
    g.seed = seed;
    if (orthogonal) {
        g.o = random_orthogonal(d, rng);
        return g;
    }
    // Synthesize U * diag(s) * V^T with log-uniform singular values in
    // [0.1, 10], then verify the conditioning bound.
    const Eigen::MatrixXd u = random_orthogonal(d, rng);
    const Eigen::MatrixXd v = random_orthogonal(d, rng);
    Eigen::VectorXd s(d);
    for (int64_t i = 0; i < d; ++i) {
        s(i) = std::pow(10.0, -1.0 + 2.0 * rng.next_double());
    }
    g.o = u * s.asDiagonal() * v.transpose();
    const double cond = s.maxCoeff() / s.minCoeff();
    check(cond <= condition_bound,
          "sample_gauge: condition number " + std::to_string(cond) +
                  " exceeds bound");
    return g;
}

GaugedPair apply_gauge(const Eigen::MatrixXd& w_q,
                       const Eigen::MatrixXd& w_k,
                       const Eigen::MatrixXd& o) {
    check(o.rows() == o.cols(), "apply_gauge: O must be square");
    check(w_q.rows() == o.rows() && w_k.rows() == o.rows(),
          "apply_gauge: O not conformable with the projection pair");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(o.transpose());
    check(lu.isInvertible(), "apply_gauge: singular transform");
    GaugedPair out;
    out.w_q = lu.solve(w_q); // O^{-T} W_Q
    out.w_k = o * w_k;
    return out;
}

int64_t rounds_for_dwell(double dwell_minutes, double refresh_minutes) {
    check(dwell_minutes > 0.0 && refresh_minutes > 0.0,
          "rounds_for_dwell: durations must be positive");
    return static_cast<int64_t>(std::ceil(dwell_minutes / refresh_minutes));
}

std::vector<GaugeSnapshot> refresh_schedule(const Eigen::MatrixXd& w_q,
                                            const Eigen::MatrixXd& w_k,
                                            double refresh_minutes,
                                            int64_t rounds, uint64_t seed,
                                            bool orthogonal) {
    check(rounds >= 1, "refresh_schedule: rounds must be >= 1");
    check(refresh_minutes > 0.0,
          "refresh_schedule: refresh interval must be positive");
    std::vector<GaugeSnapshot> snapshots;
    snapshots.reserve(static_cast<size_t>(rounds));
    for (int64_t t = 0; t < rounds; ++t) {
        RngStream round_seed(seed, "gauge/round/" + std::to_string(t));
        const uint64_t st = round_seed.next_u64();
        const GaugeTransform g = sample_gauge(w_q.rows(), st, orthogonal);
        GaugeSnapshot snap;
        snap.round = t;
        snap.pair = apply_gauge(w_q, w_k, g.o);
        snap.refresh_minutes = refresh_minutes;
        snap.transform_seed = st;
        snapshots.push_back(std::move(snap));
    }
    return snapshots;
}

CanonicalPair canonicalize(const Eigen::MatrixXd& w_q_gauged,
                           const Eigen::MatrixXd& w_k_gauged) {
    check(w_q_gauged.rows() == w_k_gauged.rows(),
          "canonicalize: pair not conformable");
    const Eigen::MatrixXd product = w_q_gauged.transpose() * w_k_gauged;
    check(product.allFinite(), "canonicalize: non-finite product");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
            product, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd u = svd.matrixU();
    Eigen::MatrixXd v = svd.matrixV();
    const Eigen::VectorXd sigma = svd.singularValues(); // descending

    // Sign convention: make the largest-magnitude entry of each column of
    // U positive and flip the matching column of V, so the decomposition
    // (and hence the canonical basis) is unique for distinct spectra.
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index arg_max = 0;
        u.col(c).cwiseAbs().maxCoeff(&arg_max);
        if (u(arg_max, c) < 0) {
            u.col(c) = -u.col(c);
            if (c < v.cols()) {
                v.col(c) = -v.col(c);
            }
        }
    }

    CanonicalPair out;
    out.w_q_star = w_q_gauged * u;
    out.w_k_star = w_k_gauged * v;
    out.sigma = sigma;
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    for (Eigen::Index i = 0; i + 1 < sigma.size(); ++i) {
        if (sigma(i) - sigma(i + 1) < 1e-6 * sigma_max) {
            out.degenerate_spectrum = true;
            break;
        }
    }
    if (sigma_max == 0.0) {
        out.degenerate_spectrum = sigma.size() > 1;
    }
    return out;
}

ProcrustesResult procrustes_align(const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b) {
    check(a.rows() == b.rows() && a.cols() == b.cols(),
          "procrustes_align: shape mismatch");
    const Eigen::MatrixXd m = a.transpose() * b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
            m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ProcrustesResult res;
    res.rotation = svd.matrixU() * svd.matrixV().transpose();
    const Eigen::VectorXd s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) <= 1e-10 * std::max(s(0), 1e-300)) {
        res.degenerate = true;
    }
    return res;
}

RelearnResult relearn_rotation(const Eigen::MatrixXd& w_star,
                               const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& y, int steps, double lr,
                               bool reproject) {
    check(x.cols() == w_star.rows(),
          "relearn_rotation: X and W* not conformable");
    const Eigen::Index d = w_star.cols();
    check(y.rows() == x.rows() && y.cols() == d,
          "relearn_rotation: Y shape mismatch");
    check(steps >= 0 && lr >= 0.0, "relearn_rotation: bad steps or rate");

    const Eigen::MatrixXd z = x * w_star;
    const auto loss_of = [&](const Eigen::MatrixXd& r) {
        return (z * r - y).squaredNorm();
    };
    const auto project = [&](const Eigen::MatrixXd& r) -> Eigen::MatrixXd {
        if (!reproject) {
            return r;
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(r);
        Eigen::MatrixXd q = qr.householderQ();
        const Eigen::MatrixXd rr =
                qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index i = 0; i < d; ++i) {
            if (rr(i, i) < 0) {
                q.col(i) = -q.col(i);
            }
        }
        return q;
    };

    RelearnResult res;
    res.rotation = Eigen::MatrixXd::Identity(d, d);
    res.initial_loss = loss_of(res.rotation);
    res.final_loss = res.initial_loss;
    const double divergence_bound = 10.0 * std::max(res.initial_loss, 1e-30);

    for (int step = 0; step < steps; ++step) {
        const Eigen::MatrixXd grad =
                2.0 * z.transpose() * (z * res.rotation - y);
        double rate = lr;
        bool accepted = false;
        double cand_loss = res.final_loss;
        for (int attempt = 0; attempt < 11; ++attempt) {
            const Eigen::MatrixXd cand = project(res.rotation - rate * grad);
            cand_loss = loss_of(cand);
            if (std::isfinite(cand_loss) && cand_loss <= res.final_loss) {
                res.rotation = cand;
                res.final_loss = cand_loss;
                res.loss_trace.push_back(cand_loss);
                accepted = true;
                break;
            }
            rate *= 0.5;
        }
        check(accepted || (std::isfinite(cand_loss) &&
                           cand_loss <= divergence_bound),
              "relearn_rotation diverged");
    }
    return res;
}

NoiseReport harden_with_noise(const WeightMatrix& w,
                              const std::string& noise_spec, uint64_t seed) {
    const auto open = noise_spec.find('(');
    check(open != std::string::npos && !noise_spec.empty() &&
                  noise_spec.back() == ')',
          "noise spec must look like name(arg,...): " + noise_spec);
    const std::string name = noise_spec.substr(0, open);
    std::vector<double> args;
    {
        std::string body =
                noise_spec.substr(open + 1, noise_spec.size() - open - 2);
        size_t pos = 0;
        while (pos < body.size()) {
            size_t comma = body.find(',', pos);
            if (comma == std::string::npos) {
                comma = body.size();
            }
            const std::string tok = body.substr(pos, comma - pos);
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            check(end && *end == '\0' && !tok.empty(),
                  "bad numeric argument in noise spec: " + noise_spec);
            args.push_back(v);
            pos = comma + 1;
        }
    }

    const double sigma_w =
            w.size() >= 2 ? sample_std(w.values) : std::fabs(w.values[0]);
    NoiseReport report;
    report.noisy = w;
    RngStream rng(seed, "harden/" + name);

    if (name == "sparse") {
        check(args.size() == 2, "sparse expects (fraction,magnitude)");
        const double fraction = args[0];
        const double magnitude = args[1];
        check(fraction >= 0.0 && fraction <= 1.0,
              "sparse fraction must be in [0,1]");
        const int64_t n = w.size();
        const int64_t spikes = static_cast<int64_t>(
                std::ceil(fraction * static_cast<double>(n)));
        if (spikes > 0) {
            const auto positions = rng.sample_indices(
                    static_cast<uint64_t>(n), static_cast<uint64_t>(spikes));
            for (uint64_t pos : positions) {
                const double spike =
                        rng.rademacher() * magnitude * sigma_w;
                report.noisy.values[pos] = static_cast<float>(
                        static_cast<double>(w.values[pos]) + spike);
            }
        }
        report.modified_entries = spikes;
    } else if (name == "student_t") {
        check(args.size() == 2, "student_t expects (dof,scale)");
        const int dof = static_cast<int>(args[0]);
        const double scale = args[1];
        check(dof >= 1 && args[0] == dof,
              "student_t dof must be a positive integer");
        check(scale >= 0.0, "student_t scale must be non-negative");
        for (int64_t i = 0; i < w.size(); ++i) {
            // t-variate as N(0,1) / sqrt(chi2_dof / dof).
            const double z = rng.gaussian();
            double chi2 = 0.0;
            for (int j = 0; j < dof; ++j) {
                const double g = rng.gaussian();
                chi2 += g * g;
            }
            const double t = z / std::sqrt(chi2 / dof);
            report.noisy.values[static_cast<size_t>(i)] = static_cast<float>(
                    static_cast<double>(w.values[static_cast<size_t>(i)]) +
                    scale * sigma_w * t);
            if (scale > 0.0) {
                ++report.modified_entries;
            }
        }
    } else {
        throw Error("unknown noise spec name: " + name);
    }

    validate_finite(report.noisy);
    double diff = 0.0;
    double base = 0.0;
    for (int64_t i = 0; i < w.size(); ++i) {
        const double d =
                static_cast<double>(report.noisy.values[static_cast<size_t>(i)]) -
                static_cast<double>(w.values[static_cast<size_t>(i)]);
        diff += d * d;
        base += static_cast<double>(w.values[static_cast<size_t>(i)]) *
                static_cast<double>(w.values[static_cast<size_t>(i)]);
    }
    report.relative_change = base > 0.0 ? std::sqrt(diff / base)
                                        : std::sqrt(diff);
    return report;
}

} // namespace wg
