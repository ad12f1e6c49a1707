#include "weightguard/kmeans.hpp"

#include "weightguard/common.hpp"
#include "weightguard/rng.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace wg {

namespace {

double sq_dist(const float* a, const float* b, size_t dim) {
    double acc = 0.0;
    for (size_t j = 0; j < dim; ++j) {
        const double d = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        acc += d * d;
    }
    return acc;
}

// Nearest centroid; ties resolved to the lowest index by strict '<'.
uint32_t assign_point(const float* p, const std::vector<float>& centroids,
                      uint32_t k, size_t dim, double* best_out) {
    uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (uint32_t c = 0; c < k; ++c) {
        const double d = sq_dist(p, centroids.data() + c * dim, dim);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    *best_out = best_d;
    return best;
}

struct RunResult {
    std::vector<float> centroids;
    std::vector<uint32_t> assignments;
    double sse = 0.0;
    std::vector<double> sse_trace;
};

RunResult run_once(std::span<const float> points, size_t n, size_t dim,
                   uint32_t k, RngStream& rng, int max_iters,
                   double rel_tol) {
    std::vector<float> centroids(k * dim);
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());

    // k-means++ seeding.
    {
        const uint64_t first = rng.next_below(n);
        for (size_t j = 0; j < dim; ++j) {
            centroids[j] = points[first * dim + j];
        }
        for (uint32_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (size_t i = 0; i < n; ++i) {
                const double d = sq_dist(points.data() + i * dim,
                                         centroids.data() + (c - 1) * dim, dim);
                if (d < min_d[i]) {
                    min_d[i] = d;
                }
                total += min_d[i];
            }
            size_t pick;
            if (total > 0.0) {
                const double u = rng.next_double() * total;
                double cum = 0.0;
                pick = n - 1;
                for (size_t i = 0; i < n; ++i) {
                    cum += min_d[i];
                    if (cum > u) {
                        pick = i;
                        break;
                    }
                }
            } else {
                // All points coincide with chosen centroids.
                pick = rng.next_below(n);
            }
            for (size_t j = 0; j < dim; ++j) {
                centroids[c * dim + j] = points[pick * dim + j];
            }
        }
    }

    RunResult res;
    res.assignments.assign(n, 0);
    std::vector<double> dists(n, 0.0);
    std::vector<double> sums(k * dim);
    std::vector<size_t> counts(k);

    double prev_sse = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        double sse = 0.0;
        for (size_t i = 0; i < n; ++i) {
            res.assignments[i] =
                    assign_point(points.data() + i * dim, centroids, k, dim,
                                 &dists[i]);
            sse += dists[i];
        }

        // Empty-cluster repair: reseed at the point farthest from its
        // centroid; ties go to the lowest point index.
        for (uint32_t c = 0; c < k; ++c) {
            bool empty = true;
            for (size_t i = 0; i < n && empty; ++i) {
                if (res.assignments[i] == c) {
                    empty = false;
                }
            }
            if (!empty) {
                continue;
            }
            size_t far = 0;
            double far_d = -1.0;
            for (size_t i = 0; i < n; ++i) {
                if (dists[i] > far_d) {
                    far_d = dists[i];
                    far = i;
                }
            }
            if (far_d <= 0.0) {
                break; // fewer distinct points than k; duplicates are fine
            }
            for (size_t j = 0; j < dim; ++j) {
                centroids[c * dim + j] = points[far * dim + j];
            }
            sse -= dists[far];
            dists[far] = 0.0;
            res.assignments[far] = c;
        }
        res.sse_trace.push_back(sse);

        const bool converged =
                std::isfinite(prev_sse) &&
                (prev_sse - sse) <= rel_tol * std::max(prev_sse, 0.0);
        prev_sse = sse;
        if (converged) {
            break;
        }

        // Update step: centroid = mean of its cluster, double accumulation,
        // rounded back to float32.
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (size_t i = 0; i < n; ++i) {
            const uint32_t c = res.assignments[i];
            ++counts[c];
            for (size_t j = 0; j < dim; ++j) {
                sums[c * dim + j] += points[i * dim + j];
            }
        }
        for (uint32_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                continue;
            }
            for (size_t j = 0; j < dim; ++j) {
                centroids[c * dim + j] = static_cast<float>(
                        sums[c * dim + j] / static_cast<double>(counts[c]));
            }
        }
    }

    // Final pass against the rounded centroids so the stated postcondition
    // (assignments map to the nearest centroid) holds exactly.
    double sse = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d;
        res.assignments[i] =
                assign_point(points.data() + i * dim, centroids, k, dim, &d);
        sse += d;
    }
    res.sse = sse;
    res.centroids = std::move(centroids);
    return res;
}

} // namespace

KmeansResult kmeans(std::span<const float> points, size_t dim, uint32_t k,
                    uint64_t seed, int max_iters, double rel_tol,
                    int restarts) {
    check(dim >= 1, "kmeans: dim must be >= 1");
    check(points.size() % dim == 0, "kmeans: point buffer not a multiple of dim");
    const size_t n = points.size() / dim;
    check(n >= 1, "kmeans: need at least one point");
    check(k >= 1, "kmeans: k must be >= 1");
    check(restarts >= 1, "kmeans: restarts must be >= 1");
    for (float v : points) {
        check(std::isfinite(v), "kmeans: non-finite input");
    }

    KmeansResult best;
    best.sse = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        RngStream rng(seed, "kmeans/restart/" + std::to_string(r));
        RunResult run = run_once(points, n, dim, k, rng, max_iters, rel_tol);
        if (run.sse < best.sse) {
            best.centroids = std::move(run.centroids);
            best.assignments = std::move(run.assignments);
            best.sse = run.sse;
            best.sse_trace = std::move(run.sse_trace);
        }
    }
    return best;
}

} // namespace wg
