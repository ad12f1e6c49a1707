#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wg {

struct KmeansResult {
    std::vector<float> centroids;      // k x dim, row-major
    std::vector<uint32_t> assignments; // one per point
    double sse = 0.0;
    std::vector<double> sse_trace;     // per Lloyd iteration of the winning
                                       // restart, non-increasing
};

// Lloyd's k-means with k-means++ init.
//
// Determinism: identical (points, k, seed, ...) yield identical output.
// Assignment ties go to the lowest centroid index. Empty clusters are
// reseeded at the point farthest from its current centroid, so k larger
// than the number of distinct points degrades to duplicate centroids
// rather than failing. Centroids are rounded to float32 and the final
// assignment/sse pass runs against the rounded values.
KmeansResult kmeans(std::span<const float> points, size_t dim, uint32_t k,
                    uint64_t seed, int max_iters = 50, double rel_tol = 1e-6,
                    int restarts = 3);

} // namespace wg
