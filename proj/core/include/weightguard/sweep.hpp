#pragma once

#include "weightguard/quant.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wg {

// Cartesian grid over QuantConfig fields. Empty candidate lists fall back
// to the QuantConfig default for that field.
struct SweepGrid {
    std::vector<int64_t> group_rows;
    std::vector<int64_t> group_cols;
    std::vector<int64_t> vector_dim;
    std::vector<uint32_t> codebook_size;
    std::vector<int> residual_stages;
    std::vector<uint32_t> scale_clusters;
    std::vector<double> outlier_percent;
    uint64_t seed = 0;
    int threads = 0; // parallelism hint; 0 = auto
};

SweepGrid parse_grid_json(const std::string& text);

// All configs in the grid's Cartesian product, in nested-loop order.
std::vector<QuantConfig> materialize_grid(const SweepGrid& grid);

struct SweepPoint {
    RdPoint point;
    double wall_ms = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;               // grid order
    std::vector<std::string> skipped;             // reasons, grid order
};

// Evaluates every valid config; invalid configs are skipped with a reason.
// Results are merged by grid index so they are independent of thread count
// and execution order. measure_time=false writes 0 wall_ms so reports stay
// byte-stable. Throws if every config is invalid.
SweepResult run_sweep(const WeightMatrix& w, const SweepGrid& grid,
                      bool measure_time = false);

struct Frontier {
    std::vector<RdPoint> points; // bpp strictly increasing, mse strictly
                                 // decreasing
};

// Non-dominated subset sorted by bpp; equal-bpp points collapse to the
// lowest mse representative.
Frontier pareto(const std::vector<RdPoint>& points);

} // namespace wg
