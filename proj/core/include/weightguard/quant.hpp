#pragma once

#include "weightguard/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wg {

struct QuantConfig {
    int64_t group_rows = 64;
    int64_t group_cols = 64;
    int64_t vector_dim = 8;
    uint32_t codebook_size = 16; // k
    int residual_stages = 1;     // in [1, 4]
    uint32_t scale_clusters = 1;
    double outlier_percent = 0.0; // in [0, 100)
    uint64_t seed = 0;
};

// Throws wg::Error describing the violated invariant.
void validate_config(const QuantConfig& cfg);

struct Outlier {
    int64_t row = 0;
    int64_t col = 0;
    float value = 0.0f;
};

struct StageCodes {
    std::vector<float> codebook;   // codebook_size * vector_dim
    std::vector<uint32_t> indices; // one per vector in the group
};

struct GroupCodes {
    std::vector<StageCodes> stages; // residual_stages entries
};

// Quantized layer: per-group per-stage codebooks and bit-packable index
// streams, a clustered scale codebook, and full-precision outliers.
struct CompressedLayer {
    std::string name;
    int64_t rows = 0;
    int64_t cols = 0;
    QuantConfig config;
    std::vector<GroupCodes> groups;    // row-major group order
    std::vector<float> scale_codebook; // scale_clusters entries
    std::vector<uint32_t> scale_index; // one per group
    std::vector<Outlier> outliers;     // row-major coordinate order
};

struct RdPoint {
    double bpp = 0.0;
    double mse = 0.0;
    QuantConfig config;
};

// Row-major tiling of a rows x cols tensor into group_rows x group_cols
// tiles; edge tiles may be smaller.
struct GroupExtent {
    int64_t r0 = 0;
    int64_t c0 = 0;
    int64_t rows = 0;
    int64_t cols = 0;

    int64_t elems() const { return rows * cols; }
};

std::vector<GroupExtent> tile_groups(int64_t rows, int64_t cols,
                                     int64_t group_rows, int64_t group_cols);

struct OutlierSplit {
    std::vector<Outlier> outliers;
    std::vector<float> masked; // outlier positions zeroed
};

// Splits off the top-magnitude `percent` of entries at full precision.
// The threshold is the (100-percent)-th percentile of |W|; every entry with
// |W_ij| >= threshold is extracted, so ties can push the count above
// percent. Masked entries are zeroed for codebook fitting.
OutlierSplit preserve_outliers(const WeightMatrix& w, double percent);

// Fits the full pipeline: per-group per-stage codebooks on successive
// residuals, then least-squares group scales clustered by 1-D k-means.
// A residual stage is kept only when it strictly reduces the final
// reconstruction MSE; otherwise its codes are replaced by zero codewords
// so bit accounting is unchanged but the error never goes up.
CompressedLayer compress_layer(const WeightMatrix& w, const QuantConfig& cfg,
                               int threads = 0);

// Scale * sum of stage lookups, outliers overwritten at full precision.
// Throws on out-of-range indices or coordinates (corrupt artifact).
WeightMatrix reconstruct_layer(const CompressedLayer& layer);

// Exact payload size in bits: codebooks and scales at 32 bits/entry,
// indices at ceil(log2 k) bits, outliers at row/col index bits + 32.
uint64_t payload_bits(const CompressedLayer& layer);

double bpp(const CompressedLayer& layer);

} // namespace wg
