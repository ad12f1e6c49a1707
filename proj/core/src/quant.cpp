#include "weightguard/quant.hpp"

#include "weightguard/common.hpp"
#include "weightguard/kmeans.hpp"
#include "weightguard/parallel.hpp"
#include "weightguard/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <string>

namespace wg {

namespace {

uint32_t bits_for(uint64_t n) {
    // Width of an index into [0, n).
    return n <= 1 ? 0 : static_cast<uint32_t>(std::bit_width(n - 1));
}

int64_t vectors_in(const GroupExtent& g, int64_t dim) {
    return (g.elems() + dim - 1) / dim;
}

// Gathers a group's elements row-major, zero-padding the final vector.
std::vector<float> group_points(const std::vector<float>& values,
                                int64_t cols, const GroupExtent& g,
                                int64_t dim) {
    std::vector<float> pts(static_cast<size_t>(vectors_in(g, dim) * dim),
                           0.0f);
    int64_t t = 0;
    for (int64_t r = g.r0; r < g.r0 + g.rows; ++r) {
        for (int64_t c = g.c0; c < g.c0 + g.cols; ++c) {
            pts[static_cast<size_t>(t++)] =
                    values[static_cast<size_t>(r * cols + c)];
        }
    }
    return pts;
}

// Sum of stage codebook lookups for every real position, computed in float
// in stage order. reconstruct_layer and the compressor both go through
// this so their roundings agree bit-for-bit.
std::vector<float> unscaled_reconstruction(
        const CompressedLayer& layer, const std::vector<GroupExtent>& tiles) {
    const int64_t dim = layer.config.vector_dim;
    std::vector<float> recon(
            static_cast<size_t>(layer.rows * layer.cols), 0.0f);
    for (size_t gi = 0; gi < tiles.size(); ++gi) {
        const GroupExtent& g = tiles[gi];
        const GroupCodes& codes = layer.groups[gi];
        int64_t t = 0;
        for (int64_t r = g.r0; r < g.r0 + g.rows; ++r) {
            for (int64_t c = g.c0; c < g.c0 + g.cols; ++c) {
                const int64_t v = t / dim;
                const int64_t j = t % dim;
                float acc = 0.0f;
                for (const StageCodes& st : codes.stages) {
                    acc += st.codebook[static_cast<size_t>(
                            st.indices[static_cast<size_t>(v)] * dim + j)];
                }
                recon[static_cast<size_t>(r * layer.cols + c)] = acc;
                ++t;
            }
        }
    }
    return recon;
}

// Least-squares per-group scale against the masked weights, clustered to
// scale_clusters levels by 1-D k-means. Fills scale_codebook/scale_index.
void fit_scales(CompressedLayer& layer, const std::vector<float>& masked,
                const std::vector<float>& unscaled,
                const std::vector<GroupExtent>& tiles) {
    std::vector<float> alphas(tiles.size());
    for (size_t gi = 0; gi < tiles.size(); ++gi) {
        const GroupExtent& g = tiles[gi];
        double num = 0.0;
        double den = 0.0;
        for (int64_t r = g.r0; r < g.r0 + g.rows; ++r) {
            for (int64_t c = g.c0; c < g.c0 + g.cols; ++c) {
                const size_t i = static_cast<size_t>(r * layer.cols + c);
                num += static_cast<double>(masked[i]) * unscaled[i];
                den += static_cast<double>(unscaled[i]) * unscaled[i];
            }
        }
        alphas[gi] = den > 0.0 ? static_cast<float>(num / den) : 1.0f;
    }
    RngStream scale_seed(layer.config.seed, "rvq/scales");
    KmeansResult km = kmeans(alphas, 1, layer.config.scale_clusters,
                             scale_seed.next_u64());
    layer.scale_codebook = std::move(km.centroids);
    layer.scale_codebook.resize(layer.config.scale_clusters, 0.0f);
    layer.scale_index = std::move(km.assignments);
}

std::vector<float> apply_scales_and_outliers(
        const CompressedLayer& layer, const std::vector<float>& unscaled,
        const std::vector<GroupExtent>& tiles) {
    std::vector<float> out(unscaled.size());
    for (size_t gi = 0; gi < tiles.size(); ++gi) {
        const GroupExtent& g = tiles[gi];
        const float scale = layer.scale_codebook[layer.scale_index[gi]];
        for (int64_t r = g.r0; r < g.r0 + g.rows; ++r) {
            for (int64_t c = g.c0; c < g.c0 + g.cols; ++c) {
                const size_t i = static_cast<size_t>(r * layer.cols + c);
                out[i] = scale * unscaled[i];
            }
        }
    }
    for (const Outlier& o : layer.outliers) {
        out[static_cast<size_t>(o.row * layer.cols + o.col)] = o.value;
    }
    return out;
}

double mse_against(const std::vector<float>& reference,
                   const std::vector<float>& recon) {
    double acc = 0.0;
    for (size_t i = 0; i < reference.size(); ++i) {
        const double d =
                static_cast<double>(reference[i]) - recon[i];
        acc += d * d;
    }
    return acc / static_cast<double>(reference.size());
}

StageCodes zero_stage(const QuantConfig& cfg, int64_t vectors) {
    StageCodes st;
    st.codebook.assign(
            static_cast<size_t>(cfg.codebook_size * cfg.vector_dim), 0.0f);
    st.indices.assign(static_cast<size_t>(vectors), 0);
    return st;
}

} // namespace

void validate_config(const QuantConfig& cfg) {
    check(cfg.group_rows >= 1 && cfg.group_cols >= 1,
          "quant config: group dimensions must be >= 1");
    check(cfg.vector_dim >= 1, "quant config: vector_dim must be >= 1");
    check((cfg.group_rows * cfg.group_cols) % cfg.vector_dim == 0,
          "quant config: vector_dim must divide group_rows*group_cols");
    check(cfg.codebook_size >= 1, "quant config: codebook_size must be >= 1");
    check(cfg.residual_stages >= 1 && cfg.residual_stages <= 4,
          "quant config: residual_stages must be in [1,4]");
    check(cfg.scale_clusters >= 1,
          "quant config: scale_clusters must be >= 1");
    check(cfg.outlier_percent >= 0.0 && cfg.outlier_percent < 100.0,
          "quant config: outlier_percent must be in [0,100)");
}

std::vector<GroupExtent> tile_groups(int64_t rows, int64_t cols,
                                     int64_t group_rows, int64_t group_cols) {
    std::vector<GroupExtent> tiles;
    for (int64_t r0 = 0; r0 < rows; r0 += group_rows) {
        for (int64_t c0 = 0; c0 < cols; c0 += group_cols) {
            tiles.push_back(GroupExtent{r0, c0,
                                        std::min(group_rows, rows - r0),
                                        std::min(group_cols, cols - c0)});
        }
    }
    return tiles;
}

OutlierSplit preserve_outliers(const WeightMatrix& w, double percent) {
    check(percent >= 0.0 && percent < 100.0,
          "outlier percent must be in [0,100)");
    OutlierSplit split;
    split.masked = w.values;
    if (percent == 0.0) {
        return split;
    }
    const int64_t n = w.size();
    std::vector<float> mags(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        mags[static_cast<size_t>(i)] = std::fabs(w.values[static_cast<size_t>(i)]);
    }
    std::sort(mags.begin(), mags.end());
    const int64_t idx = static_cast<int64_t>(
            std::floor((100.0 - percent) * static_cast<double>(n) / 100.0));
    if (idx >= n) {
        return split;
    }
    const float tau = mags[static_cast<size_t>(idx)];
    for (int64_t r = 0; r < w.rows; ++r) {
        for (int64_t c = 0; c < w.cols; ++c) {
            const size_t i = static_cast<size_t>(r * w.cols + c);
            if (std::fabs(w.values[i]) >= tau) {
                split.outliers.push_back(Outlier{r, c, w.values[i]});
                split.masked[i] = 0.0f;
            }
        }
    }
    return split;
}

CompressedLayer compress_layer(const WeightMatrix& w, const QuantConfig& cfg,
                               int threads) {
    validate_config(cfg);
    validate_finite(w);
    const std::vector<GroupExtent> tiles =
            tile_groups(w.rows, w.cols, cfg.group_rows, cfg.group_cols);

    CompressedLayer layer;
    layer.name = w.name;
    layer.rows = w.rows;
    layer.cols = w.cols;
    layer.config = cfg;
    layer.groups.resize(tiles.size());

    OutlierSplit split = preserve_outliers(w, cfg.outlier_percent);
    layer.outliers = std::move(split.outliers);
    const std::vector<float>& masked = split.masked;

    // Start from all-zero stages; fitted stages replace them one at a time
    // when they strictly improve the final (scaled, outlier-restored) MSE.
    for (size_t gi = 0; gi < tiles.size(); ++gi) {
        for (int s = 0; s < cfg.residual_stages; ++s) {
            layer.groups[gi].stages.push_back(
                    zero_stage(cfg, vectors_in(tiles[gi], cfg.vector_dim)));
        }
    }

    const int workers = effective_threads(threads);
    std::vector<float> unscaled = unscaled_reconstruction(layer, tiles);
    fit_scales(layer, masked, unscaled, tiles);
    double best_mse = mse_against(
            w.values, apply_scales_and_outliers(layer, unscaled, tiles));

    std::vector<float> residual = masked;
    for (int s = 0; s < cfg.residual_stages; ++s) {
        std::vector<StageCodes> fitted(tiles.size());
        parallel_for(static_cast<int64_t>(tiles.size()), workers,
                     [&](int64_t gi) {
                         const std::vector<float> pts = group_points(
                                 residual, w.cols, tiles[gi], cfg.vector_dim);
                         RngStream stage_seed(
                                 cfg.seed, "rvq/g" + std::to_string(gi) +
                                                   "/s" + std::to_string(s));
                         KmeansResult km = kmeans(
                                 pts, static_cast<size_t>(cfg.vector_dim),
                                 cfg.codebook_size, stage_seed.next_u64());
                         km.centroids.resize(
                                 static_cast<size_t>(cfg.codebook_size *
                                                     cfg.vector_dim),
                                 0.0f);
                         fitted[gi] = StageCodes{std::move(km.centroids),
                                                 std::move(km.assignments)};
                     });

        CompressedLayer candidate = layer;
        for (size_t gi = 0; gi < tiles.size(); ++gi) {
            candidate.groups[gi].stages[static_cast<size_t>(s)] =
                    std::move(fitted[gi]);
        }
        std::vector<float> cand_unscaled =
                unscaled_reconstruction(candidate, tiles);
        fit_scales(candidate, masked, cand_unscaled, tiles);
        const double cand_mse = mse_against(
                w.values,
                apply_scales_and_outliers(candidate, cand_unscaled, tiles));

        if (cand_mse < best_mse) {
            layer = std::move(candidate);
            best_mse = cand_mse;
            unscaled = std::move(cand_unscaled);
            for (size_t i = 0; i < residual.size(); ++i) {
                residual[i] = masked[i] - unscaled[i];
            }
        }
        // Rejected stages keep their zero codewords; bit accounting is
        // unchanged and the residual for later stages is unaffected.
    }
    return layer;
}

WeightMatrix reconstruct_layer(const CompressedLayer& layer) {
    validate_config(layer.config);
    const QuantConfig& cfg = layer.config;
    const std::vector<GroupExtent> tiles =
            tile_groups(layer.rows, layer.cols, cfg.group_rows,
                        cfg.group_cols);
    check(layer.groups.size() == tiles.size(),
          "corrupt artifact: group count does not match shape");
    check(layer.scale_codebook.size() == cfg.scale_clusters,
          "corrupt artifact: scale codebook size mismatch");
    check(layer.scale_index.size() == tiles.size(),
          "corrupt artifact: scale index count mismatch");
    for (size_t gi = 0; gi < tiles.size(); ++gi) {
        const int64_t vectors = vectors_in(tiles[gi], cfg.vector_dim);
        check(layer.groups[gi].stages.size() ==
                      static_cast<size_t>(cfg.residual_stages),
              "corrupt artifact: stage count mismatch");
        check(layer.scale_index[gi] < cfg.scale_clusters,
              "corrupt artifact: scale index out of range");
        for (const StageCodes& st : layer.groups[gi].stages) {
            check(st.codebook.size() ==
                          static_cast<size_t>(cfg.codebook_size *
                                              cfg.vector_dim),
                  "corrupt artifact: codebook size mismatch");
            check(st.indices.size() == static_cast<size_t>(vectors),
                  "corrupt artifact: index stream length mismatch");
            for (uint32_t idx : st.indices) {
                check(idx < cfg.codebook_size,
                      "corrupt artifact: index out of codebook range");
            }
        }
    }
    std::set<std::pair<int64_t, int64_t>> seen;
    for (const Outlier& o : layer.outliers) {
        check(o.row >= 0 && o.row < layer.rows && o.col >= 0 &&
                      o.col < layer.cols,
              "corrupt artifact: outlier coordinate out of range");
        check(seen.emplace(o.row, o.col).second,
              "corrupt artifact: duplicate outlier coordinate");
    }

    const std::vector<float> unscaled =
            unscaled_reconstruction(layer, tiles);
    std::vector<float> values =
            apply_scales_and_outliers(layer, unscaled, tiles);
    return make_weight_matrix(layer.name, layer.rows, layer.cols,
                              std::move(values));
}

uint64_t payload_bits(const CompressedLayer& layer) {
    const QuantConfig& cfg = layer.config;
    const std::vector<GroupExtent> tiles =
            tile_groups(layer.rows, layer.cols, cfg.group_rows,
                        cfg.group_cols);
    const uint64_t index_width = bits_for(cfg.codebook_size);
    const uint64_t scale_width = bits_for(cfg.scale_clusters);
    const uint64_t coord_width =
            bits_for(static_cast<uint64_t>(layer.rows)) +
            bits_for(static_cast<uint64_t>(layer.cols));

    uint64_t bits = 0;
    for (const GroupExtent& g : tiles) {
        const uint64_t vectors =
                static_cast<uint64_t>(vectors_in(g, cfg.vector_dim));
        bits += static_cast<uint64_t>(cfg.residual_stages) *
                (static_cast<uint64_t>(cfg.codebook_size) *
                         static_cast<uint64_t>(cfg.vector_dim) * 32 +
                 vectors * index_width);
    }
    bits += static_cast<uint64_t>(cfg.scale_clusters) * 32;
    bits += static_cast<uint64_t>(tiles.size()) * scale_width;
    bits += static_cast<uint64_t>(layer.outliers.size()) * (coord_width + 32);
    return bits;
}

double bpp(const CompressedLayer& layer) {
    return static_cast<double>(payload_bits(layer)) /
           static_cast<double>(layer.rows * layer.cols);
}

} // namespace wg
