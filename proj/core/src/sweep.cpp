#include "weightguard/sweep.hpp"

#include "weightguard/common.hpp"
#include "weightguard/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>

namespace wg {

namespace {

template <typename T>
std::vector<T> field_or_default(const nlohmann::json& j, const char* key) {
    std::vector<T> out;
    if (j.contains(key)) {
        check(j[key].is_array(), std::string("grid field '") + key +
                                         "' must be an array");
        for (const auto& v : j[key]) {
            out.push_back(v.get<T>());
        }
    }
    return out;
}

template <typename T>
std::vector<T> or_single(std::vector<T> values, T fallback) {
    if (values.empty()) {
        values.push_back(fallback);
    }
    return values;
}

} // namespace

SweepGrid parse_grid_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed grid file: ") + e.what());
    }
    SweepGrid g;
    g.group_rows = field_or_default<int64_t>(j, "group_rows");
    g.group_cols = field_or_default<int64_t>(j, "group_cols");
    g.vector_dim = field_or_default<int64_t>(j, "vector_dim");
    g.codebook_size = field_or_default<uint32_t>(j, "codebook_size");
    g.residual_stages = field_or_default<int>(j, "residual_stages");
    g.scale_clusters = field_or_default<uint32_t>(j, "scale_clusters");
    g.outlier_percent = field_or_default<double>(j, "outlier_percent");
    g.seed = j.value("seed", uint64_t{0});
    g.threads = j.value("threads", 0);
    return g;
}

std::vector<QuantConfig> materialize_grid(const SweepGrid& grid) {
    const QuantConfig defaults;
    const auto grs = or_single(grid.group_rows, defaults.group_rows);
    const auto gcs = or_single(grid.group_cols, defaults.group_cols);
    const auto vds = or_single(grid.vector_dim, defaults.vector_dim);
    const auto ks = or_single(grid.codebook_size, defaults.codebook_size);
    const auto stages =
            or_single(grid.residual_stages, defaults.residual_stages);
    const auto scs = or_single(grid.scale_clusters, defaults.scale_clusters);
    const auto ops =
            or_single(grid.outlier_percent, defaults.outlier_percent);

    std::vector<QuantConfig> configs;
    for (int64_t gr : grs) {
        for (int64_t gc : gcs) {
            for (int64_t vd : vds) {
                for (uint32_t k : ks) {
                    for (int st : stages) {
                        for (uint32_t sc : scs) {
                            for (double op : ops) {
                                QuantConfig c;
                                c.group_rows = gr;
                                c.group_cols = gc;
                                c.vector_dim = vd;
                                c.codebook_size = k;
                                c.residual_stages = st;
                                c.scale_clusters = sc;
                                c.outlier_percent = op;
                                c.seed = grid.seed;
                                configs.push_back(c);
                            }
                        }
                    }
                }
            }
        }
    }
    check(!configs.empty(), "sweep grid is empty");
    return configs;
}

SweepResult run_sweep(const WeightMatrix& w, const SweepGrid& grid,
                      bool measure_time) {
    const std::vector<QuantConfig> configs = materialize_grid(grid);
    const size_t n = configs.size();

    std::vector<int> valid(n, 0);
    std::vector<std::string> reasons(n);
    for (size_t i = 0; i < n; ++i) {
        try {
            validate_config(configs[i]);
            valid[i] = 1;
        } catch (const Error& e) {
            reasons[i] = e.what();
        }
    }

    std::vector<SweepPoint> slots(n);
    const int workers = effective_threads(grid.threads);
    parallel_for(static_cast<int64_t>(n), workers, [&](int64_t i) {
        if (!valid[i]) {
            return;
        }
        const auto t0 = std::chrono::steady_clock::now();
        // Group-level parallelism already happens per config; configs
        // themselves run on the sweep's workers.
        const CompressedLayer layer = compress_layer(w, configs[i], 1);
        const WeightMatrix recon = reconstruct_layer(layer);
        const auto t1 = std::chrono::steady_clock::now();
        slots[i].point.bpp = bpp(layer);
        slots[i].point.mse = mse(w, recon);
        slots[i].point.config = configs[i];
        if (measure_time) {
            slots[i].wall_ms =
                    std::chrono::duration<double, std::milli>(t1 - t0)
                            .count();
        }
    });

    SweepResult res;
    for (size_t i = 0; i < n; ++i) {
        if (valid[i]) {
            res.points.push_back(std::move(slots[i]));
        } else {
            res.skipped.push_back("config " + std::to_string(i) +
                                  " skipped: " + reasons[i]);
        }
    }
    check(!res.points.empty(), "all sweep configs were invalid");
    return res;
}

Frontier pareto(const std::vector<RdPoint>& points) {
    check(!points.empty(), "pareto: empty input");
    std::vector<RdPoint> sorted = points;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const RdPoint& a, const RdPoint& b) {
                         if (a.bpp != b.bpp) {
                             return a.bpp < b.bpp;
                         }
                         return a.mse < b.mse;
                     });
    Frontier f;
    double best_mse = std::numeric_limits<double>::infinity();
    double last_bpp = -std::numeric_limits<double>::infinity();
    for (const RdPoint& p : sorted) {
        if (p.bpp == last_bpp) {
            continue; // equal bpp collapses to its min-mse representative
        }
        if (p.mse < best_mse) {
            f.points.push_back(p);
            best_mse = p.mse;
            last_bpp = p.bpp;
        }
    }
    return f;
}

} // namespace wg
