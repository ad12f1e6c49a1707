#pragma once

#include "weightguard/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wg {

// On-disk model container: a UTF-8 JSON manifest plus a packed blob of
// little-endian IEEE-754 binary32 values. Round-trips are bit-exact.
struct TensorEntry {
    std::string name;
    int64_t rows = 0;
    int64_t cols = 0;
    int64_t byte_offset = 0;
    int64_t byte_length = 0;
};

struct ModelManifest {
    std::vector<TensorEntry> tensors;
    int64_t total_params = 0;
};

struct Model {
    ModelManifest manifest;
    std::vector<WeightMatrix> tensors;

    const WeightMatrix& tensor(const std::string& name) const;
};

Model load_model(const std::string& manifest_path,
                 const std::string& blob_path);

void save_model(const std::vector<WeightMatrix>& tensors,
                const std::string& manifest_path,
                const std::string& blob_path);

// Little-endian binary32 encode/decode used by the blob and by the
// compressed-layer container.
void store_f32_le(float v, unsigned char out[4]);
float load_f32_le(const unsigned char in[4]);

} // namespace wg
