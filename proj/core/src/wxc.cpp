#include "weightguard/wxc.hpp"

#include "weightguard/common.hpp"
#include "weightguard/report.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>

namespace wg {

namespace {

constexpr char kMagic[4] = {'W', 'X', 'C', '1'};
constexpr unsigned char kVersion = 1;

uint32_t bits_for(uint64_t n) {
    return n <= 1 ? 0 : static_cast<uint32_t>(std::bit_width(n - 1));
}

class BitWriter {
  public:
    void put(uint64_t value, uint32_t width) {
        for (uint32_t b = 0; b < width; ++b) {
            if (bit_pos_ == 0) {
                bytes_.push_back(0);
            }
            if ((value >> b) & 1) {
                bytes_.back() |= static_cast<unsigned char>(1u << bit_pos_);
            }
            bit_pos_ = (bit_pos_ + 1) % 8;
        }
        total_bits_ += width;
    }

    void put_f32(float v) { put(std::bit_cast<uint32_t>(v), 32); }

    uint64_t total_bits() const { return total_bits_; }
    const std::string& bytes() const { return bytes_; }

  private:
    std::string bytes_;
    uint32_t bit_pos_ = 0;
    uint64_t total_bits_ = 0;
};

class BitReader {
  public:
    BitReader(const std::string& bytes, size_t offset)
            : bytes_(bytes), byte_pos_(offset) {}

    uint64_t get(uint32_t width) {
        uint64_t value = 0;
        for (uint32_t b = 0; b < width; ++b) {
            check(byte_pos_ < bytes_.size(),
                  "corrupt artifact: payload truncated");
            const unsigned char byte =
                    static_cast<unsigned char>(bytes_[byte_pos_]);
            if ((byte >> bit_pos_) & 1) {
                value |= (uint64_t{1} << b);
            }
            if (++bit_pos_ == 8) {
                bit_pos_ = 0;
                ++byte_pos_;
            }
        }
        return value;
    }

    float get_f32() {
        return std::bit_cast<float>(static_cast<uint32_t>(get(32)));
    }

    uint64_t bits_consumed(size_t payload_start) const {
        return (byte_pos_ - payload_start) * 8 + bit_pos_;
    }

    // Remaining bits in the current and trailing bytes must be zero.
    void check_zero_padding() {
        while (byte_pos_ < bytes_.size()) {
            const unsigned char byte =
                    static_cast<unsigned char>(bytes_[byte_pos_]);
            check((byte >> bit_pos_) == 0,
                  "corrupt artifact: nonzero padding bits");
            bit_pos_ = 0;
            ++byte_pos_;
        }
    }

  private:
    const std::string& bytes_;
    size_t byte_pos_;
    uint32_t bit_pos_ = 0;
};

nlohmann::ordered_json header_json(const CompressedLayer& layer) {
    const QuantConfig& c = layer.config;
    nlohmann::ordered_json h;
    h["name"] = layer.name;
    h["rows"] = layer.rows;
    h["cols"] = layer.cols;
    h["group_rows"] = c.group_rows;
    h["group_cols"] = c.group_cols;
    h["vector_dim"] = c.vector_dim;
    h["codebook_size"] = c.codebook_size;
    h["residual_stages"] = c.residual_stages;
    h["scale_clusters"] = c.scale_clusters;
    h["outlier_percent"] = c.outlier_percent;
    h["seed"] = c.seed;
    h["outlier_count"] = layer.outliers.size();
    h["payload_bits"] = payload_bits(layer);
    return h;
}

} // namespace

std::string serialize_wxc(const CompressedLayer& layer) {
    const std::string header = header_json(layer).dump();
    std::string out(kMagic, 4);
    out.push_back(static_cast<char>(kVersion));
    const uint32_t hlen = static_cast<uint32_t>(header.size());
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((hlen >> (8 * i)) & 0xff));
    }
    out += header;

    const QuantConfig& cfg = layer.config;
    const uint32_t index_width = bits_for(cfg.codebook_size);
    const uint32_t scale_width = bits_for(cfg.scale_clusters);
    const uint32_t row_width = bits_for(static_cast<uint64_t>(layer.rows));
    const uint32_t col_width = bits_for(static_cast<uint64_t>(layer.cols));

    BitWriter bw;
    for (const GroupCodes& g : layer.groups) {
        for (const StageCodes& st : g.stages) {
            for (float v : st.codebook) {
                bw.put_f32(v);
            }
        }
    }
    for (const GroupCodes& g : layer.groups) {
        for (const StageCodes& st : g.stages) {
            for (uint32_t idx : st.indices) {
                bw.put(idx, index_width);
            }
        }
    }
    for (float v : layer.scale_codebook) {
        bw.put_f32(v);
    }
    for (uint32_t idx : layer.scale_index) {
        bw.put(idx, scale_width);
    }
    for (const Outlier& o : layer.outliers) {
        bw.put(static_cast<uint64_t>(o.row), row_width);
        bw.put(static_cast<uint64_t>(o.col), col_width);
        bw.put_f32(o.value);
    }
    check(bw.total_bits() == payload_bits(layer),
          "internal error: payload bit accounting mismatch");
    out += bw.bytes();
    return out;
}

CompressedLayer deserialize_wxc(const std::string& bytes) {
    check(bytes.size() >= 9, "corrupt artifact: too short");
    check(std::memcmp(bytes.data(), kMagic, 4) == 0,
          "corrupt artifact: bad magic");
    check(static_cast<unsigned char>(bytes[4]) == kVersion,
          "corrupt artifact: unsupported version");
    uint32_t hlen = 0;
    for (int i = 0; i < 4; ++i) {
        hlen |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[5 + i]))
                << (8 * i);
    }
    check(bytes.size() >= 9 + static_cast<size_t>(hlen),
          "corrupt artifact: header truncated");

    nlohmann::json h;
    try {
        h = nlohmann::json::parse(bytes.substr(9, hlen));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("corrupt artifact: bad header: ") + e.what());
    }

    CompressedLayer layer;
    try {
        layer.name = h.at("name").get<std::string>();
        layer.rows = h.at("rows").get<int64_t>();
        layer.cols = h.at("cols").get<int64_t>();
        layer.config.group_rows = h.at("group_rows").get<int64_t>();
        layer.config.group_cols = h.at("group_cols").get<int64_t>();
        layer.config.vector_dim = h.at("vector_dim").get<int64_t>();
        layer.config.codebook_size = h.at("codebook_size").get<uint32_t>();
        layer.config.residual_stages = h.at("residual_stages").get<int>();
        layer.config.scale_clusters = h.at("scale_clusters").get<uint32_t>();
        layer.config.outlier_percent = h.at("outlier_percent").get<double>();
        layer.config.seed = h.at("seed").get<uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("corrupt artifact: header field: ") +
                    e.what());
    }
    validate_config(layer.config);
    check(layer.rows >= 1 && layer.cols >= 1,
          "corrupt artifact: bad shape");
    const uint64_t outlier_count = h.value("outlier_count", uint64_t{0});
    check(outlier_count <= static_cast<uint64_t>(layer.rows * layer.cols),
          "corrupt artifact: outlier count exceeds tensor size");

    const QuantConfig& cfg = layer.config;
    const std::vector<GroupExtent> tiles = tile_groups(
            layer.rows, layer.cols, cfg.group_rows, cfg.group_cols);
    const uint32_t index_width = bits_for(cfg.codebook_size);
    const uint32_t scale_width = bits_for(cfg.scale_clusters);
    const uint32_t row_width = bits_for(static_cast<uint64_t>(layer.rows));
    const uint32_t col_width = bits_for(static_cast<uint64_t>(layer.cols));

    BitReader br(bytes, 9 + hlen);
    layer.groups.resize(tiles.size());
    for (auto& g : layer.groups) {
        g.stages.resize(static_cast<size_t>(cfg.residual_stages));
        for (auto& st : g.stages) {
            st.codebook.resize(static_cast<size_t>(cfg.codebook_size *
                                                   cfg.vector_dim));
            for (auto& v : st.codebook) {
                v = br.get_f32();
            }
        }
    }
    for (size_t gi = 0; gi < tiles.size(); ++gi) {
        const int64_t vectors =
                (tiles[gi].elems() + cfg.vector_dim - 1) / cfg.vector_dim;
        for (auto& st : layer.groups[gi].stages) {
            st.indices.resize(static_cast<size_t>(vectors));
            for (auto& idx : st.indices) {
                idx = static_cast<uint32_t>(br.get(index_width));
            }
        }
    }
    layer.scale_codebook.resize(cfg.scale_clusters);
    for (auto& v : layer.scale_codebook) {
        v = br.get_f32();
    }
    layer.scale_index.resize(tiles.size());
    for (auto& idx : layer.scale_index) {
        idx = static_cast<uint32_t>(br.get(scale_width));
    }
    layer.outliers.resize(outlier_count);
    for (auto& o : layer.outliers) {
        o.row = static_cast<int64_t>(br.get(row_width));
        o.col = static_cast<int64_t>(br.get(col_width));
        o.value = br.get_f32();
    }
    check(br.bits_consumed(9 + hlen) == payload_bits(layer),
          "corrupt artifact: payload size mismatch");
    br.check_zero_padding();

    const uint64_t declared = h.value("payload_bits", uint64_t{0});
    check(declared == payload_bits(layer),
          "corrupt artifact: declared payload_bits mismatch");
    return layer;
}

void save_wxc(const CompressedLayer& layer, const std::string& path) {
    write_file_atomic(path, serialize_wxc(layer));
}

CompressedLayer load_wxc(const std::string& path) {
    return deserialize_wxc(read_file_bytes(path));
}

uint64_t wxc_overhead_bits(const CompressedLayer& layer) {
    const std::string header = header_json(layer).dump();
    const uint64_t header_bits = (4 + 1 + 4 + header.size()) * 8;
    const uint64_t pad = (8 - payload_bits(layer) % 8) % 8;
    return header_bits + pad;
}

} // namespace wg
