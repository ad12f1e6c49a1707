#include "weightguard/container.hpp"

#include "weightguard/common.hpp"
#include "weightguard/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

namespace wg {

namespace {

constexpr const char* kFormatName = "weightguard-model";
constexpr int kFormatVersion = 1;

} // namespace

void store_f32_le(float v, unsigned char out[4]) {
    const uint32_t bits = std::bit_cast<uint32_t>(v);
    out[0] = static_cast<unsigned char>(bits & 0xff);
    out[1] = static_cast<unsigned char>((bits >> 8) & 0xff);
    out[2] = static_cast<unsigned char>((bits >> 16) & 0xff);
    out[3] = static_cast<unsigned char>((bits >> 24) & 0xff);
}

float load_f32_le(const unsigned char in[4]) {
    const uint32_t bits = static_cast<uint32_t>(in[0]) |
                          (static_cast<uint32_t>(in[1]) << 8) |
                          (static_cast<uint32_t>(in[2]) << 16) |
                          (static_cast<uint32_t>(in[3]) << 24);
    return std::bit_cast<float>(bits);
}

const WeightMatrix& Model::tensor(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) {
            return t;
        }
    }
    throw Error("model has no tensor named '" + name + "'");
}

Model load_model(const std::string& manifest_path,
                 const std::string& blob_path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file_bytes(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed manifest " + manifest_path + ": " + e.what());
    }

    check(doc.is_object(), "malformed manifest: not a JSON object");
    check(doc.value("format", "") == kFormatName,
          "malformed manifest: unexpected format field");
    check(doc.value("version", 0) == kFormatVersion,
          "malformed manifest: unsupported version");
    check(doc.value("element_type", "") == "f32",
          "malformed manifest: element_type must be f32");
    check(doc.contains("tensors") && doc["tensors"].is_array(),
          "malformed manifest: missing tensors array");
    check(doc.contains("total_params") &&
                  doc["total_params"].is_number_integer(),
          "malformed manifest: missing total_params");

    const std::string blob = read_file_bytes(blob_path);
    const int64_t blob_len = static_cast<int64_t>(blob.size());

    Model model;
    model.manifest.total_params = doc["total_params"].get<int64_t>();

    std::set<std::string> names;
    int64_t params = 0;
    std::vector<std::pair<int64_t, int64_t>> spans;
    for (const auto& jt : doc["tensors"]) {
        TensorEntry e;
        try {
            e.name = jt.at("name").get<std::string>();
            e.rows = jt.at("rows").get<int64_t>();
            e.cols = jt.at("cols").get<int64_t>();
            e.byte_offset = jt.at("byte_offset").get<int64_t>();
            e.byte_length = jt.at("byte_length").get<int64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(std::string("malformed manifest tensor entry: ") +
                        e.what());
        }
        check(names.insert(e.name).second,
              "manifest declares duplicate tensor name '" + e.name + "'");
        check(e.rows >= 1 && e.cols >= 1,
              "tensor '" + e.name + "': non-positive shape");
        check(e.byte_length == e.rows * e.cols * 4,
              "tensor '" + e.name + "': byte_length does not match shape");
        check(e.byte_offset >= 0 && e.byte_offset + e.byte_length <= blob_len,
              "tensor '" + e.name + "': offset out of range of blob");
        spans.emplace_back(e.byte_offset, e.byte_offset + e.byte_length);
        params += e.rows * e.cols;

        std::vector<float> values(static_cast<size_t>(e.rows * e.cols));
        const auto* base =
                reinterpret_cast<const unsigned char*>(blob.data()) +
                e.byte_offset;
        for (size_t i = 0; i < values.size(); ++i) {
            values[i] = load_f32_le(base + 4 * i);
            check(std::isfinite(values[i]),
                  "tensor '" + e.name + "': non-finite value in blob");
        }
        model.tensors.push_back(
                WeightMatrix{e.name, e.rows, e.cols, std::move(values)});
        model.manifest.tensors.push_back(std::move(e));
    }

    std::sort(spans.begin(), spans.end());
    for (size_t i = 1; i < spans.size(); ++i) {
        check(spans[i].first >= spans[i - 1].second,
              "manifest declares overlapping tensor offsets");
    }
    check(params == model.manifest.total_params,
          "manifest total_params does not match tensor shapes");
    return model;
}

void save_model(const std::vector<WeightMatrix>& tensors,
                const std::string& manifest_path,
                const std::string& blob_path) {
    std::set<std::string> names;
    for (const auto& t : tensors) {
        check(names.insert(t.name).second,
              "duplicate tensor name '" + t.name + "'");
        check(t.rows >= 1 && t.cols >= 1,
              "tensor '" + t.name + "': non-positive shape");
        check(static_cast<int64_t>(t.values.size()) == t.size(),
              "tensor '" + t.name + "': value count does not match shape");
        validate_finite(t);
    }

    std::string blob;
    nlohmann::ordered_json jtensors = nlohmann::ordered_json::array();
    int64_t offset = 0;
    int64_t params = 0;
    for (const auto& t : tensors) {
        const int64_t len = t.size() * 4;
        jtensors.push_back({{"name", t.name},
                            {"rows", t.rows},
                            {"cols", t.cols},
                            {"byte_offset", offset},
                            {"byte_length", len}});
        blob.resize(blob.size() + static_cast<size_t>(len));
        auto* base = reinterpret_cast<unsigned char*>(blob.data()) + offset;
        for (int64_t i = 0; i < t.size(); ++i) {
            store_f32_le(t.values[static_cast<size_t>(i)], base + 4 * i);
        }
        offset += len;
        params += t.size();
    }

    nlohmann::ordered_json doc;
    doc["format"] = kFormatName;
    doc["version"] = kFormatVersion;
    doc["element_type"] = "f32";
    doc["total_params"] = params;
    doc["tensors"] = std::move(jtensors);

    write_file_atomic(manifest_path, doc.dump(2) + "\n");
    write_file_atomic(blob_path, blob);
}

} // namespace wg
