#include "weightguard/watermark.hpp"

#include "weightguard/bch.hpp"
#include "weightguard/common.hpp"
#include "weightguard/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace wg {

namespace {

std::vector<uint8_t> payload_bits(const WatermarkKey& key) {
    std::vector<uint8_t> bits(128);
    for (int k = 0; k < 128; ++k) {
        bits[static_cast<size_t>(k)] =
                static_cast<uint8_t>((key.payload[static_cast<size_t>(k / 8)] >>
                                      (k % 8)) &
                                     1);
    }
    return bits;
}

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') {
        return c - '0';
    }
    if (c >= 'a' && c <= 'f') {
        return c - 'a' + 10;
    }
    if (c >= 'A' && c <= 'F') {
        return c - 'A' + 10;
    }
    throw Error(std::string("bad hex digit in key payload: ") + c);
}

} // namespace

void validate_key(const WatermarkKey& key) {
    check(key.spread_length == 640,
          "watermark key: spread length must be 640");
    check(key.index_budget >= 1, "watermark key: index budget must be >= 1");
    check(key.eta >= 0.0, "watermark key: eta must be non-negative");
    check(!key.layer.empty(), "watermark key: layer name is required");
}

WatermarkKey parse_key_text(const std::string& text) {
    WatermarkKey key;
    bool saw_payload = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        check(eq != std::string::npos, "key file: bad line: " + line);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string()
                                          : s.substr(b, e - b + 1);
        };
        const std::string k = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        if (k == "payload_hex") {
            check(v.size() == 32, "key file: payload_hex must be 32 digits");
            for (int i = 0; i < 16; ++i) {
                key.payload[static_cast<size_t>(i)] = static_cast<uint8_t>(
                        (hex_nibble(v[static_cast<size_t>(2 * i)]) << 4) |
                        hex_nibble(v[static_cast<size_t>(2 * i + 1)]));
            }
            saw_payload = true;
        } else if (k == "index_seed") {
            key.index_seed = std::stoull(v);
        } else if (k == "spread_seed") {
            key.spread_seed = std::stoull(v);
        } else if (k == "R") {
            key.index_budget = std::stoull(v);
        } else if (k == "L") {
            key.spread_length = static_cast<uint32_t>(std::stoul(v));
        } else if (k == "eta") {
            key.eta = std::stod(v);
        } else if (k == "layer") {
            key.layer = v;
        } else {
            throw Error("key file: unknown field '" + k + "'");
        }
    }
    check(saw_payload, "key file: missing payload_hex");
    validate_key(key);
    return key;
}

std::string key_to_text(const WatermarkKey& key) {
    std::ostringstream out;
    out << "payload_hex = ";
    for (uint8_t b : key.payload) {
        char buf[3];
        std::snprintf(buf, sizeof(buf), "%02x", b);
        out << buf;
    }
    out << "\nindex_seed = " << key.index_seed;
    out << "\nspread_seed = " << key.spread_seed;
    out << "\nR = " << key.index_budget;
    out << "\nL = " << key.spread_length;
    out << "\neta = " << key.eta;
    out << "\nlayer = " << key.layer << "\n";
    return out.str();
}

std::vector<uint8_t> derive_codeword(const WatermarkKey& key) {
    validate_key(key);
    std::vector<uint8_t> message = payload_bits(key);
    message.resize(static_cast<size_t>(BchCode::k_payload), 0); // message padding
    std::vector<uint8_t> code = bch511().encode(message);
    code.resize(key.spread_length, 0); // length padding
    return code;
}

Carrier build_carrier(const WatermarkKey& key, double sigma_w,
                      int64_t tensor_size) {
    validate_key(key);
    check(sigma_w > 0.0, "build_carrier: sigma_W must be positive");
    check(key.index_budget <= static_cast<uint64_t>(tensor_size),
          "build_carrier: index budget exceeds tensor size");

    const std::vector<uint8_t> code = derive_codeword(key);
    const size_t r_budget = key.index_budget;

    Carrier carrier;
    carrier.gamma = key.eta * sigma_w /
                    std::sqrt(static_cast<double>(r_budget));
    RngStream index_rng(key.index_seed, "wm/index");
    carrier.indices = index_rng.sample_indices(
            static_cast<uint64_t>(tensor_size), r_budget);

    // Spreading matrix streamed in k-major order; both embed and decode
    // walk it the same way so S never has to be materialized.
    carrier.delta.assign(r_budget, 0.0);
    RngStream spread_rng(key.spread_seed, "wm/spread");
    for (uint32_t k = 0; k < key.spread_length; ++k) {
        const double b = code[k] ? 1.0 : -1.0;
        for (size_t r = 0; r < r_budget; ++r) {
            carrier.delta[r] += b * spread_rng.rademacher();
        }
    }
    for (double& d : carrier.delta) {
        d *= carrier.gamma;
    }
    return carrier;
}

void orthogonalize(Carrier& carrier, std::span<const double> gradient_on_i) {
    check(gradient_on_i.size() == carrier.delta.size(),
          "orthogonalize: gradient restricted to I has wrong length");
    double g_norm2 = 0.0;
    double g_dot_d = 0.0;
    for (size_t i = 0; i < carrier.delta.size(); ++i) {
        g_norm2 += gradient_on_i[i] * gradient_on_i[i];
        g_dot_d += gradient_on_i[i] * carrier.delta[i];
    }
    if (g_norm2 == 0.0) {
        carrier.zero_gradient_flagged = true;
        return;
    }
    const double coef = g_dot_d / g_norm2;
    for (size_t i = 0; i < carrier.delta.size(); ++i) {
        carrier.delta[i] -= coef * gradient_on_i[i];
    }
}

WeightMatrix wm_embed(const WeightMatrix& w, const WatermarkKey& key,
                      const std::optional<std::vector<double>>& gradient) {
    validate_key(key);
    check(w.size() >= 2, "wm_embed: tensor too small");
    if (gradient) {
        check(gradient->size() == static_cast<size_t>(w.size()),
              "wm_embed: gradient shape does not match tensor");
    }
    const double sigma_w = sample_std(w.values);
    check(sigma_w > 0.0, "wm_embed: constant tensor has no spread scale");

    Carrier carrier = build_carrier(key, sigma_w, w.size());
    if (gradient) {
        std::vector<double> g_on_i(carrier.indices.size());
        for (size_t r = 0; r < carrier.indices.size(); ++r) {
            g_on_i[r] = (*gradient)[carrier.indices[r]];
        }
        orthogonalize(carrier, g_on_i);
    }

    WeightMatrix marked = w;
    for (size_t r = 0; r < carrier.indices.size(); ++r) {
        if (carrier.delta[r] == 0.0) {
            continue; // keep the bit pattern when there is nothing to add
        }
        const size_t i = carrier.indices[r];
        marked.values[i] = static_cast<float>(
                static_cast<double>(w.values[i]) + carrier.delta[r]);
    }
    validate_finite(marked);
    return marked;
}

WmDecodeResult wm_decode(const WeightMatrix& w, const WatermarkKey& key) {
    validate_key(key);
    check(key.index_budget <= static_cast<uint64_t>(w.size()),
          "wm_decode: index budget exceeds tensor size");

    WmDecodeResult res;
    const double sigma_w = w.size() >= 2 ? sample_std(w.values) : 0.0;
    if (sigma_w <= 0.0) {
        return res; // constant tensor cannot carry this mark
    }
    const double gamma = key.eta > 0.0
                                 ? key.eta * sigma_w /
                                           std::sqrt(static_cast<double>(
                                                   key.index_budget))
                                 : 1.0;

    RngStream index_rng(key.index_seed, "wm/index");
    const std::vector<uint64_t> indices = index_rng.sample_indices(
            static_cast<uint64_t>(w.size()), key.index_budget);

    res.correlations.assign(key.spread_length, 0.0);
    RngStream spread_rng(key.spread_seed, "wm/spread");
    for (uint32_t k = 0; k < key.spread_length; ++k) {
        double acc = 0.0;
        for (const uint64_t j : indices) {
            acc += static_cast<double>(w.values[j]) * spread_rng.rademacher();
        }
        res.correlations[k] =
                acc / (gamma * static_cast<double>(key.index_budget));
    }

    std::vector<uint8_t> hard(key.spread_length);
    for (uint32_t k = 0; k < key.spread_length; ++k) {
        hard[k] = res.correlations[k] > 0.0 ? 1 : 0;
    }
    const std::vector<uint8_t> expected = derive_codeword(key);
    int mismatches = 0;
    for (uint32_t k = 0; k < key.spread_length; ++k) {
        mismatches += hard[k] != expected[k];
    }
    res.raw_ber = static_cast<double>(mismatches) /
                  static_cast<double>(key.spread_length);

    std::vector<uint8_t> code_bits(hard.begin(),
                                   hard.begin() + BchCode::n);
    const BchCode::DecodeResult dec = bch511().decode(std::move(code_bits));
    res.decode_ok = dec.ok;
    res.corrections = dec.corrections;
    if (dec.ok) {
        res.message = dec.payload;
        std::vector<uint8_t> expected_message = payload_bits(key);
        expected_message.resize(static_cast<size_t>(BchCode::k_payload), 0);
        res.attributed = res.message == expected_message;
    }
    return res;
}

SnrReport snr_margins(const WeightMatrix& w, const WatermarkKey& key) {
    const WmDecodeResult dec = wm_decode(w, key);
    const std::vector<uint8_t> expected = derive_codeword(key);

    SnrReport report;
    double mean = 0.0;
    for (int k = 0; k < BchCode::n; ++k) {
        const double b = expected[static_cast<size_t>(k)] ? 1.0 : -1.0;
        mean += b * dec.correlations[static_cast<size_t>(k)];
    }
    mean /= BchCode::n;
    double var = 0.0;
    for (int k = 0; k < BchCode::n; ++k) {
        const double b = expected[static_cast<size_t>(k)] ? 1.0 : -1.0;
        const double d = b * dec.correlations[static_cast<size_t>(k)] - mean;
        var += d * d;
    }
    var /= (BchCode::n - 1);
    report.mean_margin = mean;
    report.std_margin = std::sqrt(var);
    if (report.std_margin == 0.0) {
        report.snr_db = std::numeric_limits<double>::infinity();
    } else if (mean <= 0.0) {
        report.snr_db = -std::numeric_limits<double>::infinity();
    } else {
        report.snr_db = 20.0 * std::log10(mean / report.std_margin);
    }
    return report;
}

SnrReport wm_snr(const WeightMatrix& w_current,
                 const WeightMatrix& w_original, const WatermarkKey& key) {
    check(w_current.rows == w_original.rows &&
                  w_current.cols == w_original.cols,
          "wm_snr: tensor shapes differ");
    SnrReport report = snr_margins(w_current, key);
    double diff = 0.0;
    double base = 0.0;
    for (size_t i = 0; i < w_current.values.size(); ++i) {
        const double d = static_cast<double>(w_current.values[i]) -
                         static_cast<double>(w_original.values[i]);
        diff += d * d;
        base += static_cast<double>(w_original.values[i]) *
                static_cast<double>(w_original.values[i]);
    }
    report.drift = base > 0.0 ? std::sqrt(diff) / std::sqrt(base)
                              : std::sqrt(diff);
    return report;
}

} // namespace wg
