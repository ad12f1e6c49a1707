#pragma once

#include "weightguard/tensor.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wg {

// Secret material needed to embed and later verify a forensic mark.
// payload bit k is bit (k%8) of byte k/8, LSB first.
struct WatermarkKey {
    std::array<uint8_t, 16> payload{}; // 128-bit payload
    uint64_t index_seed = 0;           // selects the index set I, |I| = R
    uint64_t spread_seed = 0;          // Rademacher spreading matrix S
    uint64_t index_budget = 25600;     // R, default 40 * L
    uint32_t spread_length = 640;      // L, fixed by the code layout
    double eta = 6.0;                  // amplitude multiplier
    std::string layer;                 // tensor the mark belongs to
};

void validate_key(const WatermarkKey& key);

// Text key file: `key = value` lines with payload in hex. Treated as a
// secret by the tooling.
WatermarkKey parse_key_text(const std::string& text);
std::string key_to_text(const WatermarkKey& key);

// payload(128) -> zero-pad to 447 -> BCH(511) -> zero-pad to L = 640.
std::vector<uint8_t> derive_codeword(const WatermarkKey& key);

// Sparse additive mark over the key's index set.
struct Carrier {
    std::vector<uint64_t> indices; // I, flat positions into the tensor
    std::vector<double> delta;     // delta-w per index
    double gamma = 0.0;            // eta * sigma_W / sqrt(R)
    bool zero_gradient_flagged = false;
};

// delta-w_r = gamma * sum_k b_k S_kr with b = 2c - 1.
Carrier build_carrier(const WatermarkKey& key, double sigma_w,
                      int64_t tensor_size);

// Projects the carrier orthogonal to the gradient restricted to I:
// delta-w -= (g.delta-w / ||g||^2) g. A zero gradient leaves the carrier
// unchanged and sets the flag.
void orthogonalize(Carrier& carrier, std::span<const double> gradient_on_i);

// W + projected carrier on I; every entry off I keeps its bit pattern.
// `gradient` is a full-tensor gradient (same size as W) and is restricted
// to I internally; pass std::nullopt to skip the projection.
WeightMatrix wm_embed(const WeightMatrix& w, const WatermarkKey& key,
                      const std::optional<std::vector<double>>& gradient);

struct WmDecodeResult {
    bool decode_ok = false;   // BCH decode produced a message
    bool attributed = false;  // message equals the key's padded payload
    std::vector<uint8_t> message; // 447 bits when decode_ok
    int corrections = 0;
    std::vector<double> correlations; // r_k, L entries
    double raw_ber = 0.0; // hard bits vs re-derived codeword, over L
};

// r_k = (1/(gamma R)) sum_{j in I} W_j S_kj, thresholded at zero.
// gamma is re-derived from the tensor's current standard deviation; the
// hard bits and margins are invariant to that positive rescaling.
WmDecodeResult wm_decode(const WeightMatrix& w, const WatermarkKey& key);

struct SnrReport {
    double snr_db = 0.0;     // 20 log10(mean(m)/std(m)), m_k = b_k r_k over
                             // the 511 code bits; +inf when std == 0
    double mean_margin = 0.0;
    double std_margin = 0.0;
    double drift = 0.0;      // ||W_cur - W_orig||_F / ||W_orig||_F
};

SnrReport wm_snr(const WeightMatrix& w_current,
                 const WeightMatrix& w_original, const WatermarkKey& key);

// Margin statistics without a reference tensor (drift reported as 0).
SnrReport snr_margins(const WeightMatrix& w, const WatermarkKey& key);

} // namespace wg
