#pragma once

#include <cstdint>
#include <vector>

namespace wg {

// Primitive narrow-sense BCH code of length 511 over GF(2^9) with design
// correction capacity t = 7, giving dimension 448. One data bit is
// reserved as a fixed zero so the usable payload is 447 bits and the wire
// layout is payload(447) | reserved(1) | parity(63).
//
// GF(2^9) uses the primitive polynomial x^9 + x^4 + 1. Decoding is
// syndrome computation, Berlekamp-Massey, and Chien search.
class BchCode {
  public:
    static constexpr int n = 511;
    static constexpr int k_code = 448;
    static constexpr int k_payload = 447;
    static constexpr int t = 7;

    BchCode();

    // payload -> systematic 511-bit codeword (values 0/1).
    std::vector<uint8_t> encode(const std::vector<uint8_t>& payload) const;

    struct DecodeResult {
        bool ok = false;
        std::vector<uint8_t> payload; // k_payload bits when ok
        int corrections = 0;
    };

    // Corrects up to t bit errors; beyond capacity it reports failure or
    // (rarely) miscorrects to a different codeword, which callers detect
    // by payload mismatch. Never throws on bad bits.
    DecodeResult decode(std::vector<uint8_t> received) const;

    bool is_codeword(const std::vector<uint8_t>& bits) const;

    int generator_degree() const { return static_cast<int>(generator_.size()) - 1; }

  private:
    uint16_t gf_mul(uint16_t a, uint16_t b) const;
    uint16_t gf_inv(uint16_t a) const;
    std::vector<uint16_t> syndromes(const std::vector<uint8_t>& bits) const;

    std::vector<uint16_t> exp_; // alpha^i, i in [0, 1022)
    std::vector<uint16_t> log_; // log_[alpha^i] = i
    std::vector<uint8_t> generator_; // GF(2) coefficients, degree n-k_code
};

// Process-wide instance; table construction is done once.
const BchCode& bch511();

} // namespace wg
