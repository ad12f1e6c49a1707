#include "weightguard/bch.hpp"

#include "weightguard/common.hpp"

#include <array>
#include <set>

namespace wg {

namespace {

constexpr int kFieldOrder = 511;        // 2^9 - 1
constexpr uint32_t kPrimPoly = 0x211;   // x^9 + x^4 + 1

} // namespace

BchCode::BchCode() {
    exp_.resize(2 * kFieldOrder);
    log_.assign(kFieldOrder + 1, 0);
    uint32_t x = 1;
    for (int i = 0; i < kFieldOrder; ++i) {
        exp_[static_cast<size_t>(i)] = static_cast<uint16_t>(x);
        log_[x] = static_cast<uint16_t>(i);
        x <<= 1;
        if (x & 0x200) {
            x ^= kPrimPoly;
        }
    }
    check(x == 1, "GF(2^9) generator polynomial is not primitive");
    for (int i = kFieldOrder; i < 2 * kFieldOrder; ++i) {
        exp_[static_cast<size_t>(i)] = exp_[static_cast<size_t>(i - kFieldOrder)];
    }

    // Generator: product of (x + alpha^j) over the cyclotomic cosets of
    // 1, 3, ..., 2t-1 mod 511. Coefficients land back in GF(2).
    std::set<int> roots;
    for (int i = 1; i <= 2 * t; ++i) {
        int j = i;
        do {
            roots.insert(j);
            j = (2 * j) % kFieldOrder;
        } while (j != i);
    }
    std::vector<uint16_t> poly{1};
    for (int r : roots) {
        std::vector<uint16_t> next(poly.size() + 1, 0);
        const uint16_t root = exp_[static_cast<size_t>(r)];
        for (size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] ^= poly[i];          // x * poly
            next[i] ^= gf_mul(poly[i], root); // alpha^r * poly
        }
        poly = std::move(next);
    }
    check(static_cast<int>(poly.size()) - 1 == n - k_code,
          "BCH generator degree mismatch");
    generator_.resize(poly.size());
    for (size_t i = 0; i < poly.size(); ++i) {
        check(poly[i] <= 1, "BCH generator has non-binary coefficient");
        generator_[i] = static_cast<uint8_t>(poly[i]);
    }
}

uint16_t BchCode::gf_mul(uint16_t a, uint16_t b) const {
    if (a == 0 || b == 0) {
        return 0;
    }
    return exp_[static_cast<size_t>(log_[a] + log_[b])];
}

uint16_t BchCode::gf_inv(uint16_t a) const {
    check(a != 0, "GF(2^9): inverse of zero");
    return exp_[static_cast<size_t>(kFieldOrder - log_[a])];
}

std::vector<uint8_t> BchCode::encode(const std::vector<uint8_t>& payload) const {
    check(payload.size() == static_cast<size_t>(k_payload),
          "bch_encode: payload must be exactly 447 bits");
    // Wire layout: data bits d[0..447] (d[447] reserved zero), then parity.
    // Internally d[j] is the coefficient of x^(deg_g + j); parity bits are
    // the remainder of the shifted message divided by the generator.
    const int deg_g = n - k_code;
    std::array<uint8_t, 511> coeff{};
    for (int j = 0; j < k_payload; ++j) {
        check(payload[static_cast<size_t>(j)] <= 1,
              "bch_encode: payload bits must be 0/1");
        coeff[static_cast<size_t>(deg_g + j)] = payload[static_cast<size_t>(j)];
    }
    // Long division (message * x^deg_g) mod generator, over GF(2).
    std::array<uint8_t, 511> rem = coeff;
    for (int i = n - 1; i >= deg_g; --i) {
        if (!rem[static_cast<size_t>(i)]) {
            continue;
        }
        for (int j = 0; j <= deg_g; ++j) {
            rem[static_cast<size_t>(i - deg_g + j)] ^= generator_[static_cast<size_t>(j)];
        }
    }
    std::vector<uint8_t> wire(static_cast<size_t>(n), 0);
    for (int j = 0; j < k_code; ++j) {
        wire[static_cast<size_t>(j)] = coeff[static_cast<size_t>(deg_g + j)];
    }
    for (int i = 0; i < deg_g; ++i) {
        wire[static_cast<size_t>(k_code + i)] = rem[static_cast<size_t>(i)];
    }
    return wire;
}

std::vector<uint16_t> BchCode::syndromes(const std::vector<uint8_t>& bits) const {
    // Coefficient of x^p for wire bit w: data bits sit above the parity.
    const int deg_g = n - k_code;
    std::vector<uint16_t> s(static_cast<size_t>(2 * t + 1), 0);
    for (int w = 0; w < n; ++w) {
        if (!bits[static_cast<size_t>(w)]) {
            continue;
        }
        const int p = w < k_code ? deg_g + w : w - k_code;
        for (int i = 1; i <= 2 * t; ++i) {
            s[static_cast<size_t>(i)] = static_cast<uint16_t>(
                    s[static_cast<size_t>(i)] ^
                    exp_[static_cast<size_t>((i * p) % kFieldOrder)]);
        }
    }
    return s;
}

bool BchCode::is_codeword(const std::vector<uint8_t>& bits) const {
    check(bits.size() == static_cast<size_t>(n), "is_codeword: need 511 bits");
    for (const uint16_t s : syndromes(bits)) {
        if (s != 0) {
            return false;
        }
    }
    return true;
}

BchCode::DecodeResult BchCode::decode(std::vector<uint8_t> received) const {
    check(received.size() == static_cast<size_t>(n),
          "bch_decode: need exactly 511 bits");
    for (uint8_t b : received) {
        check(b <= 1, "bch_decode: bits must be 0/1");
    }
    DecodeResult res;

    std::vector<uint16_t> s = syndromes(received);
    bool clean = true;
    for (int i = 1; i <= 2 * t; ++i) {
        clean = clean && s[static_cast<size_t>(i)] == 0;
    }

    if (!clean) {
        // Berlekamp-Massey for the error locator Lambda(x).
        std::vector<uint16_t> c{1};
        std::vector<uint16_t> b{1};
        int l = 0;
        int m = 1;
        uint16_t bb = 1;
        for (int step = 0; step < 2 * t; ++step) {
            uint16_t d = s[static_cast<size_t>(step + 1)];
            for (int i = 1; i <= l && i < static_cast<int>(c.size()); ++i) {
                d = static_cast<uint16_t>(
                        d ^ gf_mul(c[static_cast<size_t>(i)],
                                   s[static_cast<size_t>(step + 1 - i)]));
            }
            if (d == 0) {
                ++m;
            } else if (2 * l <= step) {
                const std::vector<uint16_t> prev = c;
                const uint16_t coef = gf_mul(d, gf_inv(bb));
                if (c.size() < b.size() + static_cast<size_t>(m)) {
                    c.resize(b.size() + static_cast<size_t>(m), 0);
                }
                for (size_t i = 0; i < b.size(); ++i) {
                    c[i + static_cast<size_t>(m)] = static_cast<uint16_t>(
                            c[i + static_cast<size_t>(m)] ^ gf_mul(coef, b[i]));
                }
                l = step + 1 - l;
                b = prev;
                bb = d;
                m = 1;
            } else {
                const uint16_t coef = gf_mul(d, gf_inv(bb));
                if (c.size() < b.size() + static_cast<size_t>(m)) {
                    c.resize(b.size() + static_cast<size_t>(m), 0);
                }
                for (size_t i = 0; i < b.size(); ++i) {
                    c[i + static_cast<size_t>(m)] = static_cast<uint16_t>(
                            c[i + static_cast<size_t>(m)] ^ gf_mul(coef, b[i]));
                }
                ++m;
            }
        }
        if (l > t) {
            return res; // beyond design capacity
        }

        // Chien search: error at coefficient p iff Lambda(alpha^-p) == 0.
        const int deg_g = n - k_code;
        std::vector<int> error_positions;
        for (int p = 0; p < n; ++p) {
            uint16_t acc = 0;
            for (size_t i = 0; i < c.size(); ++i) {
                if (c[i] == 0) {
                    continue;
                }
                const int e = static_cast<int>(
                        (static_cast<int64_t>(log_[c[i]]) +
                         static_cast<int64_t>(i) * (kFieldOrder - p)) %
                        kFieldOrder);
                acc = static_cast<uint16_t>(acc ^ exp_[static_cast<size_t>(e)]);
            }
            if (acc == 0) {
                error_positions.push_back(p);
            }
        }
        if (static_cast<int>(error_positions.size()) != l) {
            return res; // locator has wrong root count
        }
        for (int p : error_positions) {
            const int w = p >= deg_g ? p - deg_g : k_code + p;
            received[static_cast<size_t>(w)] ^= 1;
        }
        if (!is_codeword(received)) {
            return res;
        }
        res.corrections = l;
    }

    res.ok = true;
    res.payload.assign(received.begin(), received.begin() + k_payload);
    return res;
}

const BchCode& bch511() {
    static const BchCode code;
    return code;
}

} // namespace wg
