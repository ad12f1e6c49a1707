#pragma once

#include "weightguard/quant.hpp"

#include <cstdint>
#include <string>

namespace wg {

// Compressed-layer container:
//   magic "WXC1" | version byte | u32-LE header length | JSON header text |
//   payload bitstream | zero padding to the byte boundary.
// The bitstream packs, in order: codebooks (group-major, stage-major),
// index streams, scale codebook, scale indices, outliers. Bits go
// least-significant-bit first within each byte. The payload is exactly
// payload_bits(layer) long; header bytes plus terminal padding are the
// fixed per-artifact overhead.
std::string serialize_wxc(const CompressedLayer& layer);

CompressedLayer deserialize_wxc(const std::string& bytes);

void save_wxc(const CompressedLayer& layer, const std::string& path);
CompressedLayer load_wxc(const std::string& path);

// Byte size of everything that is not payload for this layer's header.
uint64_t wxc_overhead_bits(const CompressedLayer& layer);

} // namespace wg
