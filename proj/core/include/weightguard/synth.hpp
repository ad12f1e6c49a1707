#pragma once

#include "weightguard/tensor.hpp"

#include <cstdint>
#include <string>

namespace wg {

// Generates a deterministic synthetic weight tensor. Supported specs:
//   gaussian(mean,std)   constant(value)   uniform(lo,hi)
// Unknown distribution names are rejected.
WeightMatrix synth_weights(int64_t rows, int64_t cols,
                           const std::string& distribution_spec,
                           uint64_t seed, std::string name = "synth");

} // namespace wg
