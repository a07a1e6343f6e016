#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "evcam/tensor.hpp"

namespace evcam {

/// Named tensors, ordered by name so serialization is canonical.
using TensorMap = std::map<std::string, Tensor>;

inline constexpr std::uint8_t kWeightsVersion = 1;

// Layout (little-endian):
//   "WGTS" | version u8 | count u32 |
//   count x { name_len u16 | name utf-8 | rank u8 | dims u32[rank] | f32[prod(dims)] }
std::vector<std::uint8_t> encode_weights(const TensorMap& tensors);
TensorMap decode_weights(std::span<const std::uint8_t> bytes);

void save_weights(const std::string& path, const TensorMap& tensors);
TensorMap load_weights(const std::string& path);

}  // namespace evcam
