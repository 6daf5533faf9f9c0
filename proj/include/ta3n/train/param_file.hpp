#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ta3n/model/params.hpp"

namespace ta3n::train {

// TA3P container, little-endian, same framing as TA3F:
//   "TA3P" | version u32 = 1 | count u32
//   per tensor: name_len u16 | name bytes | rank u32 | rank x u32 extents | values f64
// Values are stored at full precision so a reloaded model scores exactly as in memory.
inline constexpr char kParamMagic[4] = {'T', 'A', '3', 'P'};
inline constexpr std::uint32_t kParamVersion = 1;

std::vector<std::uint8_t> encode_params(const model::ModelParams& params);
model::ModelParams decode_params(std::span<const std::uint8_t> bytes);

void save_params(const model::ModelParams& params, const std::string& path);
model::ModelParams load_params(const std::string& path);

}  // namespace ta3n::train
