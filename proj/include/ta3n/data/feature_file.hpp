#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ta3n/data/video.hpp"
#include "ta3n/error.hpp"

namespace ta3n::data {

// TA3F container, little-endian:
//   "TA3F" | version u32 = 1 | count u32
//   per video: id_len u16 | id bytes (UTF-8) | label i32 (-1 unlabeled) | domain u8 |
//              T u32 | D u32 | T*D float32 row-major
inline constexpr char kFeatureMagic[4] = {'T', 'A', '3', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;

class FeatureFileError : public DataError {
 public:
  enum class Kind { BadMagic, UnsupportedVersion, Truncated, NonFinite, Malformed };

  FeatureFileError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::vector<std::uint8_t> encode_features(std::span<const VideoSample> videos);
/// All-or-nothing: throws FeatureFileError without returning partial data.
VideoSet decode_features(std::span<const std::uint8_t> bytes);

void save_feature_file(std::span<const VideoSample> videos, const std::string& path);
VideoSet load_feature_file(const std::string& path);

}  // namespace ta3n::data
