#include "ta3n/data/feature_file.hpp"

#include <cmath>
#include <limits>

#include "ta3n/data/binary_io.hpp"

namespace ta3n::data {

using Kind = FeatureFileError::Kind;

std::vector<std::uint8_t> encode_features(std::span<const VideoSample> videos) {
  if (videos.size() > std::numeric_limits<std::uint32_t>::max()) throw DataError("too many videos for TA3F");
  ByteWriter w;
  w.raw(std::string_view(kFeatureMagic, 4));
  w.u32(kFeatureVersion);
  w.u32(static_cast<std::uint32_t>(videos.size()));
  for (const VideoSample& v : videos) {
    if (v.id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw DataError("video id longer than 65535 bytes: " + v.id.substr(0, 32) + "...");
    }
    if (!v.frames.all_finite()) throw NumericError("video '" + v.id + "' has non-finite frame values");
    w.u16(static_cast<std::uint16_t>(v.id.size()));
    w.raw(v.id);
    w.i32(v.label ? *v.label : -1);
    w.u8(static_cast<std::uint8_t>(domain_index(v.domain)));
    w.u32(static_cast<std::uint32_t>(v.num_frames()));
    w.u32(static_cast<std::uint32_t>(v.feature_dim()));
    for (double x : v.frames.values()) w.f32(static_cast<float>(x));
  }
  return w.bytes();
}

VideoSet decode_features(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  try {
    if (r.raw(4) != std::string_view(kFeatureMagic, 4)) {
      throw FeatureFileError(Kind::BadMagic, "not a TA3F feature file (bad magic bytes)");
    }
    const std::uint32_t version = r.u32();
    if (version != kFeatureVersion) {
      throw FeatureFileError(Kind::UnsupportedVersion,
                             "unsupported TA3F version " + std::to_string(version) + " (expected 1)");
    }
    const std::uint32_t count = r.u32();
    VideoSet videos;
    videos.reserve(std::min<std::size_t>(count, r.remaining()));
    for (std::uint32_t i = 0; i < count; ++i) {
      VideoSample v;
      v.id = r.raw(r.u16());
      const std::int32_t label = r.i32();
      if (label < -1) throw FeatureFileError(Kind::Malformed, "video '" + v.id + "' has label " + std::to_string(label));
      if (label >= 0) v.label = label;
      const std::uint8_t domain = r.u8();
      if (domain > 1) throw FeatureFileError(Kind::Malformed, "video '" + v.id + "' has domain byte " + std::to_string(domain));
      v.domain = domain == 0 ? Domain::Source : Domain::Target;
      const std::uint32_t T = r.u32();
      const std::uint32_t D = r.u32();
      if (T == 0 || D == 0) throw FeatureFileError(Kind::Malformed, "video '" + v.id + "' has an empty frame matrix");
      const std::size_t n = static_cast<std::size_t>(T) * D;
      if (r.remaining() / 4 < n) throw TruncatedInput{r.position()};
      std::vector<double> values(n);
      for (double& x : values) {
        const float f = r.f32();
        if (!std::isfinite(f)) throw FeatureFileError(Kind::NonFinite, "video '" + v.id + "' contains a non-finite value");
        x = static_cast<double>(f);
      }
      v.frames = ad::Tensor({T, D}, std::move(values));
      videos.push_back(std::move(v));
    }
    if (r.remaining() != 0) {
      throw FeatureFileError(Kind::Malformed, std::to_string(r.remaining()) + " trailing bytes after last video");
    }
    return videos;
  } catch (const TruncatedInput& t) {
    throw FeatureFileError(Kind::Truncated, "TA3F payload truncated at byte " + std::to_string(t.offset));
  }
}

void save_feature_file(std::span<const VideoSample> videos, const std::string& path) {
  write_file(path, encode_features(videos));
}

VideoSet load_feature_file(const std::string& path) {
  const auto bytes = read_file(path);
  try {
    return decode_features(bytes);
  } catch (const FeatureFileError& e) {
    throw FeatureFileError(e.kind(), path + ": " + e.what());
  }
}

}  // namespace ta3n::data
