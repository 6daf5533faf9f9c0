#include "ta3n/train/param_file.hpp"

#include <cmath>
#include <limits>

#include "ta3n/data/binary_io.hpp"
#include "ta3n/data/feature_file.hpp"

namespace ta3n::train {

using data::FeatureFileError;
using Kind = FeatureFileError::Kind;

std::vector<std::uint8_t> encode_params(const model::ModelParams& params) {
  data::ByteWriter w;
  w.raw(std::string_view(kParamMagic, 4));
  w.u32(kParamVersion);
  w.u32(static_cast<std::uint32_t>(params.tensors().size()));
  for (const auto& [name, t] : params.tensors()) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) throw DataError("parameter name too long");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.raw(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape()) w.u32(static_cast<std::uint32_t>(e));
    for (double v : t.values()) w.f64(v);
  }
  return w.bytes();
}

model::ModelParams decode_params(std::span<const std::uint8_t> bytes) {
  data::ByteReader r(bytes);
  try {
    if (r.raw(4) != std::string_view(kParamMagic, 4)) {
      throw FeatureFileError(Kind::BadMagic, "not a TA3P parameter file (bad magic bytes)");
    }
    const std::uint32_t version = r.u32();
    if (version != kParamVersion) {
      throw FeatureFileError(Kind::UnsupportedVersion, "unsupported TA3P version " + std::to_string(version));
    }
    const std::uint32_t count = r.u32();
    model::ModelParams params;
    for (std::uint32_t i = 0; i < count; ++i) {
      std::string name = r.raw(r.u16());
      const std::uint32_t rank = r.u32();
      if (rank == 0 || rank > 8) throw FeatureFileError(Kind::Malformed, "tensor '" + name + "' has rank " + std::to_string(rank));
      ad::Shape shape(rank);
      for (auto& e : shape) {
        e = r.u32();
        if (e == 0) throw FeatureFileError(Kind::Malformed, "tensor '" + name + "' has a zero extent");
      }
      const std::size_t n = ad::shape_size(shape);
      if (r.remaining() / 8 < n) throw data::TruncatedInput{r.position()};
      std::vector<double> values(n);
      for (double& v : values) {
        v = r.f64();
        if (!std::isfinite(v)) throw FeatureFileError(Kind::NonFinite, "tensor '" + name + "' has a non-finite value");
      }
      if (params.contains(name)) throw FeatureFileError(Kind::Malformed, "duplicate tensor '" + name + "'");
      params.tensors().emplace(std::move(name), ad::Tensor(std::move(shape), std::move(values)));
    }
    if (r.remaining() != 0) throw FeatureFileError(Kind::Malformed, "trailing bytes after last tensor");
    return params;
  } catch (const data::TruncatedInput& t) {
    throw FeatureFileError(Kind::Truncated, "TA3P payload truncated at byte " + std::to_string(t.offset));
  }
}

void save_params(const model::ModelParams& params, const std::string& path) {
  data::write_file(path, encode_params(params));
}

model::ModelParams load_params(const std::string& path) {
  const auto bytes = data::read_file(path);
  try {
    return decode_params(bytes);
  } catch (const FeatureFileError& e) {
    throw FeatureFileError(e.kind(), path + ": " + e.what());
  }
}

}  // namespace ta3n::train
