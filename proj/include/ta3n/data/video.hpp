#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ta3n/autodiff/tensor.hpp"

namespace ta3n::data {

enum class Domain { Source = 0, Target = 1 };

/// One video: T×D frame features, optional class label, domain tag.
struct VideoSample {
  std::string id;
  ad::Tensor frames;
  std::optional<int> label;
  Domain domain = Domain::Source;

  std::size_t num_frames() const { return frames.rows(); }
  std::size_t feature_dim() const { return frames.cols(); }
};

using VideoSet = std::vector<VideoSample>;

inline int domain_index(Domain d) { return static_cast<int>(d); }

}  // namespace ta3n::data
