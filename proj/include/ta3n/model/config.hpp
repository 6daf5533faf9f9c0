#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ta3n::model {

enum class TemporalKind { Pooling, Relation };

/// Which video feature the video-level domain classifier sees when attention is on.
enum class TdInput { Attended, Unattended };

struct LossWeights {
  double lambda_s = 0.75;
  double lambda_r = 0.75;
  double lambda_t = 0.75;
  double gamma = 0.3;
};

struct ModelConfig {
  std::size_t feature_dim = 16;
  // Output widths of successive layers; ReLU between layers, last layer linear.
  std::vector<std::size_t> spatial_widths{32, 32};
  std::vector<std::size_t> relation_widths{32, 32};
  std::vector<std::size_t> classifier_hidden{};
  // Hidden width of every domain classifier; 0 means a single affine layer.
  std::size_t domain_hidden = 32;
  std::size_t frames = 5;  // K
  TemporalKind temporal_kind = TemporalKind::Relation;
  bool use_sd = false;
  bool use_rd = false;
  bool use_td = false;
  bool use_attention = false;
  TdInput td_input = TdInput::Attended;
  std::size_t num_classes = 4;
  std::size_t tuples_per_scale = 3;
  // At evaluation every tuple is used when C(K, n) is at most this; otherwise a seeded sample of this size.
  std::size_t eval_tuple_limit = 20;
  LossWeights weights;

  /// Throws ConfigError naming the violated constraint.
  void validate() const;

  std::size_t spatial_out() const { return spatial_widths.back(); }
  /// Width of the video feature fed to the classifier.
  std::size_t video_feature_dim() const;
  bool relational() const { return temporal_kind == TemporalKind::Relation; }
};

std::string to_string(TemporalKind kind);
TemporalKind parse_temporal_kind(const std::string& s);

}  // namespace ta3n::model
