#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ta3n/data/video.hpp"

namespace ta3n::data {

/// Parameters of the synthetic two-domain benchmark.
///
/// Classes come in pairs (2j, 2j+1) that share a center c_j and an axis u_j. Frames of
/// class 2j climb along u_j over time, those of 2j+1 descend, so the time-averaged
/// frames of a pair coincide and only temporal order separates them.
struct DatasetSpec {
  std::size_t num_classes = 4;
  std::size_t feature_dim = 16;
  std::size_t frames = 16;
  std::size_t videos_per_class_per_domain = 50;
  double noise_sigma = 0.05;
  double shift_alpha = 0.5;
  double shift_bias_scale = 0.5;
  double warp_gamma = 1.5;
  std::uint64_t seed = 1;

  void validate() const;
};

inline constexpr double kSlopeMagnitude = 2.0;

/// Target-domain transform. Spatial: x' = (1 - alpha) x + alpha Q x + beta b.
/// Temporal: frame i is re-sampled at normalized time (i / (T - 1))^gamma with linear
/// interpolation between the original frames.
struct DomainShift {
  ad::Tensor rotation;       // D×D orthogonal
  std::vector<double> bias;  // unit vector
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 1.0;

  /// Seeded Q (QR of a Gaussian matrix, sign-normalized) and b for `spec`.
  static DomainShift from_spec(const DatasetSpec& spec);
};

VideoSample apply_domain_shift(const VideoSample& sample, const DomainShift& shift);
VideoSample apply_domain_shift(const VideoSample& sample, const DatasetSpec& spec);

/// Resamples frames at warped normalized positions p^gamma.
ad::Tensor warp_time(const ad::Tensor& frames, double gamma);

struct ClassTemplate {
  std::vector<double> center;
  std::vector<double> axis;
};

/// Per-pair centers and axes (both unit norm) drawn from `spec.seed`.
std::vector<ClassTemplate> class_templates(const DatasetSpec& spec);

/// Noise-free frames of one class.
ad::Tensor clean_frames(const DatasetSpec& spec, const ClassTemplate& pair, int label);

struct Dataset {
  VideoSet source;
  VideoSet target;
};

/// Deterministic in `spec`. Target videos are shifted before per-video noise is added.
Dataset generate_dataset(const DatasetSpec& spec);

}  // namespace ta3n::data
