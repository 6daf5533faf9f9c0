#include "ta3n/data/generator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "ta3n/error.hpp"
#include "ta3n/util/seed.hpp"

namespace ta3n::data {

namespace {

std::vector<double> unit_gaussian(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  // A zero draw is practically impossible; loop anyway so the result is always unit norm.
  while (norm == 0.0) {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

void DatasetSpec::validate() const {
  if (num_classes < 2 || num_classes % 2 != 0) {
    throw ConfigError("num_classes must be even (classes come in temporally opposed pairs), got " +
                      std::to_string(num_classes));
  }
  if (feature_dim == 0) throw ConfigError("feature_dim must be positive");
  if (frames == 0) throw ConfigError("frames per video must be positive");
  if (videos_per_class_per_domain == 0) throw ConfigError("videos_per_class_per_domain must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be nonnegative");
  if (!(shift_alpha >= 0.0 && shift_alpha <= 1.0)) throw ConfigError("shift_alpha must lie in [0, 1]");
  if (!std::isfinite(shift_bias_scale)) throw ConfigError("shift_bias_scale must be finite");
  if (!(warp_gamma > 0.0) || !std::isfinite(warp_gamma)) throw ConfigError("warp_gamma must be positive");
}

DomainShift DomainShift::from_spec(const DatasetSpec& spec) {
  spec.validate();
  const std::size_t D = spec.feature_dim;
  Rng rng(derive_seed(spec.seed, "domain-shift"));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(D, D);
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = 0; j < D; ++j) g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix column signs so that diag(R) > 0, which makes the factorization unique.
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }

  DomainShift shift;
  shift.rotation = ad::Tensor({D, D});
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = 0; j < D; ++j) shift.rotation.at(i, j) = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  shift.bias = unit_gaussian(D, rng);
  shift.alpha = spec.shift_alpha;
  shift.beta = spec.shift_bias_scale;
  shift.gamma = spec.warp_gamma;
  return shift;
}

ad::Tensor warp_time(const ad::Tensor& frames, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("warp_gamma must be positive");
  const std::size_t T = frames.rows(), D = frames.cols();
  if (T < 2 || gamma == 1.0) return frames;
  ad::Tensor out({T, D});
  for (std::size_t i = 0; i < T; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(T - 1);
    const double pos = std::pow(p, gamma) * static_cast<double>(T - 1);
    const auto lo = std::min(static_cast<std::size_t>(std::floor(pos)), T - 1);
    const std::size_t hi = std::min(lo + 1, T - 1);
    const double frac = pos - static_cast<double>(lo);
    for (std::size_t d = 0; d < D; ++d) {
      out.at(i, d) = (1.0 - frac) * frames.at(lo, d) + frac * frames.at(hi, d);
    }
  }
  return out;
}

VideoSample apply_domain_shift(const VideoSample& sample, const DomainShift& shift) {
  const std::size_t T = sample.num_frames(), D = sample.feature_dim();
  if (shift.rotation.rank() != 2 || shift.rotation.rows() != D || shift.rotation.cols() != D ||
      shift.bias.size() != D) {
    throw ShapeError("domain shift is " + ad::shape_string(shift.rotation.shape()) + " but frames have width " +
                     std::to_string(D));
  }
  VideoSample out = sample;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < D; ++i) {
      double qx = 0.0;
      for (std::size_t j = 0; j < D; ++j) qx += shift.rotation.at(i, j) * sample.frames.at(t, j);
      out.frames.at(t, i) =
          (1.0 - shift.alpha) * sample.frames.at(t, i) + shift.alpha * qx + shift.beta * shift.bias[i];
    }
  }
  out.frames = warp_time(out.frames, shift.gamma);
  return out;
}

VideoSample apply_domain_shift(const VideoSample& sample, const DatasetSpec& spec) {
  return apply_domain_shift(sample, DomainShift::from_spec(spec));
}

std::vector<ClassTemplate> class_templates(const DatasetSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "class-templates"));
  std::vector<ClassTemplate> pairs;
  for (std::size_t j = 0; j < spec.num_classes / 2; ++j) {
    ClassTemplate t;
    t.center = unit_gaussian(spec.feature_dim, rng);
    t.axis = unit_gaussian(spec.feature_dim, rng);
    pairs.push_back(std::move(t));
  }
  return pairs;
}

ad::Tensor clean_frames(const DatasetSpec& spec, const ClassTemplate& pair, int label) {
  const std::size_t T = spec.frames, D = spec.feature_dim;
  const double slope = (label % 2 == 0 ? 1.0 : -1.0) * kSlopeMagnitude;
  ad::Tensor frames({T, D});
  for (std::size_t t = 0; t < T; ++t) {
    const double phase = T > 1 ? static_cast<double>(t) / static_cast<double>(T - 1) - 0.5 : 0.0;
    for (std::size_t d = 0; d < D; ++d) frames.at(t, d) = pair.center[d] + slope * phase * pair.axis[d];
  }
  return frames;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  const auto pairs = class_templates(spec);
  const DomainShift shift = DomainShift::from_spec(spec);
  Dataset out;

  auto add_noise = [&spec](VideoSample& v) {
    if (spec.noise_sigma == 0.0) return;
    Rng rng(derive_seed(spec.seed, "noise/" + v.id));
    std::normal_distribution<double> normal(0.0, spec.noise_sigma);
    for (double& x : v.frames.values()) x += normal(rng);
  };

  for (Domain domain : {Domain::Source, Domain::Target}) {
    VideoSet& set = domain == Domain::Source ? out.source : out.target;
    const char* tag = domain == Domain::Source ? "src" : "tgt";
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
      const int label = static_cast<int>(c);
      for (std::size_t i = 0; i < spec.videos_per_class_per_domain; ++i) {
        VideoSample v;
        v.id = std::string(tag) + "-c" + std::to_string(c) + "-" + std::to_string(i);
        v.frames = clean_frames(spec, pairs[c / 2], label);
        v.label = label;
        v.domain = domain;
        if (domain == Domain::Target) v = apply_domain_shift(v, shift);
        add_noise(v);
        set.push_back(std::move(v));
      }
    }
  }
  return out;
}

}  // namespace ta3n::data
