#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ta3n/data/video.hpp"
#include "ta3n/model/model.hpp"

namespace ta3n::eval {

struct Metrics {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::map<int, double> per_class;      // only classes present in the data
  std::map<int, std::size_t> counts;    // videos per class
  double gain = 0.0;                    // accuracy - reference
  std::optional<double> domain_probe_accuracy;
};

/// Accuracy bookkeeping from predicted and true labels.
Metrics score_predictions(std::span<const int> predicted, std::span<const int> labels, double reference = 0.0);

/// Argmax class per video under eval-mode frame and tuple selection. Deterministic.
std::vector<int> predict(model::ModelParams& params, const model::ModelConfig& config, const data::VideoSet& videos);

/// Video-level features (the classifier input) for every video, eval mode.
std::vector<std::vector<double>> video_features(model::ModelParams& params, const model::ModelConfig& config,
                                                const data::VideoSet& videos);

/// Throws DataError if any video lacks a label.
Metrics evaluate(model::ModelParams& params, const model::ModelConfig& config, const data::VideoSet& videos,
                 double reference = 0.0);

/// Held-out accuracy of a fresh logistic probe telling source from target features.
/// 80/20 split after a seeded shuffle; features standardized on the training split.
double probe_accuracy(std::span<const std::vector<double>> source, std::span<const std::vector<double>> target,
                      std::uint64_t seed = 7);

/// probe_accuracy on frozen video features of the model.
double domain_probe(model::ModelParams& params, const model::ModelConfig& config, const data::VideoSet& source,
                    const data::VideoSet& target, std::uint64_t seed = 7);

}  // namespace ta3n::eval
