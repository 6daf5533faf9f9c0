#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ta3n/data/video.hpp"
#include "ta3n/eval/metrics.hpp"
#include "ta3n/losses/losses.hpp"
#include "ta3n/model/model.hpp"

namespace ta3n::train {

/// Which labels drive L_y. Source-only and target-only train without any adaptation terms.
enum class Regime { Adaptive, SourceOnly, TargetOnly };

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 1;  // per domain
  double learning_rate = 0.003;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double grl_gamma_ramp = 10.0;
  // Rescales the joint gradient to at most this L2 norm before the update; 0 disables.
  double clip_grad_norm = 5.0;
  std::uint64_t seed = 1;
  Regime regime = Regime::Adaptive;
  // Evaluate the supplied eval set after every epoch (otherwise only after the last one).
  bool eval_every_epoch = true;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double progress = 0.0;
  double grl_ramp = 0.0;
  losses::LossBreakdown loss;  // mean over the epoch's steps; counts are totals
  std::optional<eval::Metrics> eval;
};

struct TrainState {
  // Independent streams: source-row sampling never depends on whether target rows are drawn.
  Rng source_rng;
  Rng target_rng;
  Rng model_rng;  // relation tuples
  std::size_t epoch = 0;
  std::size_t step = 0;
  std::size_t total_steps = 1;
  double progress = 0.0;
  double ramp = 0.0;
  std::size_t ramp_clamps = 0;
  std::map<std::string, std::vector<double>> velocity;
  std::vector<EpochRecord> history;

  explicit TrainState(std::uint64_t seed = 1);
};

/// 2 / (1 + exp(-gamma p)) - 1. Out-of-range p is clamped to [0, 1] and counted.
double grl_ramp(double p, double gamma, std::size_t* clamp_count = nullptr);

/// K frames from K equal segments of [0, T): a uniform pick per segment in training,
/// the segment center floor((i + 0.5) T / K) at evaluation. Short videos repeat frames.
ad::Tensor sample_frames(const data::VideoSample& video, std::size_t K, model::Mode mode, Rng& rng);

/// Stacks sampled frames of several videos into B×K×D.
ad::Tensor stack_frames(std::span<const data::VideoSample* const> videos, std::size_t K, model::Mode mode, Rng& rng);

/// SGD with momentum and L2 weight decay: v = mu v + (g + wd theta); theta -= lr v.
/// g is first clipped to clip_grad_norm when that is positive.
void sgd_update(model::ModelParams& params, const TrainConfig& config, TrainState& state);

/// One forward over source+target rows, one backward, one update. Target labels are ignored.
losses::LossBreakdown train_step(std::span<const data::VideoSample* const> source_batch,
                                 std::span<const data::VideoSample* const> target_batch,
                                 const model::ModelConfig& model_config, const TrainConfig& config,
                                 model::ModelParams& params, TrainState& state);

struct FitResult {
  model::ModelParams params;
  std::vector<EpochRecord> history;
  std::size_t ramp_clamps = 0;
};

/// Trains from fresh parameters. `eval_set`, when given, is scored into the history.
FitResult fit(const TrainConfig& config, const model::ModelConfig& model_config, const data::VideoSet& source,
              const data::VideoSet& target, const data::VideoSet* eval_set = nullptr);

/// Model configuration actually trained under `regime`. Source-only and target-only
/// clear every adaptation flag; in the adaptive regime a placement whose weight is zero
/// is dropped, and attention is dropped along with the relation discriminators.
model::ModelConfig effective_model_config(const model::ModelConfig& config, Regime regime);

}  // namespace ta3n::train
