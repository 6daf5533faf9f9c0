#include "ta3n/train/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ta3n/error.hpp"

namespace ta3n::train {

using data::VideoSample;

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
  if (!(grl_gamma_ramp >= 0.0)) throw ConfigError("grl_gamma_ramp must be nonnegative");
  if (!(clip_grad_norm >= 0.0)) throw ConfigError("clip_grad_norm must be nonnegative (0 disables clipping)");
}

TrainState::TrainState(std::uint64_t seed)
    : source_rng(derive_seed(seed, "source-stream")),
      target_rng(derive_seed(seed, "target-stream")),
      model_rng(derive_seed(seed, "model-stream")) {}

double grl_ramp(double p, double gamma, std::size_t* clamp_count) {
  if (!(p >= 0.0 && p <= 1.0)) {
    if (clamp_count) ++*clamp_count;
    p = std::isnan(p) ? 0.0 : std::clamp(p, 0.0, 1.0);
  }
  return 2.0 / (1.0 + std::exp(-gamma * p)) - 1.0;
}

ad::Tensor sample_frames(const VideoSample& video, std::size_t K, model::Mode mode, Rng& rng) {
  if (K < 2) throw ConfigError("frames per video (K) must be at least 2");
  const std::size_t T = video.num_frames();
  if (T == 0) throw DataError("video '" + video.id + "' is an empty sequence");
  const std::size_t D = video.feature_dim();
  ad::Tensor out({K, D});
  for (std::size_t i = 0; i < K; ++i) {
    std::size_t idx = std::min((2 * i + 1) * T / (2 * K), T - 1);
    if (mode == model::Mode::Train && T >= K) {
      const std::size_t lo = i * T / K;
      const std::size_t hi = ((i + 1) * T + K - 1) / K - 1;
      std::uniform_int_distribution<std::size_t> pick(lo, std::min(hi, T - 1));
      idx = pick(rng);
    }
    std::copy_n(&video.frames[idx * D], D, &out[i * D]);
  }
  return out;
}

ad::Tensor stack_frames(std::span<const VideoSample* const> videos, std::size_t K, model::Mode mode, Rng& rng) {
  if (videos.empty()) throw DataError("cannot stack an empty batch");
  const std::size_t D = videos.front()->feature_dim();
  ad::Tensor out({videos.size(), K, D});
  for (std::size_t b = 0; b < videos.size(); ++b) {
    if (videos[b]->feature_dim() != D) {
      throw DataError("video '" + videos[b]->id + "' has width " + std::to_string(videos[b]->feature_dim()) +
                      ", expected " + std::to_string(D));
    }
    const ad::Tensor f = sample_frames(*videos[b], K, mode, rng);
    std::copy(f.values().begin(), f.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(b * K * D));
  }
  return out;
}

void sgd_update(model::ModelParams& params, const TrainConfig& config, TrainState& state) {
  double scale = 1.0;
  if (config.clip_grad_norm > 0.0) {
    double sq = 0.0;
    for (const auto& [name, t] : params.tensors()) {
      if (t.has_grad()) {
        for (double g : t.grad()) sq += g * g;
      }
    }
    const double norm = std::sqrt(sq);
    if (norm > config.clip_grad_norm) scale = config.clip_grad_norm / norm;
  }
  for (auto& [name, t] : params.tensors()) {
    auto& v = state.velocity[name];
    if (v.empty()) v.assign(t.size(), 0.0);
    if (!t.has_grad()) continue;
    auto g = t.grad();
    auto x = t.values();
    for (std::size_t i = 0; i < x.size(); ++i) {
      v[i] = config.momentum * v[i] + scale * g[i] + config.weight_decay * x[i];
      x[i] -= config.learning_rate * v[i];
    }
  }
  params.zero_grad();
}

namespace {

void require_finite(const losses::LossBreakdown& br) {
  const std::pair<const char*, double> terms[] = {
      {"L_y", br.L_y}, {"L_sd", br.L_sd}, {"L_rd", br.L_rd}, {"L_td", br.L_td}, {"L_ae", br.L_ae}, {"total", br.total}};
  for (const auto& [name, v] : terms) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite loss term ") + name + " = " + std::to_string(v));
  }
}

void require_finite(const model::ModelParams& params) {
  for (const auto& [name, t] : params.tensors()) {
    if (!t.all_finite()) throw NumericError("parameter '" + name + "' became non-finite");
  }
}

void check_videos(const data::VideoSet& set, const char* what, std::size_t D, bool need_labels, std::size_t C) {
  for (const auto& v : set) {
    if (v.feature_dim() != D) {
      throw DataError(std::string(what) + " video '" + v.id + "' has width " + std::to_string(v.feature_dim()) +
                      " but the model expects " + std::to_string(D));
    }
    if (v.num_frames() == 0) throw DataError(std::string(what) + " video '" + v.id + "' is an empty sequence");
    if (need_labels) {
      if (!v.label) throw DataError(std::string(what) + " video '" + v.id + "' has no label");
      if (*v.label < 0 || static_cast<std::size_t>(*v.label) >= C) {
        throw DataError(std::string(what) + " video '" + v.id + "' has label " + std::to_string(*v.label) +
                        " outside [0, " + std::to_string(C) + ")");
      }
    }
  }
}

void accumulate(losses::LossBreakdown& acc, const losses::LossBreakdown& br) {
  acc.L_y += br.L_y;
  acc.L_sd += br.L_sd;
  acc.L_rd += br.L_rd;
  for (const auto& [n, v] : br.L_rd_per_scale) acc.L_rd_per_scale[n] += v;
  acc.L_td += br.L_td;
  acc.L_ae += br.L_ae;
  acc.total += br.total;
  acc.n_source += br.n_source;
  acc.n_all += br.n_all;
}

void average(losses::LossBreakdown& acc, std::size_t steps) {
  const double inv = 1.0 / static_cast<double>(steps);
  acc.L_y *= inv;
  acc.L_sd *= inv;
  acc.L_rd *= inv;
  for (auto& [n, v] : acc.L_rd_per_scale) v *= inv;
  acc.L_td *= inv;
  acc.L_ae *= inv;
  acc.total *= inv;
}

}  // namespace

losses::LossBreakdown train_step(std::span<const VideoSample* const> source_batch,
                                 std::span<const VideoSample* const> target_batch,
                                 const model::ModelConfig& model_config, const TrainConfig& config,
                                 model::ModelParams& params, TrainState& state) {
  if (source_batch.empty()) throw DataError("train_step needs a nonempty source batch");
  std::vector<const VideoSample*> rows(source_batch.begin(), source_batch.end());
  rows.insert(rows.end(), target_batch.begin(), target_batch.end());

  losses::BatchTargets targets;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool is_source = i < source_batch.size();
    if (is_source && !rows[i]->label) throw DataError("source video '" + rows[i]->id + "' has no label");
    targets.labels.push_back(is_source ? *rows[i]->label : -1);
    targets.domains.push_back(is_source ? 0 : 1);
  }

  const std::size_t K = model_config.frames;
  ad::Tensor frames = stack_frames(source_batch, K, model::Mode::Train, state.source_rng);
  if (!target_batch.empty()) {
    const ad::Tensor tf = stack_frames(target_batch, K, model::Mode::Train, state.target_rng);
    std::vector<double> all(frames.values().begin(), frames.values().end());
    all.insert(all.end(), tf.values().begin(), tf.values().end());
    frames = ad::Tensor({rows.size(), K, frames.dim(2)}, std::move(all));
  }
  state.ramp = grl_ramp(state.progress, config.grl_gamma_ramp, &state.ramp_clamps);
  const auto& w = model_config.weights;
  model::ForwardOptions options;
  options.mode = model::Mode::Train;
  options.grl = {w.lambda_s * state.ramp, w.lambda_r * state.ramp, w.lambda_t * state.ramp};

  ad::Tape tape;
  const model::ForwardOutput out = model::forward(tape, frames, model_config, params, options, state.model_rng);
  const losses::Objective obj = losses::build_objective(out, targets, model_config);
  require_finite(obj.breakdown);

  params.zero_grad();
  tape.backward(obj.objective);
  sgd_update(params, config, state);
  require_finite(params);

  ++state.step;
  state.progress = std::min(1.0, static_cast<double>(state.step) / static_cast<double>(state.total_steps));
  return obj.breakdown;
}

model::ModelConfig effective_model_config(const model::ModelConfig& config, Regime regime) {
  model::ModelConfig c = config;
  if (regime != Regime::Adaptive) {
    c.use_sd = c.use_rd = c.use_td = c.use_attention = false;
    c.weights = {0.0, 0.0, 0.0, 0.0};
    return c;
  }
  c.use_sd = c.use_sd && c.weights.lambda_s > 0.0;
  c.use_rd = c.use_rd && c.weights.lambda_r > 0.0;
  c.use_td = c.use_td && c.weights.lambda_t > 0.0;
  c.use_attention = c.use_attention && c.use_rd;
  return c;
}

FitResult fit(const TrainConfig& config, const model::ModelConfig& model_config, const data::VideoSet& source,
              const data::VideoSet& target, const data::VideoSet* eval_set) {
  config.validate();
  const model::ModelConfig mc = effective_model_config(model_config, config.regime);
  mc.validate();

  // The labeled training set and the unlabeled adaptation set for this regime.
  const data::VideoSet& labeled = config.regime == Regime::TargetOnly ? target : source;
  const bool adapt = config.regime == Regime::Adaptive && (mc.use_sd || mc.use_rd || mc.use_td || mc.use_attention);
  if (labeled.empty()) throw DataError("training set is empty");
  if (adapt && target.empty()) throw DataError("target set is empty");
  check_videos(labeled, "training", mc.feature_dim, true, mc.num_classes);
  if (adapt) check_videos(target, "target", mc.feature_dim, false, mc.num_classes);

  FitResult result;
  result.params = model::init_params(mc, config.seed);

  const std::size_t steps_per_epoch = (labeled.size() + config.batch_size - 1) / config.batch_size;
  TrainState state(config.seed);
  state.total_steps = steps_per_epoch * config.epochs;

  std::vector<std::size_t> order(labeled.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> target_order(adapt ? target.size() : 0);
  std::iota(target_order.begin(), target_order.end(), 0);
  std::shuffle(target_order.begin(), target_order.end(), state.target_rng);
  std::size_t target_cursor = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    state.epoch = epoch;
    std::shuffle(order.begin(), order.end(), state.source_rng);
    EpochRecord record;
    record.epoch = epoch + 1;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const VideoSample*> src;
      for (std::size_t i = start; i < end; ++i) src.push_back(&labeled[order[i]]);
      std::vector<const VideoSample*> tgt;
      if (adapt) {
        // Equal-size target batch, cycling through its own reshuffled order.
        for (std::size_t i = 0; i < src.size(); ++i) {
          if (target_cursor == target_order.size()) {
            std::shuffle(target_order.begin(), target_order.end(), state.target_rng);
            target_cursor = 0;
          }
          tgt.push_back(&target[target_order[target_cursor++]]);
        }
      }
      const auto br = train_step(src, tgt, mc, config, result.params, state);
      accumulate(record.loss, br);
      ++record.steps;
    }
    average(record.loss, record.steps);
    record.progress = state.progress;
    record.grl_ramp = state.ramp;
    if (eval_set && (config.eval_every_epoch || epoch + 1 == config.epochs)) {
      record.eval = eval::evaluate(result.params, mc, *eval_set);
    }
    state.history.push_back(std::move(record));
  }
  result.history = std::move(state.history);
  result.ramp_clamps = state.ramp_clamps;
  return result;
}

}  // namespace ta3n::train
