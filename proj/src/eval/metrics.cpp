#include "ta3n/eval/metrics.hpp"

#include <algorithm>

#include "ta3n/error.hpp"
#include "ta3n/train/train.hpp"

namespace ta3n::eval {

namespace {

constexpr std::size_t kEvalChunk = 64;

template <typename Fn>
void for_each_chunk(model::ModelParams& params, const model::ModelConfig& config, const data::VideoSet& videos,
                    Fn&& fn) {
  model::check_params(config, params);
  Rng unused(0);
  model::ForwardOptions options;
  options.mode = model::Mode::Eval;
  for (std::size_t start = 0; start < videos.size(); start += kEvalChunk) {
    const std::size_t end = std::min(videos.size(), start + kEvalChunk);
    std::vector<const data::VideoSample*> chunk;
    for (std::size_t i = start; i < end; ++i) chunk.push_back(&videos[i]);
    const ad::Tensor frames = train::stack_frames(chunk, config.frames, model::Mode::Eval, unused);
    ad::Tape tape;
    const model::ForwardOutput out = model::forward(tape, frames, config, params, options, unused);
    fn(out);
  }
}

}  // namespace

Metrics score_predictions(std::span<const int> predicted, std::span<const int> labels, double reference) {
  if (predicted.size() != labels.size()) throw ShapeError("prediction and label counts differ");
  Metrics m;
  std::map<int, std::size_t> correct_per_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++m.counts[labels[i]];
    if (predicted[i] == labels[i]) {
      ++m.correct;
      ++correct_per_class[labels[i]];
    }
  }
  m.total = labels.size();
  m.accuracy = m.total ? static_cast<double>(m.correct) / static_cast<double>(m.total) : 0.0;
  for (const auto& [c, n] : m.counts) {
    m.per_class[c] = static_cast<double>(correct_per_class[c]) / static_cast<double>(n);
  }
  m.gain = m.accuracy - reference;
  return m;
}

std::vector<int> predict(model::ModelParams& params, const model::ModelConfig& config, const data::VideoSet& videos) {
  std::vector<int> out;
  out.reserve(videos.size());
  for_each_chunk(params, config, videos, [&out](const model::ForwardOutput& fo) {
    const ad::Tensor& logits = fo.class_logits.value();
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      const auto row = logits.values().subspan(r * logits.cols(), logits.cols());
      out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
  });
  return out;
}

std::vector<std::vector<double>> video_features(model::ModelParams& params, const model::ModelConfig& config,
                                                const data::VideoSet& videos) {
  std::vector<std::vector<double>> out;
  out.reserve(videos.size());
  for_each_chunk(params, config, videos, [&out](const model::ForwardOutput& fo) {
    const ad::Tensor& f = fo.video_feature.value();
    for (std::size_t r = 0; r < f.rows(); ++r) {
      const auto row = f.values().subspan(r * f.cols(), f.cols());
      out.emplace_back(row.begin(), row.end());
    }
  });
  return out;
}

Metrics evaluate(model::ModelParams& params, const model::ModelConfig& config, const data::VideoSet& videos,
                 double reference) {
  std::vector<int> labels;
  labels.reserve(videos.size());
  for (const auto& v : videos) {
    if (!v.label) throw DataError("cannot evaluate: video '" + v.id + "' has no label");
    labels.push_back(*v.label);
  }
  const auto predicted = predict(params, config, videos);
  return score_predictions(predicted, labels, reference);
}

}  // namespace ta3n::eval
