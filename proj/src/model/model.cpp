#include "ta3n/model/model.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "ta3n/error.hpp"
#include "ta3n/losses/values.hpp"

namespace ta3n::model {

using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

void enumerate_tuples(std::size_t K, std::size_t n, std::size_t start, Tuple& current,
                      std::vector<Tuple>& out) {
  if (current.size() == n) {
    out.push_back(current);
    return;
  }
  // Leave room for the remaining picks.
  for (std::size_t i = start; i + (n - current.size()) <= K; ++i) {
    current.push_back(i);
    enumerate_tuples(K, n, i + 1, current, out);
    current.pop_back();
  }
}

Var discriminate(Tape& tape, Var features, double grl_lambda, bool identity_grl, ModelParams& params,
                 const std::string& prefix) {
  if (identity_grl) {
    if (params.layer_count(prefix) == 0) {
      throw ConfigError("domain classifier '" + prefix + "' is enabled but has no parameters");
    }
    return apply_mlp(tape, features, params, prefix);
  }
  return domain_classify(tape, features, grl_lambda, params, prefix);
}

}  // namespace

Var apply_mlp(Tape& tape, Var x, ModelParams& params, const std::string& prefix) {
  const std::size_t layers = params.layer_count(prefix);
  if (layers == 0) throw ConfigError("no layers stored under '" + prefix + "'");
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string base = prefix + "." + std::to_string(l);
    Var W = tape.param(base + ".weight", params.at(base + ".weight"));
    Var b = tape.param(base + ".bias", params.at(base + ".bias"));
    x = ad::affine(x, W, b);
    if (l + 1 < layers) x = ad::relu(x);
  }
  return x;
}

Var spatial_module(Tape& tape, Var frames, const ModelConfig& config, ModelParams& params) {
  const ad::Shape& s = frames.shape();
  if (s.size() != 3) throw ShapeError("spatial_module: expected B×K×D frames, got " + ad::shape_string(s));
  if (s[2] != config.feature_dim) {
    throw ShapeError("spatial_module: frame width " + std::to_string(s[2]) + " but feature_dim is " +
                     std::to_string(config.feature_dim));
  }
  const std::size_t B = s[0], K = s[1];
  Var flat = ad::reshape(frames, {B * K, s[2]});
  Var out = apply_mlp(tape, flat, params, prefix::spatial);
  return ad::reshape(out, {B, K, out.shape()[1]});
}

std::vector<Tuple> sample_ordered_tuples(std::size_t K, std::size_t n, std::size_t m, Rng& rng) {
  if (n < 2 || n > K) {
    throw ConfigError("relation scale n=" + std::to_string(n) + " must satisfy 2 <= n <= K=" + std::to_string(K));
  }
  if (m == 0) throw ConfigError("tuples per scale must be at least 1");
  std::vector<Tuple> all;
  Tuple current;
  enumerate_tuples(K, n, 0, current, all);
  if (m >= all.size()) return all;
  // Partial Fisher-Yates: the first m slots are a uniform draw without replacement.
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(m);
  return all;
}

std::vector<Tuple> tuples_for_scale(const ModelConfig& config, std::size_t n, Mode mode, Rng& rng) {
  if (mode == Mode::Train) return sample_ordered_tuples(config.frames, n, config.tuples_per_scale, rng);
  Rng fixed(derive_seed(config.frames * 1000 + n, "eval-tuples"));
  return sample_ordered_tuples(config.frames, n, config.eval_tuple_limit, fixed);
}

Var relation_feature(Tape& tape, Var frame_feats, std::size_t n, ModelParams& params,
                     std::span<const Tuple> tuples) {
  const ad::Shape& s = frame_feats.shape();
  if (s.size() != 3) throw ShapeError("relation_feature: expected B×K×D_s, got " + ad::shape_string(s));
  const std::size_t B = s[0], K = s[1], Ds = s[2];
  const std::string pre = prefix::relation(n);
  if (params.layer_count(pre) == 0) {
    throw ConfigError("relation MLP for scale " + std::to_string(n) + " is missing");
  }
  if (tuples.empty()) throw ConfigError("relation_feature: no tuples for scale " + std::to_string(n));
  const std::size_t m = tuples.size();
  for (const Tuple& t : tuples) {
    if (t.size() != n) throw ConfigError("relation_feature: tuple size does not match scale " + std::to_string(n));
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] >= K || (i > 0 && t[i] <= t[i - 1])) {
        throw ConfigError("relation_feature: tuples must be strictly increasing frame indices below K");
      }
    }
  }

  Var flat = ad::reshape(frame_feats, {B * K, Ds});
  // Row b*m + j of each gathered block holds frame tuples[j][pos] of video b.
  std::vector<Var> columns;
  columns.reserve(n);
  std::vector<std::size_t> rows(B * m);
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t j = 0; j < m; ++j) rows[b * m + j] = b * K + tuples[j][pos];
    }
    columns.push_back(ad::gather_rows(flat, rows));
  }
  Var fused = apply_mlp(tape, ad::concat(columns), params, pre);
  const std::size_t Dr = fused.shape()[1];
  return ad::mean_over_time(ad::reshape(fused, {B, m, Dr}));
}

TemporalOutput temporal_aggregate(Tape& tape, Var frame_feats, const ModelConfig& config,
                                  ModelParams& params, Mode mode, Rng& rng) {
  if (config.temporal_kind == TemporalKind::Pooling) return {ad::mean_over_time(frame_feats), std::nullopt};

  if (frame_feats.shape().size() != 3 || frame_feats.shape()[1] != config.frames) {
    throw ShapeError("temporal_aggregate: expected K=" + std::to_string(config.frames) + " frames, got " +
                     ad::shape_string(frame_feats.shape()));
  }
  RelationFeatureSet relations;
  std::optional<Var> total;
  for (std::size_t n = 2; n <= config.frames; ++n) {
    const auto tuples = tuples_for_scale(config, n, mode, rng);
    Var r = relation_feature(tape, frame_feats, n, params, tuples);
    relations.emplace(n, r);
    total = total ? ad::add(*total, r) : r;
  }
  return {*total, std::move(relations)};
}

AttendedRelations attend_relations(const RelationFeatureSet& relations,
                                   const std::map<std::size_t, Var>& domain_logits,
                                   const AttentionWeights* frozen) {
  AttendedRelations out;
  for (const auto& [n, r] : relations) {
    std::vector<double> w;
    if (frozen) {
      auto it = frozen->find(n);
      if (it == frozen->end()) throw ConfigError("frozen attention is missing scale " + std::to_string(n));
      w = it->second;
    } else {
      auto it = domain_logits.find(n);
      if (it == domain_logits.end()) {
        throw ConfigError("attention needs domain logits for relation scale " + std::to_string(n));
      }
      const Tensor& logits = it->second.value();
      if (logits.rank() != 2 || logits.rows() != r.shape()[0]) {
        throw ShapeError("attention: domain logits " + ad::shape_string(logits.shape()) +
                         " do not match relation batch " + ad::shape_string(r.shape()));
      }
      w.resize(logits.rows());
      for (std::size_t b = 0; b < logits.rows(); ++b) {
        w[b] = 1.0 - losses::logits_entropy_value(logits.values().subspan(b * logits.cols(), logits.cols()));
      }
    }
    std::vector<double> factor(w.size());
    std::transform(w.begin(), w.end(), factor.begin(), [](double v) { return 1.0 + v; });
    out.attended.emplace(n, ad::scale_rows(r, factor));
    out.weights.emplace(n, std::move(w));
  }
  return out;
}

Var classify(Tape& tape, Var video_feature, ModelParams& params) {
  return apply_mlp(tape, video_feature, params, prefix::classifier);
}

Var domain_classify(Tape& tape, Var features, double grl_lambda, ModelParams& params, const std::string& prefix) {
  if (params.layer_count(prefix) == 0) {
    throw ConfigError("domain classifier '" + prefix + "' is enabled but has no parameters");
  }
  return apply_mlp(tape, ad::grl(features, grl_lambda), params, prefix);
}

ForwardOutput forward(Tape& tape, const Tensor& frames, const ModelConfig& config, ModelParams& params,
                      const ForwardOptions& options, Rng& rng) {
  if (frames.rank() != 3 || frames.dim(1) != config.frames || frames.dim(2) != config.feature_dim) {
    throw ShapeError("forward: expected B×" + std::to_string(config.frames) + "×" +
                     std::to_string(config.feature_dim) + " frames, got " + ad::shape_string(frames.shape()));
  }
  const std::size_t B = frames.dim(0), K = frames.dim(1);
  ForwardOutput out;
  Var feats = spatial_module(tape, tape.constant(frames), config, params);

  if (config.use_sd) {
    Var per_frame = ad::reshape(feats, {B * K, feats.shape()[2]});
    out.spatial_domain_logits =
        discriminate(tape, per_frame, options.grl.spatial, options.identity_grl, params, prefix::domain_sd);
  }

  TemporalOutput temporal = temporal_aggregate(tape, feats, config, params, options.mode, rng);
  Var video = temporal.video_feature;
  if (temporal.relations) {
    out.relations = *temporal.relations;
    if (config.use_rd) {
      for (const auto& [n, r] : out.relations) {
        out.relation_domain_logits.emplace(
            n, discriminate(tape, r, options.grl.relation, options.identity_grl, params, prefix::domain_rd(n)));
      }
    }
    if (config.use_attention) {
      AttendedRelations att = attend_relations(out.relations, out.relation_domain_logits, options.frozen_attention);
      std::optional<Var> total;
      for (const auto& [n, r] : att.attended) total = total ? ad::add(*total, r) : r;
      video = *total;
      out.attention_weights = std::move(att.weights);
    }
  }
  out.video_feature = video;

  if (config.use_td) {
    Var td_in = (config.use_attention && config.td_input == TdInput::Unattended) ? temporal.video_feature : video;
    out.video_domain_logits =
        discriminate(tape, td_in, options.grl.video, options.identity_grl, params, prefix::domain_td);
  }
  out.class_logits = classify(tape, video, params);
  return out;
}

}  // namespace ta3n::model
