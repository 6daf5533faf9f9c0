#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ta3n/autodiff/ops.hpp"
#include "ta3n/model/config.hpp"
#include "ta3n/model/params.hpp"
#include "ta3n/util/seed.hpp"

namespace ta3n::model {

enum class Mode { Train, Eval };

/// Relation scale n -> R_n (B×D_r).
using RelationFeatureSet = std::map<std::size_t, ad::Var>;
/// Relation scale n -> per-video attention weight.
using AttentionWeights = std::map<std::size_t, std::vector<double>>;
using Tuple = std::vector<std::size_t>;

/// Gradient-reversal strength at each discriminator placement (lambda^x times the ramp).
struct GrlScales {
  double spatial = 0.0;
  double relation = 0.0;
  double video = 0.0;

  static GrlScales uniform(double s) { return {s, s, s}; }
};

struct ForwardOptions {
  Mode mode = Mode::Train;
  GrlScales grl;
  // Replaces computed attention weights. Used by gradient checks, which must hold
  // detached quantities fixed while perturbing parameters.
  const AttentionWeights* frozen_attention = nullptr;
  // Replaces every discriminator's gradient reversal with the identity.
  bool identity_grl = false;
};

struct ForwardOutput {
  ad::Var class_logits;
  ad::Var video_feature;
  std::optional<ad::Var> spatial_domain_logits;
  std::map<std::size_t, ad::Var> relation_domain_logits;
  std::optional<ad::Var> video_domain_logits;
  AttentionWeights attention_weights;
  RelationFeatureSet relations;
};

/// Shared per-frame MLP: B×K×D -> B×K×D_s.
ad::Var spatial_module(ad::Tape& tape, ad::Var frames, const ModelConfig& config, ModelParams& params);

/// Up to m distinct strictly increasing n-tuples of {0..K-1}, uniform over the C(K, n)
/// candidates. All of them, in lexicographic order, when m >= C(K, n).
std::vector<Tuple> sample_ordered_tuples(std::size_t K, std::size_t n, std::size_t m, Rng& rng);

/// Tuples used for scale n under `mode`: m random ones in training, every tuple (or a
/// fixed seeded sample) at evaluation.
std::vector<Tuple> tuples_for_scale(const ModelConfig& config, std::size_t n, Mode mode, Rng& rng);

/// Mean over tuples of the scale-n MLP applied to the concatenated tuple frames.
ad::Var relation_feature(ad::Tape& tape, ad::Var frame_feats, std::size_t n, ModelParams& params,
                         std::span<const Tuple> tuples);

struct TemporalOutput {
  ad::Var video_feature;
  std::optional<RelationFeatureSet> relations;
};

/// Mean pooling, or the K-1 relation features and their unweighted sum.
TemporalOutput temporal_aggregate(ad::Tape& tape, ad::Var frame_feats, const ModelConfig& config,
                                  ModelParams& params, Mode mode, Rng& rng);

struct AttendedRelations {
  RelationFeatureSet attended;
  AttentionWeights weights;
};

/// w = 1 - H(softmax(domain logits)); R'_n = (1 + w) R_n with w held constant.
AttendedRelations attend_relations(const RelationFeatureSet& relations,
                                   const std::map<std::size_t, ad::Var>& domain_logits,
                                   const AttentionWeights* frozen = nullptr);

ad::Var classify(ad::Tape& tape, ad::Var video_feature, ModelParams& params);

/// classifier(grl(features, lambda)) for the discriminator stored under `prefix`.
ad::Var domain_classify(ad::Tape& tape, ad::Var features, double grl_lambda, ModelParams& params,
                        const std::string& prefix);

/// Full network on a B×K×D batch.
ForwardOutput forward(ad::Tape& tape, const ad::Tensor& frames, const ModelConfig& config,
                      ModelParams& params, const ForwardOptions& options, Rng& rng);

/// Applies the MLP stored under `prefix` (ReLU between layers, last layer linear).
ad::Var apply_mlp(ad::Tape& tape, ad::Var x, ModelParams& params, const std::string& prefix);

}  // namespace ta3n::model
