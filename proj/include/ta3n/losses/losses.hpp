#pragma once

#include <map>
#include <span>
#include <vector>

#include "ta3n/autodiff/ops.hpp"
#include "ta3n/model/model.hpp"

namespace ta3n::losses {

/// Mean over rows of -log softmax(logits)[label], computed via log-sum-exp.
ad::Var cross_entropy(ad::Var logits, std::span<const int> labels);

/// Row entropies of a B×C probability matrix. Rows must sum to 1 within 1e-6.
ad::Var entropy(ad::Var probs);

/// Cross-entropy against domain labels (0 source, 1 target).
ad::Var domain_loss(ad::Var domain_logits, std::span<const int> domain_labels);

/// Per-row factor 1 + H(softmax(domain logits)).
std::vector<double> attentive_factors(const ad::Tensor& domain_logits);

/// Mean over videos of (1 + H(d)) * H(y). The domain factor is a constant for backward;
/// pass `frozen_factors` to pin it to earlier values.
ad::Var attentive_entropy(ad::Var class_logits, ad::Var domain_logits,
                          const std::vector<double>* frozen_factors = nullptr);

struct LossBreakdown {
  double L_y = 0.0;
  double L_sd = 0.0;
  double L_rd = 0.0;
  std::map<std::size_t, double> L_rd_per_scale;
  double L_td = 0.0;
  double L_ae = 0.0;
  double total = 0.0;
  std::size_t n_source = 0;
  std::size_t n_all = 0;
};

/// Weighted composition L_y + gamma L_ae + lambda^s L_sd + lambda^r L_rd + lambda^t L_td.
double total_loss(const LossBreakdown& parts, const model::LossWeights& weights);

/// Labels for one concatenated source+target batch.
struct BatchTargets {
  std::vector<int> labels;   // class id, -1 where unknown or unused
  std::vector<int> domains;  // 0 source, 1 target
};

/// Detached quantities to hold fixed (gradient checks).
struct FrozenLossFactors {
  std::vector<double> attentive;
};

struct Objective {
  // Scalar handed to backward(). Domain terms enter with unit weight: their lambdas
  // live in the gradient reversal scales, so discriminators descend their own losses
  // and the feature extractor receives -lambda * ramp times the domain gradient.
  ad::Var objective;
  // Individual terms as tape values (absent terms are invalid Vars).
  ad::Var L_y, L_sd, L_rd, L_td, L_ae;
  LossBreakdown breakdown;
  std::vector<double> attentive_factors;
};

/// Builds every loss term enabled by `config` for one forward output.
/// A domain term is active when its placement is enabled and its lambda is positive;
/// the attentive entropy term when attention is on and gamma is positive.
Objective build_objective(const model::ForwardOutput& out, const BatchTargets& targets,
                          const model::ModelConfig& config, const FrozenLossFactors* frozen = nullptr);

}  // namespace ta3n::losses
