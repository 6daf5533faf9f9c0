#include "ta3n/losses/losses.hpp"

#include <algorithm>
#include <cmath>

#include "ta3n/error.hpp"
#include "ta3n/losses/values.hpp"

namespace ta3n::losses {

using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

void require_matrix(const char* op, const Tensor& t) {
  if (t.rank() != 2 || t.dim(1) < 2) {
    throw ShapeError(std::string(op) + ": expected B×C with C >= 2, got " + ad::shape_string(t.shape()));
  }
}

// Log-softmax of one row into `out`; returns nothing, keeps max-subtraction.
void log_softmax_row(const double* z, std::size_t C, double* out) {
  const double mx = *std::max_element(z, z + C);
  double s = 0.0;
  for (std::size_t c = 0; c < C; ++c) s += std::exp(z[c] - mx);
  const double lse = mx + std::log(s);
  for (std::size_t c = 0; c < C; ++c) out[c] = z[c] - lse;
}

// Row entropies H(softmax(z)) straight from logits: stable when probabilities underflow.
Var logits_entropy(Var logits) {
  const Tensor& zv = logits.value();
  require_matrix("logits_entropy", zv);
  const std::size_t B = zv.dim(0), C = zv.dim(1);
  Tensor logp({B, C});
  Tensor h({B});
  for (std::size_t i = 0; i < B; ++i) {
    log_softmax_row(&zv[i * C], C, &logp[i * C]);
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) acc -= std::exp(logp[i * C + c]) * logp[i * C + c];
    h[i] = acc;
  }
  Tensor hv = h;
  return logits.tape->record(std::move(h), {logits},
      [logits, logp = std::move(logp), hv = std::move(hv), B, C](Tape& t, std::span<const double> g) {
        auto gz = t.grad_slot(logits);
        // dH/dz_c = -p_c (log p_c + H)
        for (std::size_t i = 0; i < B; ++i) {
          for (std::size_t c = 0; c < C; ++c) {
            const double lp = logp[i * C + c];
            gz[i * C + c] += g[i] * -std::exp(lp) * (lp + hv[i]);
          }
        }
      });
}

}  // namespace

Var cross_entropy(Var logits, std::span<const int> labels) {
  const Tensor& zv = logits.value();
  require_matrix("cross_entropy", zv);
  const std::size_t B = zv.dim(0), C = zv.dim(1);
  if (labels.size() != B) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(B) + " rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= C) {
      throw DataError("cross_entropy: label " + std::to_string(y) + " outside [0, " + std::to_string(C) + ")");
    }
  }
  Tensor logp({B, C});
  double loss = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    log_softmax_row(&zv[i * C], C, &logp[i * C]);
    loss -= logp[i * C + static_cast<std::size_t>(labels[i])];
  }
  loss /= static_cast<double>(B);
  std::vector<int> y(labels.begin(), labels.end());
  return logits.tape->record(Tensor::scalar(loss), {logits},
      [logits, logp = std::move(logp), y = std::move(y), B, C](Tape& t, std::span<const double> g) {
        auto gz = t.grad_slot(logits);
        const double s = g[0] / static_cast<double>(B);
        for (std::size_t i = 0; i < B; ++i) {
          for (std::size_t c = 0; c < C; ++c) {
            const double onehot = static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0;
            gz[i * C + c] += s * (std::exp(logp[i * C + c]) - onehot);
          }
        }
      });
}

Var entropy(Var probs) {
  const Tensor& pv = probs.value();
  require_matrix("entropy", pv);
  const std::size_t B = pv.dim(0), C = pv.dim(1);
  Tensor h({B});
  for (std::size_t i = 0; i < B; ++i) {
    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      if (pv[i * C + c] < 0.0) throw DataError("entropy: negative probability in row " + std::to_string(i));
      total += pv[i * C + c];
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw DataError("entropy: row " + std::to_string(i) + " sums to " + std::to_string(total) + ", not 1");
    }
    h[i] = entropy_value(pv.values().subspan(i * C, C));
  }
  return probs.tape->record(std::move(h), {probs}, [probs, B, C](Tape& t, std::span<const double> g) {
    const Tensor& pv = t.value(probs);
    auto gp = t.grad_slot(probs);
    for (std::size_t i = 0; i < B; ++i) {
      for (std::size_t c = 0; c < C; ++c) {
        const double p = pv[i * C + c];
        // -(ln p + 1) diverges at p = 0; the 0 ln 0 = 0 convention makes that entry flat.
        if (p > 0.0) gp[i * C + c] += g[i] * -(std::log(p) + 1.0);
      }
    }
  });
}

Var domain_loss(Var domain_logits, std::span<const int> domain_labels) {
  if (domain_logits.value().rank() != 2 || domain_logits.value().dim(1) != 2) {
    throw ShapeError("domain_loss: expected B×2 logits, got " + ad::shape_string(domain_logits.shape()));
  }
  for (int d : domain_labels) {
    if (d != 0 && d != 1) throw DataError("domain_loss: domain label must be 0 or 1");
  }
  return cross_entropy(domain_logits, domain_labels);
}

std::vector<double> attentive_factors(const Tensor& domain_logits) {
  require_matrix("attentive_factors", domain_logits);
  const std::size_t C = domain_logits.cols();
  std::vector<double> f(domain_logits.rows());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = 1.0 + logits_entropy_value(domain_logits.values().subspan(i * C, C));
  }
  return f;
}

Var attentive_entropy(Var class_logits, Var domain_logits, const std::vector<double>* frozen_factors) {
  const std::size_t B = class_logits.value().rows();
  if (domain_logits.value().rows() != B) {
    throw ShapeError("attentive_entropy: " + std::to_string(B) + " class rows but " +
                     std::to_string(domain_logits.value().rows()) + " domain rows");
  }
  std::vector<double> factors = frozen_factors ? *frozen_factors : attentive_factors(domain_logits.value());
  if (factors.size() != B) throw ShapeError("attentive_entropy: frozen factor count does not match batch");
  Var h = logits_entropy(class_logits);
  return ad::mean(ad::scale_rows(h, factors));
}

double total_loss(const LossBreakdown& parts, const model::LossWeights& w) {
  for (double v : {w.lambda_s, w.lambda_r, w.lambda_t, w.gamma}) {
    if (!(v >= 0.0)) throw ConfigError("loss weights must be nonnegative");
  }
  return parts.L_y + w.gamma * parts.L_ae + w.lambda_s * parts.L_sd + w.lambda_r * parts.L_rd +
         w.lambda_t * parts.L_td;
}

Objective build_objective(const model::ForwardOutput& out, const BatchTargets& targets,
                          const model::ModelConfig& config, const FrozenLossFactors* frozen) {
  Tape& tape = *out.class_logits.tape;
  const std::size_t B = out.class_logits.value().rows();
  if (targets.labels.size() != B || targets.domains.size() != B) {
    throw ShapeError("build_objective: targets do not match batch of " + std::to_string(B));
  }
  const auto& w = config.weights;
  Objective obj;
  LossBreakdown& br = obj.breakdown;
  br.n_all = B;

  std::vector<std::size_t> source_rows;
  std::vector<int> source_labels;
  for (std::size_t i = 0; i < B; ++i) {
    if (targets.domains[i] == 0) {
      source_rows.push_back(i);
      source_labels.push_back(targets.labels[i]);
    }
  }
  br.n_source = source_rows.size();

  std::vector<Var> terms;
  if (!source_rows.empty()) {
    obj.L_y = cross_entropy(ad::gather_rows(out.class_logits, source_rows), source_labels);
    br.L_y = obj.L_y.value()[0];
    terms.push_back(obj.L_y);
  }

  if (out.spatial_domain_logits) {
    const std::size_t K = out.spatial_domain_logits->value().rows() / B;
    std::vector<int> frame_domains;
    frame_domains.reserve(B * K);
    for (int d : targets.domains) frame_domains.insert(frame_domains.end(), K, d);
    obj.L_sd = domain_loss(*out.spatial_domain_logits, frame_domains);
    br.L_sd = obj.L_sd.value()[0];
    if (w.lambda_s > 0.0) terms.push_back(obj.L_sd);
  }

  if (!out.relation_domain_logits.empty()) {
    std::vector<Var> per_scale;
    for (const auto& [n, logits] : out.relation_domain_logits) {
      Var l = domain_loss(logits, targets.domains);
      br.L_rd_per_scale[n] = l.value()[0];
      per_scale.push_back(l);
    }
    Var acc = per_scale.front();
    for (std::size_t i = 1; i < per_scale.size(); ++i) acc = ad::add(acc, per_scale[i]);
    obj.L_rd = ad::scale(acc, 1.0 / static_cast<double>(per_scale.size()));
    br.L_rd = obj.L_rd.value()[0];
    if (w.lambda_r > 0.0) terms.push_back(obj.L_rd);
  }

  if (out.video_domain_logits) {
    obj.L_td = domain_loss(*out.video_domain_logits, targets.domains);
    br.L_td = obj.L_td.value()[0];
    if (w.lambda_t > 0.0) terms.push_back(obj.L_td);
  }

  if (config.use_attention) {
    if (frozen && !frozen->attentive.empty()) {
      obj.attentive_factors = frozen->attentive;
    } else if (out.video_domain_logits) {
      obj.attentive_factors = attentive_factors(out.video_domain_logits->value());
    } else {
      // Without a video-level discriminator there is no domain entropy to weight by.
      obj.attentive_factors.assign(B, 1.0);
    }
    Var h = logits_entropy(out.class_logits);
    obj.L_ae = ad::mean(ad::scale_rows(h, obj.attentive_factors));
    br.L_ae = obj.L_ae.value()[0];
    if (w.gamma > 0.0) terms.push_back(ad::scale(obj.L_ae, w.gamma));
  }

  if (terms.empty()) {
    obj.objective = tape.constant(Tensor::scalar(0.0));
  } else {
    Var acc = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) acc = ad::add(acc, terms[i]);
    obj.objective = acc;
  }
  br.total = total_loss(br, w);
  return obj;
}

}  // namespace ta3n::losses
