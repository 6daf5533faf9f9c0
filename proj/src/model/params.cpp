#include "ta3n/model/params.hpp"

#include <cmath>
#include <random>

#include "ta3n/error.hpp"
#include "ta3n/util/seed.hpp"

namespace ta3n::model {

namespace prefix {
std::string relation(std::size_t n) { return "relation" + std::to_string(n); }
std::string domain_rd(std::size_t n) { return "domain_rd" + std::to_string(n); }
}  // namespace prefix

ad::Tensor& ModelParams::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ConfigError("missing parameter '" + name + "'");
  return it->second;
}

const ad::Tensor& ModelParams::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ConfigError("missing parameter '" + name + "'");
  return it->second;
}

std::size_t ModelParams::layer_count(const std::string& prefix) const {
  std::size_t n = 0;
  while (contains(prefix + "." + std::to_string(n) + ".weight")) ++n;
  return n;
}

void ModelParams::zero_grad() {
  for (auto& [name, t] : tensors_) t.reset_grad();
}

ad::NamedTensors ModelParams::named() {
  ad::NamedTensors out;
  for (auto& [name, t] : tensors_) out.emplace_back(name, &t);
  return out;
}

ad::NamedTensors ModelParams::named(const std::vector<std::string>& prefixes) {
  ad::NamedTensors out;
  for (auto& [name, t] : tensors_) {
    for (const auto& p : prefixes) {
      if (name.compare(0, p.size() + 1, p + ".") == 0) {
        out.emplace_back(name, &t);
        break;
      }
    }
  }
  return out;
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.size();
  return n;
}

void add_mlp(ModelParams& params, const std::string& prefix, std::size_t in_dim,
             const std::vector<std::size_t>& widths, std::uint64_t seed) {
  std::size_t fan_in = in_dim;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const std::string base = prefix + "." + std::to_string(l);
    // Each tensor draws from its own stream so enabling one sub-network never
    // perturbs the initialization of another.
    Rng rng(derive_seed(seed, base));
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> uni(-bound, bound);
    ad::Tensor w({fan_in, widths[l]});
    for (double& v : w.values()) v = uni(rng);
    ad::Tensor b({widths[l]});
    for (double& v : b.values()) v = uni(rng);
    params.tensors()[base + ".weight"] = std::move(w);
    params.tensors()[base + ".bias"] = std::move(b);
    fan_in = widths[l];
  }
}

namespace {

std::vector<std::size_t> domain_widths(const ModelConfig& c) {
  if (c.domain_hidden == 0) return {2};
  return {c.domain_hidden, 2};
}

std::vector<std::size_t> classifier_widths(const ModelConfig& c) {
  std::vector<std::size_t> w = c.classifier_hidden;
  w.push_back(c.num_classes);
  return w;
}

// Expected (prefix, input width, widths) triples for a configuration.
struct MlpSpec {
  std::string prefix;
  std::size_t in_dim;
  std::vector<std::size_t> widths;
};

std::vector<MlpSpec> expected_mlps(const ModelConfig& c) {
  std::vector<MlpSpec> out;
  out.push_back({prefix::spatial, c.feature_dim, c.spatial_widths});
  if (c.relational()) {
    for (std::size_t n = 2; n <= c.frames; ++n) {
      out.push_back({prefix::relation(n), n * c.spatial_out(), c.relation_widths});
    }
  }
  out.push_back({prefix::classifier, c.video_feature_dim(), classifier_widths(c)});
  if (c.use_sd) out.push_back({prefix::domain_sd, c.spatial_out(), domain_widths(c)});
  if (c.use_rd) {
    for (std::size_t n = 2; n <= c.frames; ++n) {
      out.push_back({prefix::domain_rd(n), c.relation_widths.back(), domain_widths(c)});
    }
  }
  if (c.use_td) out.push_back({prefix::domain_td, c.video_feature_dim(), domain_widths(c)});
  return out;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams params;
  for (const auto& m : expected_mlps(config)) add_mlp(params, m.prefix, m.in_dim, m.widths, seed);
  return params;
}

void check_params(const ModelConfig& config, const ModelParams& params) {
  config.validate();
  std::size_t expected_tensors = 0;
  for (const auto& m : expected_mlps(config)) {
    std::size_t fan_in = m.in_dim;
    for (std::size_t l = 0; l < m.widths.size(); ++l) {
      const std::string base = m.prefix + "." + std::to_string(l);
      const ad::Shape want_w{fan_in, m.widths[l]};
      const ad::Shape want_b{m.widths[l]};
      const ad::Tensor& w = params.at(base + ".weight");
      const ad::Tensor& b = params.at(base + ".bias");
      if (w.shape() != want_w || b.shape() != want_b) {
        throw ConfigError("parameter '" + base + "' has shape " + ad::shape_string(w.shape()) +
                          " but the configuration needs " + ad::shape_string(want_w));
      }
      fan_in = m.widths[l];
      expected_tensors += 2;
    }
  }
  if (params.tensors().size() != expected_tensors) {
    throw ConfigError("parameter set has " + std::to_string(params.tensors().size()) +
                      " tensors but the configuration needs " + std::to_string(expected_tensors));
  }
}

}  // namespace ta3n::model
