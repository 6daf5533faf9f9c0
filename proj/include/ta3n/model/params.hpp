#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ta3n/autodiff/grad_check.hpp"
#include "ta3n/autodiff/tensor.hpp"
#include "ta3n/model/config.hpp"

namespace ta3n::model {

/// Parameter name prefixes, one per sub-network.
namespace prefix {
inline const std::string spatial = "spatial";
inline const std::string classifier = "classifier";
inline const std::string domain_sd = "domain_sd";
inline const std::string domain_td = "domain_td";
std::string relation(std::size_t n);
std::string domain_rd(std::size_t n);
}  // namespace prefix

/// Named trainable tensors. std::map keeps iteration (and file) order stable.
class ModelParams {
 public:
  std::map<std::string, ad::Tensor>& tensors() { return tensors_; }
  const std::map<std::string, ad::Tensor>& tensors() const { return tensors_; }

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  ad::Tensor& at(const std::string& name);
  const ad::Tensor& at(const std::string& name) const;
  /// Number of layers stored under `prefix` (prefix.0.weight, prefix.1.weight, ...).
  std::size_t layer_count(const std::string& prefix) const;

  void zero_grad();
  ad::NamedTensors named();
  /// Subset whose names start with any of the given prefixes.
  ad::NamedTensors named(const std::vector<std::string>& prefixes);
  std::size_t scalar_count() const;

 private:
  std::map<std::string, ad::Tensor> tensors_;
};

/// Adds weight/bias tensors for an MLP whose layer output widths are `widths`.
void add_mlp(ModelParams& params, const std::string& prefix, std::size_t in_dim,
             const std::vector<std::size_t>& widths, std::uint64_t seed);

/// Fresh parameters for every sub-network enabled by `config`. Deterministic in `seed`.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Throws ConfigError (naming expected and found shapes) if `params` does not fit `config`.
void check_params(const ModelConfig& config, const ModelParams& params);

}  // namespace ta3n::model
