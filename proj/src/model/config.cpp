#include "ta3n/model/config.hpp"

#include <algorithm>

#include "ta3n/error.hpp"

namespace ta3n::model {

namespace {

void check_widths(const char* what, const std::vector<std::size_t>& widths, bool allow_empty) {
  if (widths.empty() && !allow_empty) throw ConfigError(std::string(what) + " must not be empty");
  if (std::find(widths.begin(), widths.end(), std::size_t{0}) != widths.end()) {
    throw ConfigError(std::string(what) + " must all be positive");
  }
}

void check_weight(const char* name, double w) {
  if (!(w >= 0.0)) throw ConfigError(std::string(name) + " must be nonnegative");
}

}  // namespace

void ModelConfig::validate() const {
  if (feature_dim == 0) throw ConfigError("feature_dim must be positive");
  check_widths("spatial_widths", spatial_widths, false);
  check_widths("relation_widths", relation_widths, false);
  check_widths("classifier_hidden", classifier_hidden, true);
  if (frames < 2) throw ConfigError("frames (K) must be at least 2");
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (tuples_per_scale == 0) throw ConfigError("tuples_per_scale must be at least 1");
  if (eval_tuple_limit == 0) throw ConfigError("eval_tuple_limit must be at least 1");
  if (use_rd && !relational()) throw ConfigError("use_rd requires temporal_kind = relation");
  if (use_attention && !relational()) throw ConfigError("use_attention requires temporal_kind = relation");
  if (use_attention && !use_rd) throw ConfigError("use_attention requires use_rd");
  check_weight("lambda_s", weights.lambda_s);
  check_weight("lambda_r", weights.lambda_r);
  check_weight("lambda_t", weights.lambda_t);
  check_weight("gamma", weights.gamma);
}

std::size_t ModelConfig::video_feature_dim() const {
  return relational() ? relation_widths.back() : spatial_out();
}

std::string to_string(TemporalKind kind) {
  return kind == TemporalKind::Pooling ? "pooling" : "relation";
}

TemporalKind parse_temporal_kind(const std::string& s) {
  if (s == "pooling") return TemporalKind::Pooling;
  if (s == "relation") return TemporalKind::Relation;
  throw ConfigError("temporal_kind must be pooling or relation, got '" + s + "'");
}

}  // namespace ta3n::model
