#include "ta3n/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "ta3n/error.hpp"

namespace ta3n::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& v, F convert) {
  std::vector<T> out;
  if (v.empty() || v == "none") return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(convert(key, trim(item)));
  return out;
}

std::string fmt(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string fmt(std::size_t x) { return std::to_string(x); }
std::string fmt(bool b) { return b ? "true" : "false"; }

template <class T>
std::string fmt_list(const std::vector<T>& xs) {
  if (xs.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt(xs[i]);
  return out;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define TA3N_SIZE(key, field) \
  Key{key, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_size(k, v); }, \
      [](const RunConfig& c) { return fmt(static_cast<std::size_t>(c.field)); }}
#define TA3N_DOUBLE(key, field) \
  Key{key, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); }, \
      [](const RunConfig& c) { return fmt(c.field); }}
#define TA3N_BOOL(key, field) \
  Key{key, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_bool(k, v); }, \
      [](const RunConfig& c) { return fmt(c.field); }}
#define TA3N_STRING(key, field) \
  Key{key, [](RunConfig& c, const std::string&, const std::string& v) { c.field = v; }, \
      [](const RunConfig& c) { return c.field; }}
#define TA3N_SIZES(key, field) \
  Key{key, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_list<std::size_t>(k, v, to_size); }, \
      [](const RunConfig& c) { return fmt_list(c.field); }}
#define TA3N_DOUBLES(key, field) \
  Key{key, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_list<double>(k, v, to_double); }, \
      [](const RunConfig& c) { return fmt_list(c.field); }}

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      // dataset; num_classes and feature_dim are shared with the model
      Key{"num_classes",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            c.dataset.num_classes = c.model.num_classes = to_size(k, v);
          },
          [](const RunConfig& c) { return fmt(c.model.num_classes); }},
      Key{"feature_dim",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            c.dataset.feature_dim = c.model.feature_dim = to_size(k, v);
          },
          [](const RunConfig& c) { return fmt(c.model.feature_dim); }},
      TA3N_SIZE("video_frames", dataset.frames),
      TA3N_SIZE("videos_per_class_per_domain", dataset.videos_per_class_per_domain),
      TA3N_DOUBLE("noise_sigma", dataset.noise_sigma),
      TA3N_DOUBLE("shift_alpha", dataset.shift_alpha),
      TA3N_DOUBLE("shift_bias_scale", dataset.shift_bias_scale),
      TA3N_DOUBLE("warp_gamma", dataset.warp_gamma),
      Key{"data_seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.dataset.seed = to_size(k, v); },
          [](const RunConfig& c) { return fmt(static_cast<std::size_t>(c.dataset.seed)); }},
      // model
      Key{"temporal_kind",
          [](RunConfig& c, const std::string&, const std::string& v) {
            c.model.temporal_kind = model::parse_temporal_kind(v);
          },
          [](const RunConfig& c) { return model::to_string(c.model.temporal_kind); }},
      TA3N_SIZE("k_frames", model.frames),
      TA3N_SIZES("spatial_widths", model.spatial_widths),
      TA3N_SIZES("relation_widths", model.relation_widths),
      TA3N_SIZES("classifier_hidden", model.classifier_hidden),
      TA3N_SIZE("domain_hidden", model.domain_hidden),
      TA3N_SIZE("tuples_per_scale", model.tuples_per_scale),
      TA3N_SIZE("eval_tuple_limit", model.eval_tuple_limit),
      TA3N_BOOL("use_sd", model.use_sd),
      TA3N_BOOL("use_rd", model.use_rd),
      TA3N_BOOL("use_td", model.use_td),
      TA3N_BOOL("use_attention", model.use_attention),
      Key{"td_input",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "attended") c.model.td_input = model::TdInput::Attended;
            else if (v == "unattended") c.model.td_input = model::TdInput::Unattended;
            else throw ConfigError(k + ": expected attended or unattended, got '" + v + "'");
          },
          [](const RunConfig& c) {
            return std::string(c.model.td_input == model::TdInput::Attended ? "attended" : "unattended");
          }},
      TA3N_DOUBLE("lambda_s", model.weights.lambda_s),
      TA3N_DOUBLE("lambda_r", model.weights.lambda_r),
      TA3N_DOUBLE("lambda_t", model.weights.lambda_t),
      TA3N_DOUBLE("gamma", model.weights.gamma),
      // training
      TA3N_SIZE("epochs", train.epochs),
      TA3N_SIZE("batch_size", train.batch_size),
      TA3N_DOUBLE("learning_rate", train.learning_rate),
      TA3N_DOUBLE("momentum", train.momentum),
      TA3N_DOUBLE("weight_decay", train.weight_decay),
      TA3N_DOUBLE("grl_gamma_ramp", train.grl_gamma_ramp),
      TA3N_DOUBLE("clip_grad_norm", train.clip_grad_norm),
      Key{"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.seed = to_size(k, v); },
          [](const RunConfig& c) { return fmt(static_cast<std::size_t>(c.train.seed)); }},
      Key{"variant", [](RunConfig& c, const std::string&, const std::string& v) { c.variant = parse_variant(v); },
          [](const RunConfig& c) { return c.variant ? to_string(*c.variant) : std::string("none"); }},
      // paths
      TA3N_STRING("source_file", paths.source_file),
      TA3N_STRING("target_file", paths.target_file),
      TA3N_STRING("model_file", paths.model_file),
      TA3N_STRING("history_file", paths.history_file),
      TA3N_STRING("report_file", paths.report_file),
      TA3N_STRING("pca_file", paths.pca_file),
      TA3N_STRING("sweep_file", paths.sweep_file),
      TA3N_DOUBLE("reference_accuracy", reference_accuracy),
      // sweep
      TA3N_DOUBLES("sweep_lambda_s", sweep.lambda_s),
      TA3N_DOUBLES("sweep_lambda_r", sweep.lambda_r),
      TA3N_DOUBLES("sweep_lambda_t", sweep.lambda_t),
      TA3N_DOUBLES("sweep_gamma", sweep.gamma),
  };
  return keys;
}

#undef TA3N_SIZE
#undef TA3N_DOUBLE
#undef TA3N_BOOL
#undef TA3N_STRING
#undef TA3N_SIZES
#undef TA3N_DOUBLES

const Key* find_key(const std::string& name) {
  for (const auto& k : key_table()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::TemPooling: return "tempooling";
    case Variant::TemRelation: return "temrelation";
    case Variant::Ta2n: return "ta2n";
    case Variant::Ta3n: return "ta3n";
    case Variant::SourceOnly: return "source_only";
    case Variant::TargetOnly: return "target_only";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::TemPooling, Variant::TemRelation, Variant::Ta2n, Variant::Ta3n, Variant::SourceOnly,
                    Variant::TargetOnly}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown variant '" + s +
                    "' (expected tempooling, temrelation, ta2n, ta3n, source_only or target_only)");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.push_back(k.name);
    return out;
  }();
  return names;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown config key '" + key + "'");
  k->set(*this, key, value);
  explicit_keys.insert(key);
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + body + "'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      c.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::resolve() {
  auto force = [this](const char* key, bool& flag, bool value, const char* why) {
    if (explicit_keys.count(key) && flag != value) {
      throw ConfigError(std::string("variant ") + to_string(*variant) + " requires " + key + " = " +
                        (value ? "true" : "false") + " (" + why + ")");
    }
    flag = value;
  };
  auto require_relation = [this]() {
    if (explicit_keys.count("temporal_kind") && model.temporal_kind != model::TemporalKind::Relation) {
      throw ConfigError("variant " + to_string(*variant) + " requires temporal_kind = relation");
    }
    model.temporal_kind = model::TemporalKind::Relation;
  };

  if (variant) {
    switch (*variant) {
      case Variant::TemPooling:
        if (explicit_keys.count("temporal_kind") && model.temporal_kind != model::TemporalKind::Pooling) {
          throw ConfigError("variant tempooling requires temporal_kind = pooling");
        }
        model.temporal_kind = model::TemporalKind::Pooling;
        force("use_rd", model.use_rd, false, "pooling has no relation features");
        force("use_attention", model.use_attention, false, "pooling has no relation features");
        break;
      case Variant::TemRelation:
        require_relation();
        force("use_attention", model.use_attention, false, "attention belongs to ta3n");
        break;
      case Variant::Ta2n:
        require_relation();
        force("use_rd", model.use_rd, true, "ta2n aligns every relation scale");
        force("use_attention", model.use_attention, false, "attention belongs to ta3n");
        if (!explicit_keys.count("use_sd")) model.use_sd = true;
        if (!explicit_keys.count("use_td")) model.use_td = true;
        break;
      case Variant::Ta3n:
        require_relation();
        force("use_rd", model.use_rd, true, "ta3n builds on ta2n");
        force("use_sd", model.use_sd, true, "ta3n uses every discriminator");
        force("use_td", model.use_td, true, "ta3n uses every discriminator");
        force("use_attention", model.use_attention, true, "ta3n is ta2n with domain attention");
        break;
      case Variant::SourceOnly:
      case Variant::TargetOnly:
        break;
    }
  }
  dataset.validate();
  model.validate();
  train.regime = regime();
  train.validate();
}

train::Regime RunConfig::regime() const {
  if (variant == Variant::SourceOnly) return train::Regime::SourceOnly;
  if (variant == Variant::TargetOnly) return train::Regime::TargetOnly;
  return train::Regime::Adaptive;
}

model::ModelConfig RunConfig::effective_model() const { return train::effective_model_config(model, regime()); }

eval::ConfigEcho RunConfig::echo() const {
  eval::ConfigEcho out;
  for (const auto& k : key_table()) out.emplace_back(k.name, k.get(*this));
  return out;
}

}  // namespace ta3n::cli
