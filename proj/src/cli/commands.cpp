#include "ta3n/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <random>
#include <tuple>

#include "ta3n/data/feature_file.hpp"
#include "ta3n/data/generator.hpp"
#include "ta3n/error.hpp"
#include "ta3n/eval/pca.hpp"
#include "ta3n/eval/report.hpp"
#include "ta3n/losses/losses.hpp"
#include "ta3n/train/param_file.hpp"

namespace ta3n::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string into_dir(const std::string& dir, const std::string& path) {
  return (fs::path(dir) / fs::path(path).filename()).string();
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
}

data::VideoSet load_required(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw DataError(std::string(what) + " file '" + path + "' does not exist");
  return data::load_feature_file(path);
}

bool fully_labeled(const data::VideoSet& set) {
  return !set.empty() && std::all_of(set.begin(), set.end(), [](const auto& v) { return v.label.has_value(); });
}

void check_widths(const data::VideoSet& set, const model::ModelConfig& mc, const std::string& path) {
  for (const auto& v : set) {
    if (v.feature_dim() != mc.feature_dim) {
      throw DataError("'" + path + "' holds features of width " + std::to_string(v.feature_dim()) +
                      " but the model expects feature_dim " + std::to_string(mc.feature_dim));
    }
  }
}

json metrics_json(const eval::Metrics& m) {
  json j;
  j["accuracy"] = m.accuracy;
  j["correct"] = m.correct;
  j["total"] = m.total;
  json per_class = json::object();
  for (const auto& [c, a] : m.per_class) per_class[std::to_string(c)] = a;
  j["per_class"] = per_class;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

struct Training {
  train::FitResult fit;
  model::ModelConfig model;
  std::optional<data::VideoSet> eval_set;
};

// Loads the files the regime needs and fits. The target file doubles as the eval set
// when it is present and fully labeled.
Training run_training(const RunConfig& config) {
  const train::Regime regime = config.regime();
  Training t;
  t.model = config.effective_model();
  data::VideoSet source, target;
  if (regime != train::Regime::TargetOnly) source = load_required(config.paths.source_file, "source");
  const bool need_target = regime == train::Regime::TargetOnly ||
                           (regime == train::Regime::Adaptive &&
                            (t.model.use_sd || t.model.use_rd || t.model.use_td || t.model.use_attention));
  if (need_target) {
    target = load_required(config.paths.target_file, "target");
  } else if (fs::exists(config.paths.target_file)) {
    target = data::load_feature_file(config.paths.target_file);
  }
  check_widths(source, t.model, config.paths.source_file);
  check_widths(target, t.model, config.paths.target_file);
  if (fully_labeled(target)) t.eval_set = target;
  t.fit = train::fit(config.train, config.model, source, target, t.eval_set ? &*t.eval_set : nullptr);
  return t;
}

}  // namespace

std::string history_line(const train::EpochRecord& r) {
  json j;
  j["epoch"] = r.epoch;
  j["steps"] = r.steps;
  j["progress"] = r.progress;
  j["grl_ramp"] = r.grl_ramp;
  j["L_y"] = r.loss.L_y;
  j["L_sd"] = r.loss.L_sd;
  j["L_rd"] = r.loss.L_rd;
  json scales = json::object();
  for (const auto& [n, v] : r.loss.L_rd_per_scale) scales[std::to_string(n)] = v;
  j["L_rd_per_scale"] = scales;
  j["L_td"] = r.loss.L_td;
  j["L_ae"] = r.loss.L_ae;
  j["total"] = r.loss.total;
  j["n_source"] = r.loss.n_source;
  j["n_all"] = r.loss.n_all;
  j["eval"] = r.eval ? metrics_json(*r.eval) : json(nullptr);
  return j.dump();
}

RunConfig load_run_config(const std::string& command, const CommandOptions& options) {
  RunConfig c = options.config_path ? RunConfig::load(*options.config_path) : RunConfig{};
  if (options.seed) {
    c.set("seed", std::to_string(*options.seed));
    if (command == "gen-data") c.set("data_seed", std::to_string(*options.seed));
  }
  if (options.variant) c.set("variant", *options.variant);
  if (options.out) {
    auto& p = c.paths;
    if (command == "gen-data") {
      p.source_file = into_dir(*options.out, p.source_file);
      p.target_file = into_dir(*options.out, p.target_file);
    } else if (command == "train") {
      p.model_file = into_dir(*options.out, p.model_file);
      p.history_file = into_dir(*options.out, p.history_file);
    } else if (command == "eval") {
      p.report_file = into_dir(*options.out, p.report_file);
      p.pca_file = into_dir(*options.out, p.pca_file);
    } else if (command == "sweep") {
      p.sweep_file = into_dir(*options.out, p.sweep_file);
    }
  }
  if (options.model_path) c.paths.model_file = *options.model_path;
  if (options.data_path) c.paths.target_file = *options.data_path;
  c.resolve();
  return c;
}

int cmd_gen_data(const RunConfig& config, std::ostream& out) {
  const data::Dataset ds = data::generate_dataset(config.dataset);
  ensure_parent(config.paths.source_file);
  ensure_parent(config.paths.target_file);
  data::save_feature_file(ds.source, config.paths.source_file);
  data::save_feature_file(ds.target, config.paths.target_file);
  out << "wrote " << ds.source.size() << " source videos to " << config.paths.source_file << "\n";
  out << "wrote " << ds.target.size() << " target videos to " << config.paths.target_file << "\n";
  return kExitOk;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  const Training t = run_training(config);
  ensure_parent(config.paths.model_file);
  train::save_params(t.fit.params, config.paths.model_file);
  std::string history;
  for (const auto& r : t.fit.history) {
    history += history_line(r) + "\n";
    out << "epoch " << r.epoch << " loss " << r.loss.total << " L_y " << r.loss.L_y;
    if (r.eval) out << " target_acc " << r.eval->accuracy;
    out << "\n";
  }
  write_text(config.paths.history_file, history);
  if (t.fit.ramp_clamps) out << "warning: progress left [0, 1] " << t.fit.ramp_clamps << " times\n";
  out << "model written to " << config.paths.model_file << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const model::ModelConfig mc = config.effective_model();
  if (!fs::exists(config.paths.model_file)) {
    throw DataError("model file '" + config.paths.model_file + "' does not exist");
  }
  model::ModelParams params = train::load_params(config.paths.model_file);
  model::check_params(mc, params);
  const data::VideoSet videos = load_required(config.paths.target_file, "data");
  check_widths(videos, mc, config.paths.target_file);

  eval::VariantResult result;
  result.name = config.variant ? to_string(*config.variant) : "model";
  result.metrics = eval::evaluate(params, mc, videos, config.reference_accuracy);

  // The probe compares the evaluated videos with the source file when both domains are at hand.
  std::optional<data::VideoSet> source;
  const bool all_target = std::all_of(videos.begin(), videos.end(),
                                      [](const auto& v) { return v.domain == data::Domain::Target; });
  if (all_target && fs::exists(config.paths.source_file) &&
      fs::absolute(config.paths.source_file) != fs::absolute(config.paths.target_file)) {
    source = data::load_feature_file(config.paths.source_file);
    check_widths(*source, mc, config.paths.source_file);
    result.metrics.domain_probe_accuracy = eval::domain_probe(params, mc, *source, videos);
  }

  ensure_parent(config.paths.report_file);
  eval::write_report(config.paths.report_file, {result}, config.echo(), config.train.seed);
  out << result.name << " accuracy " << result.metrics.accuracy << " (" << result.metrics.correct << "/"
      << result.metrics.total << ") gain " << result.metrics.gain;
  if (result.metrics.domain_probe_accuracy) out << " domain_probe " << *result.metrics.domain_probe_accuracy;
  out << "\nreport written to " << config.paths.report_file << "\n";

  if (options.pca) {
    std::vector<std::vector<double>> feats;
    std::vector<eval::ProjectionRow> rows;
    auto add = [&](const data::VideoSet& set) {
      for (auto& f : eval::video_features(params, mc, set)) feats.push_back(std::move(f));
      for (const auto& v : set) rows.push_back({v.id, v.domain, v.label, {0.0, 0.0}});
    };
    if (source) add(*source);
    add(videos);
    const eval::PcaResult pca = eval::pca_project(feats);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].xy = pca.coords[i];
    ensure_parent(config.paths.pca_file);
    eval::write_pca_csv(config.paths.pca_file, rows);
    if (pca.zero_variance) out << "warning: features have zero variance\n";
    out << "projection written to " << config.paths.pca_file << "\n";
  }
  return kExitOk;
}

model::ModelConfig gradcheck_config(Variant variant) {
  model::ModelConfig c;
  c.feature_dim = 4;
  c.frames = 3;
  c.num_classes = 3;
  c.spatial_widths = {4};
  c.relation_widths = {4};
  c.classifier_hidden = {};
  c.domain_hidden = 4;
  c.tuples_per_scale = 3;
  c.weights = {1.0, 1.0, 1.0, 0.3};
  c.use_sd = c.use_td = true;
  switch (variant) {
    case Variant::TemPooling:
      c.temporal_kind = model::TemporalKind::Pooling;
      break;
    case Variant::TemRelation:
      c.temporal_kind = model::TemporalKind::Relation;
      break;
    case Variant::Ta2n:
      c.temporal_kind = model::TemporalKind::Relation;
      c.use_rd = true;
      break;
    case Variant::Ta3n:
      c.temporal_kind = model::TemporalKind::Relation;
      c.use_rd = c.use_attention = true;
      break;
    default:
      throw ConfigError("gradient checks cover tempooling, temrelation, ta2n and ta3n only");
  }
  c.validate();
  return c;
}

ad::GradCheckResult gradcheck_model(const model::ModelConfig& config, double grl_scale, std::size_t batch,
                                    std::uint64_t seed) {
  config.validate();
  model::ModelParams params = model::init_params(config, seed);
  const std::size_t B = 2 * batch, K = config.frames, D = config.feature_dim;

  ad::Tensor frames({B, K, D});
  Rng data_rng(derive_seed(seed, "gradcheck-frames"));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& x : frames.values()) x = normal(data_rng);
  losses::BatchTargets targets;
  for (std::size_t i = 0; i < B; ++i) {
    const bool source = i < batch;
    targets.labels.push_back(source ? static_cast<int>(i % config.num_classes) : -1);
    targets.domains.push_back(source ? 0 : 1);
  }

  model::ForwardOptions options;
  options.mode = model::Mode::Train;
  options.grl = model::GrlScales::uniform(grl_scale);
  const std::uint64_t tuple_seed = derive_seed(seed, "gradcheck-tuples");

  // Base point: record the detached quantities, then hold them fixed.
  model::AttentionWeights attention;
  losses::FrozenLossFactors factors;
  {
    ad::Tape tape;
    Rng rng(tuple_seed);
    const auto out = model::forward(tape, frames, config, params, options, rng);
    const auto obj = losses::build_objective(out, targets, config);
    attention = out.attention_weights;
    factors.attentive = obj.attentive_factors;
  }
  options.frozen_attention = &attention;

  auto evaluate = [&](ad::Tape& tape) {
    Rng rng(tuple_seed);
    const auto out = model::forward(tape, frames, config, params, options, rng);
    return losses::build_objective(out, targets, config, &factors);
  };
  const ad::Objective objective = [&](ad::Tape& tape) { return evaluate(tape).objective; };

  const auto& w = config.weights;
  const ad::ScalarFn feature_loss = [&]() {
    ad::Tape tape;
    const auto obj = evaluate(tape);
    const auto& br = obj.breakdown;
    double f = br.L_y;
    if (config.use_attention && w.gamma > 0.0) f += w.gamma * br.L_ae;
    if (config.use_sd && w.lambda_s > 0.0) f -= grl_scale * br.L_sd;
    if (config.use_rd && w.lambda_r > 0.0) f -= grl_scale * br.L_rd;
    if (config.use_td && w.lambda_t > 0.0) f -= grl_scale * br.L_td;
    return f;
  };
  const ad::ScalarFn domain_loss = [&]() {
    ad::Tape tape;
    const auto obj = evaluate(tape);
    const auto& br = obj.breakdown;
    double f = 0.0;
    if (config.use_sd && w.lambda_s > 0.0) f += br.L_sd;
    if (config.use_rd && w.lambda_r > 0.0) f += br.L_rd;
    if (config.use_td && w.lambda_t > 0.0) f += br.L_td;
    return f;
  };

  std::vector<std::string> feature_prefixes{model::prefix::spatial, model::prefix::classifier};
  std::vector<std::string> domain_prefixes{model::prefix::domain_sd, model::prefix::domain_td};
  for (std::size_t n = 2; n <= K; ++n) {
    feature_prefixes.push_back(model::prefix::relation(n));
    domain_prefixes.push_back(model::prefix::domain_rd(n));
  }
  ad::GradCheckResult result = ad::grad_check(objective, feature_loss, params.named(feature_prefixes));
  const ad::NamedTensors domain_params = params.named(domain_prefixes);
  if (!domain_params.empty()) {
    const ad::GradCheckResult d = ad::grad_check(objective, domain_loss, domain_params);
    result.coordinates += d.coordinates;
    if (d.max_rel_error > result.max_rel_error) {
      result.max_rel_error = d.max_rel_error;
      result.worst_param = d.worst_param;
      result.worst_index = d.worst_index;
    }
  }
  return result;
}

int cmd_gradcheck(const RunConfig&, std::ostream& out) {
  constexpr double kTolerance = 1e-4;
  bool all_pass = true;
  for (Variant v : {Variant::TemPooling, Variant::TemRelation, Variant::Ta2n, Variant::Ta3n}) {
    const ad::GradCheckResult r = gradcheck_model(gradcheck_config(v));
    const bool pass = r.max_rel_error < kTolerance;
    all_pass = all_pass && pass;
    out << to_string(v) << " max_rel_error " << r.max_rel_error << " over " << r.coordinates << " coordinates";
    if (!r.worst_param.empty()) out << " (worst " << r.worst_param << "[" << r.worst_index << "])";
    out << (pass ? " PASS" : " FAIL") << "\n";
  }
  return all_pass ? kExitOk : kExitNumeric;
}

int cmd_sweep(const RunConfig& config, std::ostream& out) {
  const auto& g = config.sweep;
  const auto& w = config.model.weights;
  auto axis = [&config](const std::vector<double>& values, const char* key, double fallback) {
    if (!config.explicit_keys.count(key)) return std::vector<double>{fallback};
    if (values.empty()) throw ConfigError(std::string("empty grid: ") + key + " has no values");
    return values;
  };
  const auto ls = axis(g.lambda_s, "sweep_lambda_s", w.lambda_s);
  const auto lr = axis(g.lambda_r, "sweep_lambda_r", w.lambda_r);
  const auto lt = axis(g.lambda_t, "sweep_lambda_t", w.lambda_t);
  const auto gm = axis(g.gamma, "sweep_gamma", w.gamma);

  const data::VideoSet source = load_required(config.paths.source_file, "source");
  const data::VideoSet target = load_required(config.paths.target_file, "target");
  if (!fully_labeled(target)) throw DataError("sweep ranks by target accuracy; '" + config.paths.target_file +
                                              "' has unlabeled videos");
  check_widths(source, config.model, config.paths.source_file);
  check_widths(target, config.model, config.paths.target_file);

  train::TrainConfig tc = config.train;
  tc.eval_every_epoch = false;
  auto final_accuracy = [&](const train::TrainConfig& c, const model::ModelConfig& mc) {
    const auto fit = train::fit(c, mc, source, target, &target);
    return fit.history.back().eval->accuracy;
  };

  train::TrainConfig so = tc;
  so.regime = train::Regime::SourceOnly;
  const double reference = final_accuracy(so, config.model);
  out << "source-only target accuracy " << reference << "\n";

  struct Entry {
    std::array<double, 4> weights;
    double accuracy;
  };
  std::vector<Entry> entries;
  for (double a : ls)
    for (double b : lr)
      for (double c : lt)
        for (double d : gm) {
          model::ModelConfig mc = config.model;
          mc.weights = {a, b, c, d};
          const double acc = final_accuracy(tc, mc);
          entries.push_back({{a, b, c, d}, acc});
          out << "lambda_s " << a << " lambda_r " << b << " lambda_t " << c << " gamma " << d << " target_acc " << acc
              << "\n";
        }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    if (x.accuracy != y.accuracy) return x.accuracy > y.accuracy;
    return x.weights < y.weights;
  });

  json doc;
  doc["run_id"] = eval::run_id(config.echo(), config.train.seed);
  doc["seed"] = config.train.seed;
  doc["variant"] = config.variant ? to_string(*config.variant) : "none";
  doc["source_only_accuracy"] = reference;
  json list = json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    json e;
    e["rank"] = i + 1;
    e["lambda_s"] = entries[i].weights[0];
    e["lambda_r"] = entries[i].weights[1];
    e["lambda_t"] = entries[i].weights[2];
    e["gamma"] = entries[i].weights[3];
    e["target_accuracy"] = entries[i].accuracy;
    e["gain"] = entries[i].accuracy - reference;
    list.push_back(e);
  }
  doc["entries"] = list;
  write_text(config.paths.sweep_file, doc.dump(2) + "\n");
  out << "sweep written to " << config.paths.sweep_file << "\n";
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ShapeError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const IoError*>(&e)) return kExitData;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  return 1;
}

int run_command(const std::string& command, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig config = load_run_config(command, options);
    if (command == "gen-data") return cmd_gen_data(config, out);
    if (command == "train") return cmd_train(config, out);
    if (command == "eval") return cmd_eval(config, options, out);
    if (command == "gradcheck") return cmd_gradcheck(config, out);
    if (command == "sweep") return cmd_sweep(config, out);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace ta3n::cli
