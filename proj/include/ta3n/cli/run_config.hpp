#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ta3n/data/generator.hpp"
#include "ta3n/eval/report.hpp"
#include "ta3n/model/config.hpp"
#include "ta3n/train/train.hpp"

namespace ta3n::cli {

enum class Variant { TemPooling, TemRelation, Ta2n, Ta3n, SourceOnly, TargetOnly };

std::string to_string(Variant v);
/// Throws ConfigError listing the accepted names.
Variant parse_variant(const std::string& s);

struct Paths {
  std::string source_file = "source.ta3f";
  std::string target_file = "target.ta3f";
  std::string model_file = "model.ta3p";
  std::string history_file = "history.jsonl";
  std::string report_file = "report.json";
  std::string pca_file = "pca.csv";
  std::string sweep_file = "sweep.json";
};

/// Value lists for the weight sweep; an empty list means "the configured value only".
struct SweepGrid {
  std::vector<double> lambda_s, lambda_r, lambda_t, gamma;
};

/// Everything a command needs. Built from `key = value` lines; see README for the keys.
struct RunConfig {
  data::DatasetSpec dataset;
  model::ModelConfig model;
  train::TrainConfig train;
  Paths paths;
  std::optional<Variant> variant;
  SweepGrid sweep;
  // Accuracy that eval reports its gain against (typically the source-only result).
  double reference_accuracy = 0.0;
  // Keys assigned explicitly (file or command line), used to detect variant conflicts.
  std::set<std::string> explicit_keys;

  /// Parses the flat format. Unknown keys, duplicate keys and bad values throw ConfigError
  /// naming the line.
  static RunConfig parse(std::string_view text);
  /// Reads and parses a file; a missing file is a ConfigError naming the path.
  static RunConfig load(const std::string& path);

  /// Assigns one key. Throws ConfigError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Applies the variant's implied flags, rejects contradictions, validates everything.
  void resolve();

  train::Regime regime() const;
  /// The model configuration actually trained (regime and zero weights applied).
  model::ModelConfig effective_model() const;

  /// Every key with its current value, in documentation order.
  eval::ConfigEcho echo() const;
};

/// All accepted keys, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace ta3n::cli
