#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ta3n/eval/metrics.hpp"

namespace ta3n::eval {

struct VariantResult {
  std::string name;
  Metrics metrics;
};

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// Short hex id derived from the config echo and seed; identical inputs give identical ids.
std::string run_id(const ConfigEcho& config, std::uint64_t seed);

/// JSON document: {run_id, seed, config, variants: [{name, accuracy, gain, correct, total,
/// per_class, counts, domain_probe}]}. Keys are emitted in a fixed order.
std::string report_json(const std::vector<VariantResult>& variants, const ConfigEcho& config, std::uint64_t seed);

void write_report(const std::string& path, const std::vector<VariantResult>& variants, const ConfigEcho& config,
                  std::uint64_t seed);

/// Parses a report produced by report_json back into variant results.
std::vector<VariantResult> parse_report(const std::string& json);

}  // namespace ta3n::eval
