#include "ta3n/eval/report.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "ta3n/error.hpp"
#include "ta3n/util/seed.hpp"

namespace ta3n::eval {

using json = nlohmann::ordered_json;

std::string run_id(const ConfigEcho& config, std::uint64_t seed) {
  std::uint64_t h = fnv1a("ta3n-run");
  for (const auto& [k, v] : config) h = fnv1a(k + "=" + v + "\n", h);
  h = mix_seed(h ^ seed);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 12);
}

std::string report_json(const std::vector<VariantResult>& variants, const ConfigEcho& config, std::uint64_t seed) {
  json doc;
  doc["run_id"] = run_id(config, seed);
  doc["seed"] = seed;
  json cfg = json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  doc["config"] = std::move(cfg);
  json list = json::array();
  for (const auto& v : variants) {
    json e;
    e["name"] = v.name;
    e["accuracy"] = v.metrics.accuracy;
    e["gain"] = v.metrics.gain;
    e["correct"] = v.metrics.correct;
    e["total"] = v.metrics.total;
    json per_class = json::object();
    for (const auto& [c, a] : v.metrics.per_class) per_class[std::to_string(c)] = a;
    e["per_class"] = std::move(per_class);
    json counts = json::object();
    for (const auto& [c, n] : v.metrics.counts) counts[std::to_string(c)] = n;
    e["counts"] = std::move(counts);
    e["domain_probe"] = v.metrics.domain_probe_accuracy ? json(*v.metrics.domain_probe_accuracy) : json(nullptr);
    list.push_back(std::move(e));
  }
  doc["variants"] = std::move(list);
  return doc.dump(2) + "\n";
}

void write_report(const std::string& path, const std::vector<VariantResult>& variants, const ConfigEcho& config,
                  std::uint64_t seed) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open report path '" + path + "' for writing");
  out << report_json(variants, config, seed);
  if (!out) throw IoError("failed writing report '" + path + "'");
}

std::vector<VariantResult> parse_report(const std::string& text) {
  const json doc = json::parse(text);
  std::vector<VariantResult> out;
  for (const auto& e : doc.at("variants")) {
    VariantResult v;
    v.name = e.at("name").get<std::string>();
    v.metrics.accuracy = e.at("accuracy").get<double>();
    v.metrics.gain = e.at("gain").get<double>();
    v.metrics.correct = e.at("correct").get<std::size_t>();
    v.metrics.total = e.at("total").get<std::size_t>();
    for (const auto& [c, a] : e.at("per_class").items()) v.metrics.per_class[std::stoi(c)] = a.get<double>();
    for (const auto& [c, n] : e.at("counts").items()) v.metrics.counts[std::stoi(c)] = n.get<std::size_t>();
    if (!e.at("domain_probe").is_null()) v.metrics.domain_probe_accuracy = e.at("domain_probe").get<double>();
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace ta3n::eval
