#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "ta3n/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Temporal domain adaptation on synthetic video features"};
  app.require_subcommand(1);

  ta3n::cli::CommandOptions opts;
  std::string config, out, variant, model, data;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "key = value config file");
    sub->add_option("--seed", seed, "overrides seed (and data_seed for gen-data)");
    sub->add_option("--variant", variant, "tempooling, temrelation, ta2n, ta3n, source_only or target_only");
  };
  auto* gen = app.add_subcommand("gen-data", "write source and target feature files");
  auto* train = app.add_subcommand("train", "fit a model, write parameters and history");
  auto* eval = app.add_subcommand("eval", "score a model and write a report");
  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every variant");
  auto* sweep = app.add_subcommand("sweep", "grid search over the loss weights");
  for (auto* sub : {gen, train, eval, grad, sweep}) add_common(sub);
  for (auto* sub : {gen, train, eval, sweep}) sub->add_option("--out", out, "output directory");
  eval->add_flag("--pca", opts.pca, "also write the 2-D projection CSV");
  eval->add_option("--model", model, "model file (overrides model_file)");
  eval->add_option("--data", data, "feature file to score (overrides target_file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ta3n::cli::kExitConfig;
  }

  auto* chosen = app.get_subcommands().front();
  auto given = [chosen](const char* name) { return chosen->count(name) > 0; };
  if (given("--config")) opts.config_path = config;
  if (given("--seed")) opts.seed = seed;
  if (given("--variant")) opts.variant = variant;
  if (chosen != grad && given("--out")) opts.out = out;
  if (chosen == eval) {
    if (given("--model")) opts.model_path = model;
    if (given("--data")) opts.data_path = data;
  }
  return ta3n::cli::run_command(chosen->get_name(), opts, std::cout, std::cerr);
}
