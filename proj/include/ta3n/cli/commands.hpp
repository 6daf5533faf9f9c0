#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ta3n/autodiff/grad_check.hpp"
#include "ta3n/cli/run_config.hpp"

namespace ta3n::cli {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// Command-line overrides shared by every subcommand.
struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> out;  // output directory
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  bool pca = false;
  std::optional<std::string> model_path;  // eval: overrides model_file
  std::optional<std::string> data_path;   // eval: overrides target_file
};

/// Loads the config (defaults when no path), applies overrides and resolves it.
/// `--out` redirects the command's output files into that directory.
RunConfig load_run_config(const std::string& command, const CommandOptions& options);

int cmd_gen_data(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_gradcheck(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);

/// Runs a subcommand by name, printing errors to `err` and mapping them onto exit codes.
int run_command(const std::string& command, const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

// Gradient check harness, also used by the tests.

/// Tiny model (D=4, K=3, C=3, widths 4) for one of the four architectures.
model::ModelConfig gradcheck_config(Variant variant);

/// Checks every parameter of `config` on a fixed batch of `batch` videos per domain.
/// Detached quantities (attention weights, attentive factors) are held at their values
/// at the base point. Feature-side parameters are compared against finite differences
/// of L_y + gamma L_ae - g_s L_sd - g_r L_rd - g_t L_td (the loss they descend through
/// the reversal layers, g being the reversal scale); discriminator parameters against
/// finite differences of their own domain losses.
ad::GradCheckResult gradcheck_model(const model::ModelConfig& config, double grl_scale = 1.0,
                                    std::size_t batch = 2, std::uint64_t seed = 3);

/// One JSON line per epoch for the training history.
std::string history_line(const train::EpochRecord& record);

}  // namespace ta3n::cli
