#include <algorithm>
#include <cmath>
#include <numeric>

#include "ta3n/error.hpp"
#include "ta3n/eval/metrics.hpp"
#include "ta3n/eval/probe.hpp"
#include "ta3n/losses/losses.hpp"

namespace ta3n::eval {

namespace {

constexpr std::size_t kProbeIterations = 500;
constexpr double kProbeStep = 0.5;

}  // namespace

double probe_accuracy_labeled(std::span<const std::vector<double>> features, std::span<const int> labels,
                              std::uint64_t seed) {
  const std::size_t N = features.size();
  if (N != labels.size()) throw ShapeError("probe: feature and label counts differ");
  if (N == 0) throw DataError("probe: no features");
  const std::size_t F = features.front().size();
  for (const auto& f : features) {
    if (f.size() != F) throw ShapeError("probe: ragged feature vectors");
  }

  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "domain-probe"));
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(N)));
  const std::size_t n_test = N - n_train;
  if (n_train == 0 || n_test == 0) throw DataError("probe: degenerate 80/20 split of " + std::to_string(N) + " videos");
  bool seen[2] = {false, false};
  for (std::size_t i = 0; i < n_train; ++i) seen[labels[order[i]] != 0] = true;
  if (!seen[0] || !seen[1]) throw DataError("probe: training split contains a single domain");

  // Standardize with training-split statistics.
  std::vector<double> mu(F, 0.0), sd(F, 0.0);
  for (std::size_t i = 0; i < n_train; ++i) {
    for (std::size_t j = 0; j < F; ++j) mu[j] += features[order[i]][j];
  }
  for (double& m : mu) m /= static_cast<double>(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    for (std::size_t j = 0; j < F; ++j) sd[j] += std::pow(features[order[i]][j] - mu[j], 2);
  }
  for (double& s : sd) {
    s = std::sqrt(s / static_cast<double>(n_train));
    if (s < 1e-12) s = 1.0;
  }

  auto design = [&](std::size_t from, std::size_t to) {
    ad::Tensor x({to - from, F});
    for (std::size_t i = from; i < to; ++i) {
      for (std::size_t j = 0; j < F; ++j) x.at(i - from, j) = (features[order[i]][j] - mu[j]) / sd[j];
    }
    return x;
  };
  const ad::Tensor x_train = design(0, n_train);
  const ad::Tensor x_test = design(n_train, N);
  std::vector<int> y_train(n_train);
  for (std::size_t i = 0; i < n_train; ++i) y_train[i] = labels[order[i]];

  ad::Tensor W({F, 2});
  ad::Tensor b({2});
  for (std::size_t it = 0; it < kProbeIterations; ++it) {
    W.reset_grad();
    b.reset_grad();
    ad::Tape tape;
    ad::Var logits = ad::affine(tape.constant(x_train), tape.param("W", W), tape.param("b", b));
    tape.backward(losses::cross_entropy(logits, y_train));
    for (std::size_t k = 0; k < W.size(); ++k) W[k] -= kProbeStep * W.grad()[k];
    for (std::size_t k = 0; k < b.size(); ++k) b[k] -= kProbeStep * b.grad()[k];
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < n_test; ++i) {
    double z[2] = {b[0], b[1]};
    for (std::size_t j = 0; j < F; ++j) {
      z[0] += x_test.at(i, j) * W.at(j, 0);
      z[1] += x_test.at(i, j) * W.at(j, 1);
    }
    const int pred = z[1] > z[0] ? 1 : 0;
    if (pred == (labels[order[n_train + i]] != 0 ? 1 : 0)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n_test);
}

double probe_accuracy(std::span<const std::vector<double>> source, std::span<const std::vector<double>> target,
                      std::uint64_t seed) {
  if (source.empty() || target.empty()) throw DataError("probe: both domains must be nonempty");
  std::vector<std::vector<double>> x(source.begin(), source.end());
  x.insert(x.end(), target.begin(), target.end());
  std::vector<int> y(source.size(), 0);
  y.resize(x.size(), 1);
  return probe_accuracy_labeled(x, y, seed);
}

double domain_probe(model::ModelParams& params, const model::ModelConfig& config, const data::VideoSet& source,
                    const data::VideoSet& target, std::uint64_t seed) {
  if (source.empty() || target.empty()) throw DataError("domain probe needs nonempty source and target sets");
  const auto fs = video_features(params, config, source);
  const auto ft = video_features(params, config, target);
  return probe_accuracy(fs, ft, seed);
}

}  // namespace ta3n::eval
