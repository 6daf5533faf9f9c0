#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

// Plain-value helpers for quantities that are treated as constants during backward.
namespace ta3n::losses {

/// Max-subtracted softmax of one row of logits.
inline std::vector<double> softmax_row(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double mx = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

/// -sum p ln p with 0 ln 0 = 0.
inline double entropy_value(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

inline double logits_entropy_value(std::span<const double> logits) {
  const auto p = softmax_row(logits);
  return entropy_value(p);
}

}  // namespace ta3n::losses
