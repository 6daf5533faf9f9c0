#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ta3n/autodiff/tape.hpp"

namespace ta3n::ad {

using NamedTensors = std::vector<std::pair<std::string, Tensor*>>;

/// Builds the computation on a fresh tape and returns the scalar to differentiate.
using Objective = std::function<Var(Tape&)>;
/// Evaluates the scalar whose finite differences are compared with the analytic gradient.
using ScalarFn = std::function<double()>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
};

/// Compares backward() of `objective` with central differences of the same objective.
/// Relative error per coordinate is |a - n| / max(1e-8, |a| + |n|).
GradCheckResult grad_check(const Objective& objective, const NamedTensors& params, double eps = 1e-5);

/// Variant where the finite-difference side is a separate scalar. Used when the
/// backward pass is not the gradient of a single function (gradient reversal,
/// detached factors) and the caller supplies the function each parameter group
/// actually descends.
GradCheckResult grad_check(const Objective& objective, const ScalarFn& reference,
                           const NamedTensors& params, double eps = 1e-5);

}  // namespace ta3n::ad
