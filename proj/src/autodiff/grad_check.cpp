#include "ta3n/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "ta3n/error.hpp"

namespace ta3n::ad {

namespace {

double checked(double v) {
  if (!std::isfinite(v)) throw NumericError("grad_check: objective is not finite");
  return v;
}

}  // namespace

GradCheckResult grad_check(const Objective& objective, const NamedTensors& params, double eps) {
  ScalarFn value = [&objective] {
    Tape tape;
    return objective(tape).value()[0];
  };
  return grad_check(objective, value, params, eps);
}

GradCheckResult grad_check(const Objective& objective, const ScalarFn& reference,
                           const NamedTensors& params, double eps) {
  if (!(eps > 0.0)) throw ConfigError("grad_check: eps must be positive");

  for (auto& [name, t] : params) t->reset_grad();
  {
    Tape tape;
    Var loss = objective(tape);
    checked(loss.value()[0]);
    tape.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& [name, t] : params) {
    analytic.emplace_back(t->grad().begin(), t->grad().end());
    t->reset_grad();
  }

  GradCheckResult result;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& t = *params[p].second;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + eps;
      const double up = checked(reference());
      t[i] = saved - eps;
      const double down = checked(reference());
      t[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[p][i];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++result.coordinates;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = params[p].first;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace ta3n::ad
