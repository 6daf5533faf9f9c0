#pragma once

#include <span>
#include <vector>

#include "ta3n/autodiff/tape.hpp"

// Differentiable primitives. Every op records itself on the tape of its first input.
namespace ta3n::ad {

/// x[B×I]·W[I×O] + b[O].
Var affine(Var x, Var W, Var b);

/// Elementwise max(0, x). The subgradient at exactly 0 is 0.
Var relu(Var x);

/// Row-wise softmax over the last axis of a B×C matrix, max-subtracted.
Var softmax(Var logits);

/// [T×D] -> [D] or [B×T×D] -> [B×D].
Var mean_over_time(Var x);

/// Concatenates along the last axis. All inputs must agree on the leading extents.
Var concat(std::span<const Var> xs);

/// Gradient reversal: identity forward, backward scales by -lambda.
Var grl(Var x, double lambda);

Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
/// Multiplies row r of x by factors[r]. The factors are constants.
Var scale_rows(Var x, std::span<const double> factors);
Var sum(Var x);
Var mean(Var x);

Var reshape(Var x, Shape shape);
/// Picks rows of the matrix view of x (leading extent × rest) by index; repeats allowed.
Var gather_rows(Var x, std::span<const std::size_t> rows);

}  // namespace ta3n::ad
