#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ta3n/autodiff/tensor.hpp"

namespace ta3n::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while its tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  bool valid() const { return tape != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Define-by-run record of primitive applications.
///
/// Nodes are appended in evaluation order, so the node list is always a
/// topological order and backward() simply walks it in reverse. Parameters are
/// leaves bound to an external Tensor; backward() adds into that tensor's grad
/// slot, so repeated calls accumulate until the caller resets.
class Tape {
 public:
  /// Receives the tape and the gradient flowing into the node's output.
  using BackwardFn = std::function<void(Tape&, std::span<const double>)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf whose gradient can be read back with grad() after backward().
  Var input(Tensor value);
  /// Leaf bound to a trainable tensor. Registering the same name twice returns the first Var.
  Var param(const std::string& name, Tensor& target);

  /// Appends an op output. `inputs` decide whether the node needs a gradient;
  /// `fn` is dropped when none of them do.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn fn);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  /// Gradient of the last backward() with respect to v (zeros if v was unreached).
  std::vector<double> grad(Var v) const;
  /// Mutable gradient accumulator used by backward rules. Allocates on first touch.
  std::span<double> grad_slot(Var v);

  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  const std::map<std::string, Var>& parameters() const { return params_; }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    BackwardFn backward;
    Tensor* sink = nullptr;
    bool requires_grad = false;
  };

  Var push(Node node);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  std::map<std::string, Var> params_;
};

}  // namespace ta3n::ad
