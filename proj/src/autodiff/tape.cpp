#include "ta3n/autodiff/tape.hpp"

#include <algorithm>

#include "ta3n/error.hpp"

namespace ta3n::ad {

const Tensor& Var::value() const {
  if (!tape) throw Error("use of an unbound Var");
  return tape->value(*this);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) throw Error("Var does not belong to this tape");
  return nodes_[v.id];
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::input(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::param(const std::string& name, Tensor& target) {
  if (auto it = params_.find(name); it != params_.end()) return it->second;
  Node n;
  n.value = target;
  n.value.drop_grad();
  n.sink = &target;
  n.requires_grad = true;
  Var v = push(std::move(n));
  params_.emplace(name, v);
  return v;
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (const Var& in : inputs) {
    if (node(in).requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

std::vector<double> Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.empty()) return std::vector<double>(n.value.size(), 0.0);
  return n.grad;
}

std::span<double> Tape::grad_slot(Var v) {
  node(v);
  Node& n = nodes_[v.id];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this || loss.id >= nodes_.size()) throw Error("loss was not recorded on this tape");
  if (nodes_[loss.id].value.size() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " +
                     shape_string(nodes_[loss.id].value.shape()));
  }
  for (Node& n : nodes_) n.grad.clear();
  grad_slot(loss)[0] = 1.0;

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.requires_grad) continue;
    if (n.backward) {
      // The rule may grow other nodes' grad vectors but never this node's.
      n.backward(*this, std::span<const double>(n.grad));
    }
  }

  for (Node& n : nodes_) {
    if (!n.sink || n.grad.empty()) continue;
    std::span<double> g = n.sink->grad();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
  }
}

}  // namespace ta3n::ad
