#include "laf/tape.hpp"

#include "laf/errors.hpp"
#include "laf/param_store.hpp"

namespace laf::nd {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.op = "constant";
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  n.op = "variable";
  return push(std::move(n));
}

Var Tape::parameter(ParamStore& store, const std::string& name) {
  auto& blk = store.block(name);
  Node n;
  n.value = blk.value;
  n.requires_grad = true;
  n.sink = &blk.grad;
  n.op = "parameter:" + name;
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward, std::string_view op) {
  if (!value.all_finite()) {
    throw NonFiniteError("non-finite output from '" + std::string(op) + "' of shape " + shape_string(value.shape()));
  }
  Node n;
  n.value = std::move(value);
  for (const Var& in : inputs) n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  n.op = std::string(op);
  return push(std::move(n));
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (!n.has_grad) throw Error("no gradient recorded for node '" + n.op + "'");
  return n.grad;
}

Tensor& Tape::grad_mut(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape());
    n.has_grad = true;
  }
  return n.grad;
}

std::vector<std::size_t> Tape::backward(Var root) {
  if (root.value().size() != 1) {
    throw DimensionError("backward root must hold a single value, got shape " + shape_string(root.shape()));
  }
  grad_mut(root.id()).fill(1.0);
  std::vector<std::size_t> visited;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.requires_grad) continue;
    if (n.backward) {
      n.backward(*this, n.grad);
      visited.push_back(i);
    } else if (n.sink != nullptr) {
      auto dst = n.sink->values();
      auto src = n.grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  return visited;
}

}  // namespace laf::nd
