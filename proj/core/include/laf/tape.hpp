#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "laf/tensor.hpp"

namespace laf::nd {

class Tape;
class ParamStore;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const { return id_; }
  Tape& tape() const { return *tape_; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Vector-Jacobian product of one node: receives the gradient flowing into the
/// node's output and accumulates into its inputs via Tape::grad_mut.
using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

/// Linear record of executed operations. backward() walks the record in exact
/// reverse order; gradients of nodes with several consumers add up.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient (input data, targets).
  Var constant(Tensor value);
  /// Leaf whose gradient is kept and readable after backward().
  Var variable(Tensor value);
  /// Leaf bound to a store block; backward() adds its gradient into block.grad.
  Var parameter(ParamStore& store, const std::string& name);

  /// Records an operation output. Throws NonFiniteError if `value` has a
  /// non-finite entry, naming `op`.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward, std::string_view op);

  /// Seeds d(root)/d(root) = 1 (root must hold one value) and propagates.
  /// Returns ids of the operation nodes whose backward ran, in visit order.
  std::vector<std::size_t> backward(Var root);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const;
  /// Gradient buffer of node `id`, zero-initialised on first access.
  Tensor& grad_mut(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var v) const { return requires_grad(v.id()); }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
    std::string op;
    Tensor* sink = nullptr;  // ParamBlock::grad for parameter leaves
  };
  Var push(Node node);

  std::vector<Node> nodes_;
};

}  // namespace laf::nd
