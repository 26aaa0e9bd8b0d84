#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "laf/tensor.hpp"

namespace laf::nd {

/// One named trainable tensor plus its gradient buffer and Adam moments.
struct ParamBlock {
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
};

/// Named parameter blocks of one model. Blocks are kept in name order so that
/// iteration (and therefore optimisation) is deterministic.
class ParamStore {
 public:
  ParamBlock& add(const std::string& name, Tensor init);

  bool contains(const std::string& name) const { return blocks_.count(name) != 0; }
  ParamBlock& block(const std::string& name);
  const ParamBlock& block(const std::string& name) const;
  Tensor& value(const std::string& name) { return block(name).value; }
  const Tensor& value(const std::string& name) const { return block(name).value; }

  std::map<std::string, ParamBlock>& blocks() { return blocks_; }
  const std::map<std::string, ParamBlock>& blocks() const { return blocks_; }

  std::size_t step_count() const { return step_count_; }
  std::size_t parameter_count() const;
  void zero_grad();

  /// Copies of every block's values, for checkpointing.
  std::map<std::string, Tensor> snapshot() const;
  void restore(const std::map<std::string, Tensor>& values);

 private:
  friend struct AdamAccess;
  std::map<std::string, ParamBlock> blocks_;
  std::size_t step_count_ = 0;
};

}  // namespace laf::nd
