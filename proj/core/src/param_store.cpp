#include "laf/param_store.hpp"

#include "laf/errors.hpp"

namespace laf::nd {

ParamBlock& ParamStore::add(const std::string& name, Tensor init) {
  if (contains(name)) throw ConfigError("duplicate parameter block '" + name + "'");
  const Shape shape = init.shape();
  ParamBlock blk{std::move(init), Tensor(shape), Tensor(shape), Tensor(shape)};
  return blocks_.emplace(name, std::move(blk)).first->second;
}

ParamBlock& ParamStore::block(const std::string& name) {
  auto it = blocks_.find(name);
  if (it == blocks_.end()) throw ConfigError("unknown parameter block '" + name + "'");
  return it->second;
}

const ParamBlock& ParamStore::block(const std::string& name) const {
  auto it = blocks_.find(name);
  if (it == blocks_.end()) throw ConfigError("unknown parameter block '" + name + "'");
  return it->second;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, b] : blocks_) n += b.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, b] : blocks_) b.grad.fill(0.0);
}

std::map<std::string, Tensor> ParamStore::snapshot() const {
  std::map<std::string, Tensor> out;
  for (const auto& [name, b] : blocks_) out.emplace(name, b.value);
  return out;
}

void ParamStore::restore(const std::map<std::string, Tensor>& values) {
  for (const auto& [name, v] : values) {
    auto& b = block(name);
    if (b.value.shape() != v.shape()) {
      throw DimensionError("restore of '" + name + "': shape " + shape_string(v.shape()) + " vs " +
                           shape_string(b.value.shape()));
    }
    b.value = v;
  }
}

}  // namespace laf::nd
