#include "laf/set_batch.hpp"

#include <string>

#include "laf/errors.hpp"

namespace laf {

SetBatch SetBatch::from_scalars(const std::vector<std::vector<double>>& sets) {
  SetBatch b;
  std::vector<double> flat;
  for (const auto& s : sets) {
    flat.insert(flat.end(), s.begin(), s.end());
    b.offsets.push_back(flat.size());
  }
  const std::size_t total = flat.size();
  b.elements = nd::Tensor({total, 1}, std::move(flat));
  return b;
}

SetBatch SetBatch::from_vectors(const std::vector<std::vector<std::vector<double>>>& sets) {
  SetBatch b;
  std::size_t d = 0;
  bool have_dim = false;
  std::vector<double> flat;
  std::size_t total = 0;
  for (const auto& s : sets) {
    for (const auto& e : s) {
      if (!have_dim) {
        d = e.size();
        have_dim = true;
      } else if (e.size() != d) {
        throw DimensionError("set element of dimension " + std::to_string(e.size()) + ", expected " + std::to_string(d));
      }
      flat.insert(flat.end(), e.begin(), e.end());
      ++total;
    }
    b.offsets.push_back(total);
  }
  b.elements = nd::Tensor({total, d}, std::move(flat));
  return b;
}

void SetBatch::require_nonempty_sets() const {
  if (offsets.empty() || offsets.front() != 0 || elements.rank() != 2 || offsets.back() != elements.shape()[0]) {
    throw DimensionError("set batch offsets do not cover the element matrix");
  }
  for (std::size_t i = 0; i < num_sets(); ++i) {
    if (offsets[i + 1] < offsets[i]) throw DimensionError("set batch offsets decrease at set " + std::to_string(i));
    if (offsets[i + 1] == offsets[i]) throw DomainError("empty set at batch index " + std::to_string(i));
  }
}

}  // namespace laf
