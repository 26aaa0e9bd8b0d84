#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "laf/tensor.hpp"

namespace laf {

/// Ragged batch of multisets of d-dimensional elements. Elements of set i are
/// rows offsets[i] .. offsets[i+1]-1 of `elements` ([total, d]).
struct SetBatch {
  nd::Tensor elements;
  std::vector<std::size_t> offsets{0};

  std::size_t num_sets() const { return offsets.size() - 1; }
  std::size_t dim() const { return elements.rank() == 2 ? elements.shape()[1] : 0; }
  std::size_t set_size(std::size_t i) const { return offsets[i + 1] - offsets[i]; }

  /// Batch of scalar sets (d = 1).
  static SetBatch from_scalars(const std::vector<std::vector<double>>& sets);
  /// Batch of vector sets; every element must have the same dimension.
  static SetBatch from_vectors(const std::vector<std::vector<std::vector<double>>>& sets);

  /// Throws DomainError naming the first empty set, DimensionError on malformed offsets.
  void require_nonempty_sets() const;
};

}  // namespace laf
