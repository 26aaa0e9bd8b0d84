#pragma once

#include <cstddef>
#include <random>
#include <span>

#include "laf/tape.hpp"
#include "laf/tensor.hpp"

namespace laf::nd {

/// Numerically stable logistic function; never overflows.
double sigmoid(double x);

/// x[n,in] * weights[in,out] + bias[out].
Var dense(Var x, Var weights, Var bias);

/// Gathers table rows; backward scatters (and accumulates) into the table.
Var embedding(Var table, std::span<const std::size_t> indices);

Var sigmoid(Var x);
Var tanh(Var x);

/// Mean absolute error; the subgradient at pred == target is 0.
Var mae_loss(Var pred, const Tensor& target);

// Elementwise helpers, mostly for composing test graphs.
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var sum(Var x);
Var flatten(Var x);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initial weights of a [fan_in, fan_out] layer.
Tensor dense_init(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);
/// Uniform(-1, 1) initial embedding table.
Tensor embedding_init(std::size_t vocab, std::size_t dim, std::mt19937_64& rng);

}  // namespace laf::nd
