#include "laf/ops.hpp"

#include <cmath>
#include <string>

#include "laf/errors.hpp"

namespace laf::nd {

namespace {

void require_rank(const Var& v, std::size_t rank, const char* op, const char* arg) {
  if (v.value().rank() != rank) {
    throw DimensionError(std::string(op) + ": " + arg + " must have rank " + std::to_string(rank) + ", got shape " +
                         shape_string(v.shape()));
  }
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()) +
                         " differ");
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var dense(Var x, Var weights, Var bias) {
  require_rank(x, 2, "dense", "x");
  require_rank(weights, 2, "dense", "weights");
  require_rank(bias, 1, "dense", "bias");
  const std::size_t n = x.shape()[0];
  const std::size_t in = x.shape()[1];
  const std::size_t out = weights.shape()[1];
  if (weights.shape()[0] != in) {
    throw DimensionError("dense: x axis 1 (" + std::to_string(in) + ") does not match weights axis 0 (" +
                         std::to_string(weights.shape()[0]) + ")");
  }
  if (bias.shape()[0] != out) {
    throw DimensionError("dense: bias axis 0 (" + std::to_string(bias.shape()[0]) + ") does not match weights axis 1 (" +
                         std::to_string(out) + ")");
  }
  const Tensor& X = x.value();
  const Tensor& W = weights.value();
  const Tensor& B = bias.value();
  Tensor y({n, out});
  for (std::size_t i = 0; i < n; ++i) {
    double* yr = y.data() + i * out;
    for (std::size_t j = 0; j < out; ++j) yr[j] = B[j];
    const double* xr = X.data() + i * in;
    for (std::size_t k = 0; k < in; ++k) {
      const double xv = xr[k];
      if (xv == 0.0) continue;
      const double* wr = W.data() + k * out;
      for (std::size_t j = 0; j < out; ++j) yr[j] += xv * wr[j];
    }
  }
  const std::size_t xid = x.id(), wid = weights.id(), bid = bias.id();
  return x.tape().record(
      std::move(y), {x, weights, bias},
      [xid, wid, bid, n, in, out](Tape& t, const Tensor& g) {
        const Tensor& X = t.value(xid);
        const Tensor& W = t.value(wid);
        if (t.requires_grad(xid)) {
          Tensor& dx = t.grad_mut(xid);
          for (std::size_t i = 0; i < n; ++i) {
            const double* gr = g.data() + i * out;
            double* dxr = dx.data() + i * in;
            for (std::size_t k = 0; k < in; ++k) {
              const double* wr = W.data() + k * out;
              double acc = 0.0;
              for (std::size_t j = 0; j < out; ++j) acc += gr[j] * wr[j];
              dxr[k] += acc;
            }
          }
        }
        if (t.requires_grad(wid)) {
          Tensor& dw = t.grad_mut(wid);
          for (std::size_t i = 0; i < n; ++i) {
            const double* gr = g.data() + i * out;
            const double* xr = X.data() + i * in;
            for (std::size_t k = 0; k < in; ++k) {
              const double xv = xr[k];
              if (xv == 0.0) continue;
              double* dwr = dw.data() + k * out;
              for (std::size_t j = 0; j < out; ++j) dwr[j] += xv * gr[j];
            }
          }
        }
        if (t.requires_grad(bid)) {
          Tensor& db = t.grad_mut(bid);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < out; ++j) db[j] += g[i * out + j];
        }
      },
      "dense");
}

Var embedding(Var table, std::span<const std::size_t> indices) {
  require_rank(table, 2, "embedding", "table");
  const std::size_t vocab = table.shape()[0];
  const std::size_t dim = table.shape()[1];
  for (std::size_t idx : indices) {
    if (idx >= vocab) {
      throw LookupError("embedding: index " + std::to_string(idx) + " out of range for vocab size " +
                        std::to_string(vocab));
    }
  }
  const Tensor& T = table.value();
  Tensor y({indices.size(), dim});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = T.row(indices[i]);
    std::copy(src.begin(), src.end(), y.row(i).begin());
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  const std::size_t tid = table.id();
  return table.tape().record(
      std::move(y), {table},
      [tid, dim, idx = std::move(idx)](Tape& t, const Tensor& g) {
        Tensor& dt = t.grad_mut(tid);
        for (std::size_t i = 0; i < idx.size(); ++i)
          for (std::size_t j = 0; j < dim; ++j) dt[idx[i] * dim + j] += g[i * dim + j];
      },
      "embedding");
}

Var sigmoid(Var x) {
  Tensor y(x.shape());
  const Tensor& X = x.value();
  for (std::size_t i = 0; i < X.size(); ++i) y[i] = sigmoid(X[i]);
  const std::size_t xid = x.id();
  Tensor saved = y;
  return x.tape().record(
      std::move(y), {x},
      [xid, s = std::move(saved)](Tape& t, const Tensor& g) {
        Tensor& dx = t.grad_mut(xid);
        for (std::size_t i = 0; i < s.size(); ++i) dx[i] += g[i] * s[i] * (1.0 - s[i]);
      },
      "sigmoid");
}

Var tanh(Var x) {
  Tensor y(x.shape());
  const Tensor& X = x.value();
  for (std::size_t i = 0; i < X.size(); ++i) y[i] = std::tanh(X[i]);
  const std::size_t xid = x.id();
  Tensor saved = y;
  return x.tape().record(
      std::move(y), {x},
      [xid, s = std::move(saved)](Tape& t, const Tensor& g) {
        Tensor& dx = t.grad_mut(xid);
        for (std::size_t i = 0; i < s.size(); ++i) dx[i] += g[i] * (1.0 - s[i] * s[i]);
      },
      "tanh");
}

Var mae_loss(Var pred, const Tensor& target) {
  const Tensor& P = pred.value();
  if (P.size() != target.size()) {
    throw DimensionError("mae_loss: pred holds " + std::to_string(P.size()) + " values, target " +
                         std::to_string(target.size()));
  }
  if (P.size() == 0) throw DimensionError("mae_loss: empty batch");
  const double n = static_cast<double>(P.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) acc += std::abs(P[i] - target[i]);
  const std::size_t pid = pred.id();
  return pred.tape().record(
      Tensor::scalar(acc / n), {pred},
      [pid, n, target](Tape& t, const Tensor& g) {
        const Tensor& P = t.value(pid);
        Tensor& dp = t.grad_mut(pid);
        for (std::size_t i = 0; i < P.size(); ++i) {
          const double diff = P[i] - target[i];
          const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
          dp[i] += g[0] * sgn / n;
        }
      },
      "mae_loss");
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] + b.value()[i];
  const std::size_t aid = a.id(), bid = b.id();
  return a.tape().record(
      std::move(y), {a, b},
      [aid, bid](Tape& t, const Tensor& g) {
        for (std::size_t id : {aid, bid}) {
          if (!t.requires_grad(id)) continue;
          Tensor& d = t.grad_mut(id);
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
        }
      },
      "add");
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] * b.value()[i];
  const std::size_t aid = a.id(), bid = b.id();
  return a.tape().record(
      std::move(y), {a, b},
      [aid, bid](Tape& t, const Tensor& g) {
        // Read both inputs before touching any gradient buffer: aid may equal bid.
        const Tensor A = t.value(aid);
        const Tensor B = t.value(bid);
        if (t.requires_grad(aid)) {
          Tensor& da = t.grad_mut(aid);
          for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * B[i];
        }
        if (t.requires_grad(bid)) {
          Tensor& db = t.grad_mut(bid);
          for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * A[i];
        }
      },
      "mul");
}

Var sum(Var x) {
  double acc = 0.0;
  for (double v : x.value().values()) acc += v;
  const std::size_t xid = x.id();
  return x.tape().record(
      Tensor::scalar(acc), {x},
      [xid](Tape& t, const Tensor& g) {
        Tensor& dx = t.grad_mut(xid);
        for (double& v : dx.values()) v += g[0];
      },
      "sum");
}

Var flatten(Var x) {
  Tensor y({x.value().size()}, std::vector<double>(x.value().values().begin(), x.value().values().end()));
  const std::size_t xid = x.id();
  return x.tape().record(
      std::move(y), {x},
      [xid](Tape& t, const Tensor& g) {
        Tensor& dx = t.grad_mut(xid);
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
      },
      "flatten");
}

Tensor dense_init(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor w({fan_in, fan_out});
  for (double& v : w.values()) v = u(rng);
  return w;
}

Tensor embedding_init(std::size_t vocab, std::size_t dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t({vocab, dim});
  for (double& v : t.values()) v = u(rng);
  return t;
}

}  // namespace laf::nd
