#include "wenas/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "wenas/error.hpp"

namespace wenas::ad {
namespace {

template <typename Real>
using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using ConstMap = Eigen::Map<const RowMatrix<Real>>;
template <typename Real>
using MutMap = Eigen::Map<RowMatrix<Real>>;

template <typename Real>
ConstMap<Real> as_matrix(const Tensor<Real>& t) {
  return ConstMap<Real>(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                        static_cast<Eigen::Index>(t.cols()));
}

template <typename Real>
MutMap<Real> as_matrix(Tensor<Real>& t) {
  return MutMap<Real>(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                      static_cast<Eigen::Index>(t.cols()));
}

void require_same_shape(const Shape& a, const Shape& b, std::string_view op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
  }
}

template <typename Real>
void axpy(Tensor<Real>& dst, const Tensor<Real>& src, Real alpha = Real(1)) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += alpha * s[i];
}

}  // namespace

template <typename Real>
Var activation(Graph<Real>& g, Activation kind, Var x) {
  if (kind == Activation::identity) return x;
  const Tensor<Real>& in = g.value(x);
  Tensor<Real> out(in.shape());
  auto src = in.data();
  auto dst = out.data();
  switch (kind) {
    case Activation::tanh:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::tanh(src[i]);
      return g.record(std::move(out), {x}, [](Graph<Real>& gr, std::size_t self) {
        const Var in_var = gr.operands(self)[0];
        auto* dx = gr.grad_target(in_var);
        if (!dx) return;
        auto y = gr.value(Var{static_cast<std::uint32_t>(self)}).data();
        auto dy = gr.node_grad(self).data();
        auto d = dx->data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * (Real(1) - y[i] * y[i]);
      });
    case Activation::sigmoid:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = Real(1) / (Real(1) + std::exp(-src[i]));
      return g.record(std::move(out), {x}, [](Graph<Real>& gr, std::size_t self) {
        const Var in_var = gr.operands(self)[0];
        auto* dx = gr.grad_target(in_var);
        if (!dx) return;
        auto y = gr.value(Var{static_cast<std::uint32_t>(self)}).data();
        auto dy = gr.node_grad(self).data();
        auto d = dx->data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * y[i] * (Real(1) - y[i]);
      });
    case Activation::relu:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > Real(0) ? src[i] : Real(0);
      return g.record(std::move(out), {x}, [](Graph<Real>& gr, std::size_t self) {
        const Var in_var = gr.operands(self)[0];
        auto* dx = gr.grad_target(in_var);
        if (!dx) return;
        auto xin = gr.value(in_var).data();
        auto dy = gr.node_grad(self).data();
        auto d = dx->data();
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (xin[i] > Real(0)) d[i] += dy[i];
        }
      });
    case Activation::identity:
      break;
  }
  return x;
}

template <typename Real>
Var matmul(Graph<Real>& g, Var a, Var b) {
  const Tensor<Real>& lhs = g.value(a);
  const Tensor<Real>& rhs = g.value(b);
  if (rhs.rank() != 2 || lhs.rank() > 2 || lhs.cols() != rhs.rows()) {
    throw ShapeError("matmul: inner dimensions disagree for " + shape_string(lhs.shape()) + " x " +
                     shape_string(rhs.shape()));
  }
  Shape out_shape = lhs.rank() == 1 ? Shape{rhs.cols()} : Shape{lhs.rows(), rhs.cols()};
  Tensor<Real> out(out_shape);
  as_matrix(out).noalias() = as_matrix(lhs) * as_matrix(rhs);
  return g.record(std::move(out), {a, b}, [](Graph<Real>& gr, std::size_t self) {
    const Var av = gr.operands(self)[0];
    const Var bv = gr.operands(self)[1];
    const auto dy = as_matrix(gr.node_grad(self));
    if (auto* da = gr.grad_target(av)) as_matrix(*da).noalias() += dy * as_matrix(gr.value(bv)).transpose();
    if (auto* db = gr.grad_target(bv)) as_matrix(*db).noalias() += as_matrix(gr.value(av)).transpose() * dy;
  });
}

template <typename Real>
Var add(Graph<Real>& g, Var a, Var b) {
  const Tensor<Real>& x = g.value(a);
  const Tensor<Real>& y = g.value(b);
  require_same_shape(x.shape(), y.shape(), "add");
  Tensor<Real> out = x;
  axpy(out, y);
  return g.record(std::move(out), {a, b}, [](Graph<Real>& gr, std::size_t self) {
    for (Var v : gr.operands(self)) {
      if (auto* d = gr.grad_target(v)) axpy(*d, gr.node_grad(self));
    }
  });
}

template <typename Real>
Var sub(Graph<Real>& g, Var a, Var b) {
  const Tensor<Real>& x = g.value(a);
  const Tensor<Real>& y = g.value(b);
  require_same_shape(x.shape(), y.shape(), "sub");
  Tensor<Real> out = x;
  axpy(out, y, Real(-1));
  return g.record(std::move(out), {a, b}, [](Graph<Real>& gr, std::size_t self) {
    const auto& ops = gr.operands(self);
    if (auto* d = gr.grad_target(ops[0])) axpy(*d, gr.node_grad(self));
    if (auto* d = gr.grad_target(ops[1])) axpy(*d, gr.node_grad(self), Real(-1));
  });
}

template <typename Real>
Var mul(Graph<Real>& g, Var a, Var b) {
  const Tensor<Real>& x = g.value(a);
  const Tensor<Real>& y = g.value(b);
  require_same_shape(x.shape(), y.shape(), "mul");
  Tensor<Real> out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return g.record(std::move(out), {a, b}, [](Graph<Real>& gr, std::size_t self) {
    const Var av = gr.operands(self)[0];
    const Var bv = gr.operands(self)[1];
    const auto& dy = gr.node_grad(self);
    if (auto* da = gr.grad_target(av)) {
      const auto& yv = gr.value(bv);
      for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i] * yv[i];
    }
    if (auto* db = gr.grad_target(bv)) {
      const auto& xv = gr.value(av);
      for (std::size_t i = 0; i < dy.size(); ++i) (*db)[i] += dy[i] * xv[i];
    }
  });
}

template <typename Real>
Var scale(Graph<Real>& g, Var a, Real factor) {
  Tensor<Real> out = g.value(a);
  for (Real& v : out.storage()) v *= factor;
  return g.record(std::move(out), {a}, [factor](Graph<Real>& gr, std::size_t self) {
    if (auto* d = gr.grad_target(gr.operands(self)[0])) axpy(*d, gr.node_grad(self), factor);
  });
}

template <typename Real>
Var add_bias(Graph<Real>& g, Var a, Var bias) {
  const Tensor<Real>& x = g.value(a);
  const Tensor<Real>& b = g.value(bias);
  if (b.size() != x.cols()) {
    throw ShapeError("add_bias: bias " + shape_string(b.shape()) + " does not fit " + shape_string(x.shape()));
  }
  Tensor<Real> out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) += b[c];
  }
  return g.record(std::move(out), {a, bias}, [](Graph<Real>& gr, std::size_t self) {
    const auto& ops = gr.operands(self);
    const auto& dy = gr.node_grad(self);
    if (auto* d = gr.grad_target(ops[0])) axpy(*d, dy);
    if (auto* db = gr.grad_target(ops[1])) {
      for (std::size_t r = 0; r < dy.rows(); ++r) {
        for (std::size_t c = 0; c < dy.cols(); ++c) (*db)[c] += dy.at(r, c);
      }
    }
  });
}

template <typename Real>
Var apply_mask(Graph<Real>& g, Var a, const Tensor<Real>& mask) {
  const Tensor<Real>& x = g.value(a);
  require_same_shape(x.shape(), mask.shape(), "apply_mask");
  Tensor<Real> out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * mask[i];
  return g.record(std::move(out), {a}, [mask](Graph<Real>& gr, std::size_t self) {
    if (auto* d = gr.grad_target(gr.operands(self)[0])) {
      const auto& dy = gr.node_grad(self);
      for (std::size_t i = 0; i < dy.size(); ++i) (*d)[i] += dy[i] * mask[i];
    }
  });
}

template <typename Real>
Var sum(Graph<Real>& g, Var a) {
  Real total = 0;
  for (Real v : g.value(a).data()) total += v;
  return g.record(Tensor<Real>(Shape{1}, total), {a}, [](Graph<Real>& gr, std::size_t self) {
    if (auto* d = gr.grad_target(gr.operands(self)[0])) {
      const Real dy = gr.node_grad(self)[0];
      for (Real& v : d->storage()) v += dy;
    }
  });
}

template <typename Real>
Var softmax(Graph<Real>& g, Var v) {
  const Tensor<Real>& x = g.value(v);
  if (x.empty()) throw ConfigError("softmax: input must have at least one element");
  Tensor<Real> out(x.shape());
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    Real mx = x.at(r, 0);
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, x.at(r, c));
    Real total = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      out.at(r, c) = std::exp(x.at(r, c) - mx);
      total += out.at(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) /= total;
  }
  return g.record(std::move(out), {v}, [](Graph<Real>& gr, std::size_t self) {
    auto* dx = gr.grad_target(gr.operands(self)[0]);
    if (!dx) return;
    const auto& y = gr.value(Var{static_cast<std::uint32_t>(self)});
    const auto& dy = gr.node_grad(self);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      Real dot = 0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += dy.at(r, c) * y.at(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) dx->at(r, c) += y.at(r, c) * (dy.at(r, c) - dot);
    }
  });
}

template <typename Real>
Var cross_entropy(Graph<Real>& g, Var logits, std::span<const std::int32_t> targets) {
  const Tensor<Real>& x = g.value(logits);
  const std::size_t n = x.rows();
  const std::size_t vocab = x.cols();
  if (targets.size() != n) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                     shape_string(x.shape()));
  }
  Tensor<Real> probs(Shape{n, vocab});
  Real total = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto t = targets[r];
    if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
      throw IndexError("cross_entropy: target " + std::to_string(t) + " outside vocabulary of size " +
                       std::to_string(vocab));
    }
    Real mx = x.at(r, 0);
    for (std::size_t c = 1; c < vocab; ++c) mx = std::max(mx, x.at(r, c));
    Real z = 0;
    for (std::size_t c = 0; c < vocab; ++c) {
      probs.at(r, c) = std::exp(x.at(r, c) - mx);
      z += probs.at(r, c);
    }
    for (std::size_t c = 0; c < vocab; ++c) probs.at(r, c) /= z;
    total += (std::log(z) + mx) - x.at(r, static_cast<std::size_t>(t));
  }
  std::vector<std::int32_t> kept(targets.begin(), targets.end());
  return g.record(Tensor<Real>(Shape{1}, total / static_cast<Real>(n)), {logits},
                  [probs = std::move(probs), kept = std::move(kept)](Graph<Real>& gr, std::size_t self) {
                    auto* dx = gr.grad_target(gr.operands(self)[0]);
                    if (!dx) return;
                    const Real coef = gr.node_grad(self)[0] / static_cast<Real>(kept.size());
                    for (std::size_t r = 0; r < probs.rows(); ++r) {
                      for (std::size_t c = 0; c < probs.cols(); ++c) dx->at(r, c) += coef * probs.at(r, c);
                      dx->at(r, static_cast<std::size_t>(kept[r])) -= coef;
                    }
                  });
}

template <typename Real>
Var batch_norm(Graph<Real>& g, Var x, bool enabled, double epsilon) {
  if (!enabled) return x;
  const Tensor<Real>& in = g.value(x);
  const std::size_t m = in.rows();
  const std::size_t n = in.cols();
  if (in.rank() != 2 || m < 2) {
    throw ConfigError("batch_norm: needs a batch of at least 2 rows, got " + shape_string(in.shape()));
  }
  Tensor<Real> out(in.shape());
  std::vector<Real> inv_std(n);
  std::vector<char> constant(n, 0);
  for (std::size_t c = 0; c < n; ++c) {
    Real mean = 0;
    for (std::size_t r = 0; r < m; ++r) mean += in.at(r, c);
    mean /= static_cast<Real>(m);
    Real var = 0;
    for (std::size_t r = 0; r < m; ++r) {
      const Real d = in.at(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<Real>(m);
    inv_std[c] = Real(1) / std::sqrt(var + static_cast<Real>(epsilon));
    // A column identical across rows (e.g. a cell whose state is stuck at
    // zero) sends a gradient that sums to zero over the rows feeding it, so
    // it is dropped rather than amplified by 1/sqrt(eps) at every node.
    if (var == Real(0)) constant[c] = 1;
    for (std::size_t r = 0; r < m; ++r) out.at(r, c) = (in.at(r, c) - mean) * inv_std[c];
  }
  return g.record(std::move(out), {x}, [inv_std = std::move(inv_std), constant = std::move(constant)](Graph<Real>& gr,
                                                                                              std::size_t self) {
    auto* dx = gr.grad_target(gr.operands(self)[0]);
    if (!dx) return;
    const auto& xhat = gr.value(Var{static_cast<std::uint32_t>(self)});
    const auto& dy = gr.node_grad(self);
    const std::size_t rows = xhat.rows();
    const Real mr = static_cast<Real>(rows);
    for (std::size_t c = 0; c < xhat.cols(); ++c) {
      if (constant[c]) continue;
      Real sum_dy = 0;
      Real sum_dy_xhat = 0;
      for (std::size_t r = 0; r < rows; ++r) {
        sum_dy += dy.at(r, c);
        sum_dy_xhat += dy.at(r, c) * xhat.at(r, c);
      }
      for (std::size_t r = 0; r < rows; ++r) {
        dx->at(r, c) += inv_std[c] / mr * (mr * dy.at(r, c) - sum_dy - xhat.at(r, c) * sum_dy_xhat);
      }
    }
  });
}

template <typename Real>
Var embedding(Graph<Real>& g, Var table, std::span<const std::int32_t> tokens, const Tensor<Real>& row_scale) {
  const Tensor<Real>& emb = g.value(table);
  const std::size_t vocab = emb.rows();
  const std::size_t dim = emb.cols();
  if (!row_scale.empty() && row_scale.size() != vocab) {
    throw ShapeError("embedding: row scale " + shape_string(row_scale.shape()) + " does not fit table " +
                     shape_string(emb.shape()));
  }
  Tensor<Real> out(Shape{tokens.size(), dim});
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    const auto t = tokens[r];
    if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
      throw IndexError("embedding: token " + std::to_string(t) + " outside vocabulary of size " +
                       std::to_string(vocab));
    }
    const Real s = row_scale.empty() ? Real(1) : row_scale[static_cast<std::size_t>(t)];
    for (std::size_t c = 0; c < dim; ++c) out.at(r, c) = s * emb.at(static_cast<std::size_t>(t), c);
  }
  std::vector<std::int32_t> kept(tokens.begin(), tokens.end());
  return g.record(std::move(out), {table},
                  [kept = std::move(kept), row_scale](Graph<Real>& gr, std::size_t self) {
                    auto* dt = gr.grad_target(gr.operands(self)[0]);
                    if (!dt) return;
                    const auto& dy = gr.node_grad(self);
                    for (std::size_t r = 0; r < kept.size(); ++r) {
                      const auto t = static_cast<std::size_t>(kept[r]);
                      const Real s = row_scale.empty() ? Real(1) : row_scale[t];
                      for (std::size_t c = 0; c < dy.cols(); ++c) dt->at(t, c) += s * dy.at(r, c);
                    }
                  });
}

template <typename Real>
Var concat_rows(Graph<Real>& g, std::span<const Var> parts) {
  if (parts.empty()) throw ConfigError("concat_rows: nothing to concatenate");
  const std::size_t cols = g.value(parts[0]).cols();
  std::size_t rows = 0;
  for (Var p : parts) {
    if (g.value(p).cols() != cols) {
      throw ShapeError("concat_rows: width mismatch " + shape_string(g.value(parts[0]).shape()) + " vs " +
                       shape_string(g.value(p).shape()));
    }
    rows += g.value(p).rows();
  }
  Tensor<Real> out(Shape{rows, cols});
  std::size_t offset = 0;
  for (Var p : parts) {
    const auto src = g.value(p).data();
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += src.size();
  }
  return g.record(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                  [](Graph<Real>& gr, std::size_t self) {
                    const auto dy = gr.node_grad(self).data();
                    std::size_t off = 0;
                    for (Var p : gr.operands(self)) {
                      const std::size_t len = gr.value(p).size();
                      if (auto* d = gr.grad_target(p)) {
                        auto dst = d->data();
                        for (std::size_t i = 0; i < len; ++i) dst[i] += dy[off + i];
                      }
                      off += len;
                    }
                  });
}

template <typename Real>
Var mean_of(Graph<Real>& g, std::span<const Var> parts) {
  if (parts.empty()) throw ConfigError("mean_of: nothing to average");
  Tensor<Real> out = g.value(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    require_same_shape(out.shape(), g.value(parts[i]).shape(), "mean_of");
    axpy(out, g.value(parts[i]));
  }
  const Real n = static_cast<Real>(parts.size());
  for (Real& v : out.storage()) v /= n;
  return g.record(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                  [](Graph<Real>& gr, std::size_t self) {
                    const auto& ops = gr.operands(self);
                    const Real inv = Real(1) / static_cast<Real>(ops.size());
                    for (Var p : ops) {
                      if (auto* d = gr.grad_target(p)) axpy(*d, gr.node_grad(self), inv);
                    }
                  });
}

template <typename Real>
Var weighted_sum(Graph<Real>& g, Var weights, std::span<const Var> items) {
  const Tensor<Real>& w = g.value(weights);
  if (items.empty() || w.size() != items.size()) {
    throw ShapeError("weighted_sum: " + std::to_string(w.size()) + " weights for " + std::to_string(items.size()) +
                     " items");
  }
  Tensor<Real> out = g.value(items[0]).zeros_like();
  for (std::size_t i = 0; i < items.size(); ++i) {
    require_same_shape(out.shape(), g.value(items[i]).shape(), "weighted_sum");
    axpy(out, g.value(items[i]), w[i]);
  }
  std::vector<Var> operands{weights};
  operands.insert(operands.end(), items.begin(), items.end());
  return g.record(std::move(out), std::move(operands), [](Graph<Real>& gr, std::size_t self) {
    const auto& ops = gr.operands(self);
    const auto& dy = gr.node_grad(self);
    const auto& w = gr.value(ops[0]);
    auto* dw = gr.grad_target(ops[0]);
    for (std::size_t i = 1; i < ops.size(); ++i) {
      if (auto* d = gr.grad_target(ops[i])) axpy(*d, dy, w[i - 1]);
      if (dw) {
        const auto& item = gr.value(ops[i]);
        Real dot = 0;
        for (std::size_t k = 0; k < dy.size(); ++k) dot += dy[k] * item[k];
        (*dw)[i - 1] += dot;
      }
    }
  });
}

#define WENAS_INSTANTIATE_OPS(Real)                                                                  \
  template Var activation<Real>(Graph<Real>&, Activation, Var);                                      \
  template Var matmul<Real>(Graph<Real>&, Var, Var);                                                 \
  template Var add<Real>(Graph<Real>&, Var, Var);                                                    \
  template Var sub<Real>(Graph<Real>&, Var, Var);                                                    \
  template Var mul<Real>(Graph<Real>&, Var, Var);                                                    \
  template Var scale<Real>(Graph<Real>&, Var, Real);                                                 \
  template Var add_bias<Real>(Graph<Real>&, Var, Var);                                               \
  template Var apply_mask<Real>(Graph<Real>&, Var, const Tensor<Real>&);                             \
  template Var sum<Real>(Graph<Real>&, Var);                                                         \
  template Var softmax<Real>(Graph<Real>&, Var);                                                     \
  template Var cross_entropy<Real>(Graph<Real>&, Var, std::span<const std::int32_t>);                \
  template Var batch_norm<Real>(Graph<Real>&, Var, bool, double);                                    \
  template Var embedding<Real>(Graph<Real>&, Var, std::span<const std::int32_t>, const Tensor<Real>&); \
  template Var concat_rows<Real>(Graph<Real>&, std::span<const Var>);                                \
  template Var mean_of<Real>(Graph<Real>&, std::span<const Var>);                                    \
  template Var weighted_sum<Real>(Graph<Real>&, Var, std::span<const Var>);

WENAS_INSTANTIATE_OPS(float)
WENAS_INSTANTIATE_OPS(double)

#undef WENAS_INSTANTIATE_OPS

}  // namespace wenas::ad
