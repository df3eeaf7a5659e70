#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "wenas/autodiff/graph.hpp"

namespace wenas::ad {

enum class Activation : std::uint8_t { tanh, relu, sigmoid, identity };

inline constexpr double kBatchNormEpsilon = 1e-5;

// Elementwise nonlinearity; identity records nothing and returns `x`.
template <typename Real>
Var activation(Graph<Real>& g, Activation kind, Var x);

/// Row-batched product: a [m x k] (or [k]) times b [k x n].
template <typename Real>
Var matmul(Graph<Real>& g, Var a, Var b);

template <typename Real>
Var add(Graph<Real>& g, Var a, Var b);
template <typename Real>
Var sub(Graph<Real>& g, Var a, Var b);
/// Hadamard product.
template <typename Real>
Var mul(Graph<Real>& g, Var a, Var b);
template <typename Real>
Var scale(Graph<Real>& g, Var a, Real factor);
/// a [m x n] plus bias [n] broadcast over rows.
template <typename Real>
Var add_bias(Graph<Real>& g, Var a, Var bias);
/// Elementwise product with a constant mask of the same shape.
template <typename Real>
Var apply_mask(Graph<Real>& g, Var a, const Tensor<Real>& mask);
/// Sum of all entries, as a [1] tensor.
template <typename Real>
Var sum(Graph<Real>& g, Var a);

/// Row-wise softmax over the last axis, max-subtracted.
template <typename Real>
Var softmax(Graph<Real>& g, Var v);

/// Mean negative log-likelihood (nats) of `targets` under row-wise
/// softmax of logits [N x V].
template <typename Real>
Var cross_entropy(Graph<Real>& g, Var logits, std::span<const std::int32_t> targets);

/// Per-feature standardization over the batch (rows), no affine part.
/// Identity when `enabled` is false.
template <typename Real>
Var batch_norm(Graph<Real>& g, Var x, bool enabled, double epsilon = kBatchNormEpsilon);

/// Rows of `table` selected by `tokens`; row r is multiplied by
/// row_scale[tokens[r]] when row_scale is non-empty.
template <typename Real>
Var embedding(Graph<Real>& g, Var table, std::span<const std::int32_t> tokens,
              const Tensor<Real>& row_scale = {});

/// Stacks same-width tensors vertically.
template <typename Real>
Var concat_rows(Graph<Real>& g, std::span<const Var> parts);

/// Arithmetic mean of same-shape tensors.
template <typename Real>
Var mean_of(Graph<Real>& g, std::span<const Var> parts);

/// sum_i weights[i] * items[i], with `weights` a rank-1 node of length
/// items.size().
template <typename Real>
Var weighted_sum(Graph<Real>& g, Var weights, std::span<const Var> items);

}  // namespace wenas::ad
