#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wenas/autodiff/tensor.hpp"

namespace wenas::ad {

/// A learnable tensor together with its gradient accumulator. Graphs refer
/// to parameters by pointer, so a Parameter must outlive every graph that
/// records it.
template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> value;
  Tensor<Real> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<Real> v)
      : name(std::move(n)), value(std::move(v)), grad(value.zeros_like()) {}

  void zero_grad() {
    if (grad.shape() != value.shape()) grad = value.zeros_like();
    else grad.fill(Real(0));
  }
};

/// Handle to a node of a Graph.
struct Var {
  std::uint32_t id = 0;
};

/// Append-only tape of primitive applications. Nodes are stored in
/// topological order by construction; backward() walks them in reverse.
template <typename Real>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) noexcept = default;
  Graph& operator=(Graph&&) noexcept = default;

  /// Leaf that never receives a gradient.
  Var constant(Tensor<Real> value);
  /// Leaf whose gradient is retained on the graph (read it with grad()).
  Var input(Tensor<Real> value);
  /// Leaf bound to an external parameter. Registering the same parameter
  /// twice returns the same node. After backward() the node gradient is
  /// added into `p.grad`.
  Var parameter(Parameter<Real>& p);

  /// Records a computed node. `backward` receives the graph and the node
  /// index and must push the node gradient into its operands through
  /// grad_target().
  Var record(Tensor<Real> value, std::vector<Var> operands, BackwardFn backward);

  const Tensor<Real>& value(Var v) const;
  /// Gradient of a node after backward(); zeros when unreached.
  Tensor<Real> grad(Var v) const;
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Gradient accumulator of an operand, allocated on first use; nullptr
  /// for operands that do not need a gradient.
  Tensor<Real>* grad_target(Var v);
  /// Gradient flowing into node `index` during backward.
  const Tensor<Real>& node_grad(std::size_t index) const { return nodes_[index].grad; }
  const std::vector<Var>& operands(std::size_t index) const { return nodes_[index].operands; }

  /// Reverse accumulation from a scalar loss (seed 1). Overwrites the
  /// gradients of every parameter registered on this graph.
  void backward(Var loss);
  /// Reverse accumulation from an arbitrary node with an explicit seed.
  void backward(Var output, const Tensor<Real>& seed);

 private:
  struct Node {
    Tensor<Real> value;
    Tensor<Real> grad;
    std::vector<Var> operands;
    BackwardFn backward;
    Parameter<Real>* param = nullptr;
    bool needs_grad = false;
  };

  Node& push(Node node);

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter<Real>*, std::uint32_t> param_index_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace wenas::ad
