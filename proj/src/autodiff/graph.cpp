#include "wenas/autodiff/graph.hpp"

#include "wenas/error.hpp"

namespace wenas::ad {

template <typename Real>
typename Graph<Real>::Node& Graph<Real>::push(Node node) {
  nodes_.push_back(std::move(node));
  return nodes_.back();
}

template <typename Real>
Var Graph<Real>::constant(Tensor<Real> value) {
  Node n;
  n.value = std::move(value);
  push(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
Var Graph<Real>::input(Tensor<Real> value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  push(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
Var Graph<Real>::parameter(Parameter<Real>& p) {
  if (auto it = param_index_.find(&p); it != param_index_.end()) return Var{it->second};
  Node n;
  n.param = &p;
  n.needs_grad = true;
  push(std::move(n));
  const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  param_index_.emplace(&p, id);
  return Var{id};
}

template <typename Real>
Var Graph<Real>::record(Tensor<Real> value, std::vector<Var> operands, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (Var v : operands) n.needs_grad = n.needs_grad || nodes_[v.id].needs_grad;
  n.operands = std::move(operands);
  if (n.needs_grad) n.backward = std::move(backward);
  push(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename Real>
const Tensor<Real>& Graph<Real>::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.param ? n.param->value : n.value;
}

template <typename Real>
Tensor<Real> Graph<Real>::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.empty()) return value(v).zeros_like();
  return n.grad;
}

template <typename Real>
Tensor<Real>* Graph<Real>::grad_target(Var v) {
  Node& n = nodes_[v.id];
  if (!n.needs_grad) return nullptr;
  if (n.grad.empty()) n.grad = value(v).zeros_like();
  return &n.grad;
}

template <typename Real>
void Graph<Real>::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_string(value(loss).shape()));
  }
  backward(loss, Tensor<Real>(value(loss).shape(), Real(1)));
}

template <typename Real>
void Graph<Real>::backward(Var output, const Tensor<Real>& seed) {
  if (seed.shape() != value(output).shape()) {
    throw ShapeError("backward seed shape " + shape_string(seed.shape()) + " does not match node shape " +
                     shape_string(value(output).shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor<Real>{};
  // Parameters on the graph but off every path to the output end up zero.
  for (auto& [param, id] : param_index_) {
    auto* p = const_cast<Parameter<Real>*>(param);
    p->grad = p->value.zeros_like();
  }
  if (Tensor<Real>* g = grad_target(output)) *g = seed;

  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty()) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param) {
      Parameter<Real>& p = *n.param;
      auto dst = p.grad.data();
      auto src = n.grad.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace wenas::ad
