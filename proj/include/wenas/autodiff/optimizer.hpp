#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "wenas/autodiff/graph.hpp"

namespace wenas::ad {

enum class OptimizerKind { sgd, adam, asgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view text);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;  // L2 coefficient added to the gradient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // ASGD: iterates from this 1-based step on enter the running average.
  std::size_t asgd_start = 1;
  // Global gradient-norm cap; 0 disables clipping.
  double clip_norm = 0.0;

  void validate() const;
};

/// A parameter under optimization. Mixture logits opt out of weight decay.
template <typename Real>
struct ParamSlot {
  Parameter<Real>* param = nullptr;
  bool decay = true;
};

template <typename Real>
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, std::vector<ParamSlot<Real>> slots);

  void zero_grad();
  /// Rescales all gradients so their joint L2 norm is at most `max_norm`.
  /// Returns the norm before clipping.
  double clip_grad_norm(double max_norm);
  /// One update of every parameter. Applies cfg.clip_norm first when set.
  void step();

  std::size_t steps() const noexcept { return step_; }
  const OptimizerConfig& config() const noexcept { return cfg_; }
  void set_learning_rate(double lr) { cfg_.learning_rate = lr; }

  /// ASGD running average of slot i (zeros before averaging starts).
  const Tensor<Real>& averaged(std::size_t i) const { return average_[i]; }
  std::size_t averaged_count() const noexcept { return averaged_count_; }
  /// Swaps averaged and live parameters; calling twice restores them.
  void swap_averaged();

 private:
  OptimizerConfig cfg_;
  std::vector<ParamSlot<Real>> slots_;
  std::vector<Tensor<Real>> m_;
  std::vector<Tensor<Real>> v_;
  std::vector<Tensor<Real>> average_;
  std::size_t step_ = 0;
  std::size_t averaged_count_ = 0;
};

extern template class Optimizer<float>;
extern template class Optimizer<double>;

}  // namespace wenas::ad
