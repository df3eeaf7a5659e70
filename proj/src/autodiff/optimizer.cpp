#include "wenas/autodiff/optimizer.hpp"

#include <cmath>
#include <utility>

#include "wenas/error.hpp"

namespace wenas::ad {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::asgd: return "asgd";
  }
  return "?";
}

OptimizerKind parse_optimizer_kind(std::string_view text) {
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "adam") return OptimizerKind::adam;
  if (text == "asgd") return OptimizerKind::asgd;
  throw ConfigError("unknown optimizer '" + std::string(text) + "' (expected sgd, adam or asgd)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be nonnegative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
  if (asgd_start < 1) throw ConfigError("asgd averaging start step is 1-based");
  if (!(clip_norm >= 0.0)) throw ConfigError("clip norm must be nonnegative");
}

template <typename Real>
Optimizer<Real>::Optimizer(OptimizerConfig cfg, std::vector<ParamSlot<Real>> slots)
    : cfg_(cfg), slots_(std::move(slots)) {
  // Learning rate 0 is legal here so frozen-training checks can run.
  if (cfg_.learning_rate == 0.0) {
    OptimizerConfig probe = cfg_;
    probe.learning_rate = 1.0;
    probe.validate();
  } else {
    cfg_.validate();
  }
  for (const auto& s : slots_) {
    if (cfg_.kind == OptimizerKind::adam) {
      m_.push_back(s.param->value.zeros_like());
      v_.push_back(s.param->value.zeros_like());
    }
    if (cfg_.kind == OptimizerKind::asgd) average_.push_back(s.param->value.zeros_like());
  }
}

template <typename Real>
void Optimizer<Real>::zero_grad() {
  for (auto& s : slots_) s.param->zero_grad();
}

template <typename Real>
double Optimizer<Real>::clip_grad_norm(double max_norm) {
  double sq = 0.0;
  for (const auto& s : slots_) {
    if (s.param->grad.shape() != s.param->value.shape()) continue;
    for (Real g : s.param->grad.data()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const Real factor = static_cast<Real>(max_norm / (norm + 1e-6));
    for (auto& s : slots_) {
      for (Real& g : s.param->grad.storage()) g *= factor;
    }
  }
  return norm;
}

template <typename Real>
void Optimizer<Real>::step() {
  if (cfg_.clip_norm > 0.0) clip_grad_norm(cfg_.clip_norm);
  ++step_;
  const Real lr = static_cast<Real>(cfg_.learning_rate);
  const Real wd = static_cast<Real>(cfg_.weight_decay);
  const bool averaging = cfg_.kind == OptimizerKind::asgd && step_ >= cfg_.asgd_start;
  if (averaging) ++averaged_count_;

  for (std::size_t i = 0; i < slots_.size(); ++i) {
    Parameter<Real>& p = *slots_[i].param;
    if (p.grad.shape() != p.value.shape()) p.grad = p.value.zeros_like();
    const Real decay = slots_[i].decay ? wd : Real(0);
    auto w = p.value.data();
    auto g = p.grad.data();

    if (cfg_.kind == OptimizerKind::adam) {
      const Real b1 = static_cast<Real>(cfg_.beta1);
      const Real b2 = static_cast<Real>(cfg_.beta2);
      const Real eps = static_cast<Real>(cfg_.epsilon);
      const Real c1 = Real(1) - static_cast<Real>(std::pow(cfg_.beta1, static_cast<double>(step_)));
      const Real c2 = Real(1) - static_cast<Real>(std::pow(cfg_.beta2, static_cast<double>(step_)));
      auto m = m_[i].data();
      auto v = v_[i].data();
      for (std::size_t k = 0; k < w.size(); ++k) {
        const Real gk = g[k] + decay * w[k];
        m[k] = b1 * m[k] + (Real(1) - b1) * gk;
        v[k] = b2 * v[k] + (Real(1) - b2) * gk * gk;
        w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
      }
    } else {
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * (g[k] + decay * w[k]);
      if (averaging) {
        // Incremental mean of the post-update iterates.
        auto avg = average_[i].data();
        const Real n = static_cast<Real>(averaged_count_);
        for (std::size_t k = 0; k < w.size(); ++k) avg[k] += (w[k] - avg[k]) / n;
      }
    }
  }
}

template <typename Real>
void Optimizer<Real>::swap_averaged() {
  if (cfg_.kind != OptimizerKind::asgd || averaged_count_ == 0) return;
  for (std::size_t i = 0; i < slots_.size(); ++i) std::swap(slots_[i].param->value, average_[i]);
}

template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace wenas::ad
