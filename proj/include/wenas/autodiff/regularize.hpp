#pragma once

#include "wenas/autodiff/tensor.hpp"
#include "wenas/random.hpp"

namespace wenas::ad {

/// Bernoulli keep-mask scaled by 1/(1-rate). The caller draws one mask per
/// sequence and reuses it across every time step of a window. rate 0 yields
/// all ones without touching `rng`.
template <typename Real>
Tensor<Real> variational_dropout_mask(const Shape& shape, double rate, Rng& rng);

/// Uniform(-bound, bound) initialization.
template <typename Real>
Tensor<Real> uniform_tensor(const Shape& shape, double bound, Rng& rng);

}  // namespace wenas::ad
