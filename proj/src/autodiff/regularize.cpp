#include "wenas/autodiff/regularize.hpp"

#include <string>

#include "wenas/error.hpp"

namespace wenas::ad {

template <typename Real>
Tensor<Real> variational_dropout_mask(const Shape& shape, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  Tensor<Real> mask(shape, Real(1));
  if (rate == 0.0) return mask;
  std::bernoulli_distribution keep(1.0 - rate);
  const Real kept = static_cast<Real>(1.0 / (1.0 - rate));
  for (Real& v : mask.storage()) v = keep(rng) ? kept : Real(0);
  return mask;
}

template <typename Real>
Tensor<Real> uniform_tensor(const Shape& shape, double bound, Rng& rng) {
  Tensor<Real> out(shape);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Real& v : out.storage()) v = static_cast<Real>(dist(rng));
  return out;
}

template Tensor<float> variational_dropout_mask<float>(const Shape&, double, Rng&);
template Tensor<double> variational_dropout_mask<double>(const Shape&, double, Rng&);
template Tensor<float> uniform_tensor<float>(const Shape&, double, Rng&);
template Tensor<double> uniform_tensor<double>(const Shape&, double, Rng&);

}  // namespace wenas::ad
