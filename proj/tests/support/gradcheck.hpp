#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wenas/autodiff/ops.hpp"
#include "wenas/autodiff/regularize.hpp"
#include "wenas/model.hpp"
#include "wenas/random.hpp"

namespace wenas::testing {

using ad::Graph;
using ad::Parameter;
using ad::Shape;
using ad::Tensor;
using ad::Var;

/// Builds a scalar loss from a fresh graph; parameters are bound inside.
using LossFn = std::function<Var(Graph<double>&)>;

/// ||analytic - numeric|| / max(||analytic||, ||numeric||) over every entry
/// of every parameter, with central differences of step h.
inline double gradient_relative_error(const std::vector<Parameter<double>*>& params, const LossFn& loss_fn,
                                      double h = 1e-5) {
  for (auto* p : params) p->zero_grad();
  {
    Graph<double> g;
    g.backward(loss_fn(g));
  }
  auto eval = [&] {
    Graph<double> g;
    return g.value(loss_fn(g))[0];
  };
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = eval();
      p->value[i] = saved - h;
      const double down = eval();
      p->value[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p->grad.empty() ? 0.0 : p->grad[i];
      diff2 += (analytic - numeric) * (analytic - numeric);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
    }
  }
  const double scale = std::max({std::sqrt(a2), std::sqrt(n2), 1e-10});
  return std::sqrt(diff2) / scale;
}

/// One autodiff primitive under test: parameter shapes, a sampler for a
/// random point and the op applied to the bound parameters.
struct PrimitiveCase {
  std::string name;
  std::vector<Shape> shapes;
  std::function<Var(Graph<double>&, const std::vector<Var>&)> apply;
  /// Entries drawn with magnitude in [min_abs, 1] and random sign.
  double min_abs = 0.0;
};

inline std::vector<PrimitiveCase> primitive_cases() {
  using namespace ad;
  std::vector<PrimitiveCase> cases;
  const Shape m34{3, 4};
  auto unary = [&](std::string name, Activation a, double min_abs = 0.0) {
    cases.push_back({std::move(name), {m34},
                     [a](Graph<double>& g, const std::vector<Var>& v) { return activation(g, a, v[0]); }, min_abs});
  };
  unary("tanh", Activation::tanh);
  unary("relu", Activation::relu, 0.05);
  unary("sigmoid", Activation::sigmoid);
  unary("identity", Activation::identity);
  cases.push_back({"matmul", {m34, Shape{4, 2}},
                   [](Graph<double>& g, const std::vector<Var>& v) { return matmul(g, v[0], v[1]); }});
  cases.push_back({"matmul_vector", {Shape{4}, Shape{4, 3}},
                   [](Graph<double>& g, const std::vector<Var>& v) { return matmul(g, v[0], v[1]); }});
  cases.push_back({"add", {m34, m34}, [](Graph<double>& g, const std::vector<Var>& v) { return add(g, v[0], v[1]); }});
  cases.push_back({"sub", {m34, m34}, [](Graph<double>& g, const std::vector<Var>& v) { return sub(g, v[0], v[1]); }});
  cases.push_back({"mul", {m34, m34}, [](Graph<double>& g, const std::vector<Var>& v) { return mul(g, v[0], v[1]); }});
  cases.push_back({"scale", {m34}, [](Graph<double>& g, const std::vector<Var>& v) { return scale(g, v[0], 0.7); }});
  cases.push_back({"add_bias", {m34, Shape{4}},
                   [](Graph<double>& g, const std::vector<Var>& v) { return add_bias(g, v[0], v[1]); }});
  cases.push_back({"apply_mask", {m34}, [](Graph<double>& g, const std::vector<Var>& v) {
                     Tensor<double> mask(Shape{3, 4}, {2, 0, 2, 0, 0, 2, 2, 0, 2, 2, 0, 0});
                     return apply_mask(g, v[0], mask);
                   }});
  cases.push_back({"sum", {m34}, [](Graph<double>& g, const std::vector<Var>& v) { return sum(g, v[0]); }});
  cases.push_back({"softmax", {m34}, [](Graph<double>& g, const std::vector<Var>& v) { return softmax(g, v[0]); }});
  cases.push_back({"softmax_vector", {Shape{5}},
                   [](Graph<double>& g, const std::vector<Var>& v) { return softmax(g, v[0]); }});
  cases.push_back({"cross_entropy", {Shape{4, 5}}, [](Graph<double>& g, const std::vector<Var>& v) {
                     const std::int32_t targets[] = {0, 3, 4, 3};
                     return cross_entropy(g, v[0], std::span<const std::int32_t>(targets));
                   }});
  cases.push_back({"batch_norm", {Shape{5, 3}},
                   [](Graph<double>& g, const std::vector<Var>& v) { return batch_norm(g, v[0], true); }});
  cases.push_back({"embedding", {Shape{6, 3}}, [](Graph<double>& g, const std::vector<Var>& v) {
                     const std::int32_t tokens[] = {1, 4, 1, 0, 5};
                     Tensor<double> rows(Shape{6}, {1.25, 0, 1.25, 1.25, 1.25, 0});
                     return embedding(g, v[0], std::span<const std::int32_t>(tokens), rows);
                   }});
  cases.push_back({"concat_rows", {Shape{2, 3}, Shape{1, 3}, Shape{3, 3}}, [](Graph<double>& g, const std::vector<Var>& v) {
                     return concat_rows<double>(g, std::span<const Var>(v));
                   }});
  cases.push_back({"mean_of", {m34, m34, m34}, [](Graph<double>& g, const std::vector<Var>& v) {
                     return mean_of<double>(g, std::span<const Var>(v));
                   }});
  cases.push_back({"weighted_sum", {Shape{3}, m34, m34, m34}, [](Graph<double>& g, const std::vector<Var>& v) {
                     return weighted_sum<double>(g, v[0], std::span<const Var>(v).subspan(1));
                   }});
  return cases;
}

struct CaseResult {
  std::string name;
  double max_error = 0.0;
  std::size_t points = 0;
};

/// Relative gradient error of one primitive at `points` random points. The
/// primitive output is reduced to a scalar through a random projection.
inline CaseResult check_primitive(const PrimitiveCase& c, std::size_t points, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> mag(c.min_abs, 1.0);
  std::bernoulli_distribution sign(0.5);
  CaseResult result{c.name, 0.0, points};
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<Parameter<double>> params;
    for (std::size_t i = 0; i < c.shapes.size(); ++i) {
      Tensor<double> t(c.shapes[i]);
      for (double& x : t.data()) x = (sign(rng) ? 1.0 : -1.0) * mag(rng);
      params.emplace_back("p" + std::to_string(i), std::move(t));
    }
    Tensor<double> projection;
    LossFn loss = [&](Graph<double>& g) {
      std::vector<Var> vars;
      for (auto& prm : params) vars.push_back(g.parameter(prm));
      const Var out = c.apply(g, vars);
      if (projection.empty()) projection = ad::uniform_tensor<double>(g.value(out).shape(), 1.0, rng);
      return ad::sum(g, ad::mul(g, out, g.constant(projection)));
    };
    std::vector<Parameter<double>*> ptrs;
    for (auto& prm : params) ptrs.push_back(&prm);
    result.max_error = std::max(result.max_error, gradient_relative_error(ptrs, loss));
  }
  return result;
}

/// Relative gradient error of the full language-model loss (dropout off)
/// for `genome`, with a random non-zero incoming hidden state.
inline double check_lm_forward(const Genome& genome, const ModelConfig& cfg, std::size_t vocab, std::size_t batch,
                               std::size_t bptt, std::uint64_t seed) {
  Rng rng(seed);
  auto params = init_params<double>(genome, cfg, vocab, rng);
  params.decoder_b.value = ad::uniform_tensor<double>(params.decoder_b.value.shape(), 0.1, rng);
  const Tensor<double> h_init = ad::uniform_tensor<double>(Shape{batch, cfg.hidden_dim}, 0.5, rng);
  BPTTWindow window;
  window.batch = batch;
  window.length = bptt;
  std::uniform_int_distribution<std::int32_t> tok(0, static_cast<std::int32_t>(vocab) - 1);
  for (std::size_t i = 0; i < batch * bptt; ++i) {
    window.inputs.push_back(tok(rng));
    window.targets.push_back(tok(rng));
  }
  LossFn loss = [&](Graph<double>& g) {
    Rng unused(0);
    return lm_forward(g, genome, params, window, h_init, cfg, unused, true).loss;
  };
  return gradient_relative_error(params.all(), loss);
}

}  // namespace wenas::testing
