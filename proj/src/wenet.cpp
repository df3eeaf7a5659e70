#include "wenas/wenet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wenas/autodiff/regularize.hpp"
#include "wenas/error.hpp"
#include "wenas/parallel.hpp"

namespace wenas {

using ad::Shape;

std::string_view to_string(MixPoint mix) { return mix == MixPoint::logits ? "logits" : "hidden"; }

MixPoint parse_mix_point(std::string_view text) {
  if (text == "logits") return MixPoint::logits;
  if (text == "hidden") return MixPoint::hidden;
  throw ConfigError("unknown mix point '" + std::string(text) + "' (expected logits or hidden)");
}

template <typename Real>
WeNetState<Real> make_wenet(std::span<const Genome> genomes, const ModelConfig& cfg, std::size_t vocab,
                            std::uint64_t seed, MixPoint mix) {
  if (genomes.empty()) throw ConfigError("a weighted network needs at least one candidate");
  cfg.validate();
  WeNetState<Real> s;
  s.model = cfg;
  s.mix = mix;
  s.vocab = vocab;
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    if (genomes[i].levels != cfg.levels) {
      throw ConfigError("candidate " + std::to_string(i) + " has " + std::to_string(genomes[i].levels) +
                        " levels; all candidates must share " + std::to_string(cfg.levels));
    }
    Candidate<Real> c;
    c.genome = genomes[i];
    Rng init(child_seed(seed, 2 * i));
    c.params = init_params<Real>(genomes[i], cfg, vocab, init);
    c.rng = Rng(child_seed(seed, 2 * i + 1));
    s.candidates.push_back(std::move(c));
  }
  s.logits = Parameter<Real>("mixture_logits", Tensor<Real>(Shape{genomes.size()}));
  if (mix == MixPoint::hidden) {
    Rng init(child_seed(seed, 2 * genomes.size()));
    s.shared_decoder_w =
        Parameter<Real>("decoder_w", ad::uniform_tensor<Real>(Shape{cfg.hidden_dim, vocab}, cfg.init_range, init));
    s.shared_decoder_b = Parameter<Real>("decoder_b", Tensor<Real>(Shape{vocab}));
  }
  s.mixture_rng = Rng(child_seed(seed, 2 * genomes.size() + 1));
  return s;
}

template <typename Real>
std::vector<double> weights(const WeNetState<Real>& s) {
  const auto& z = s.logits.value;
  std::vector<double> w(z.size());
  double mx = -INFINITY;
  for (Real v : z.data()) mx = std::max(mx, static_cast<double>(v));
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(static_cast<double>(z[i]) - mx);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

template <typename Real>
MixtureResult<Real> wenet_forward(WeNetState<Real>& s, const BPTTWindow& window, bool train, bool accumulate,
                                  std::size_t threads) {
  const std::size_t n = s.size();
  const std::size_t rows = window.length * window.batch;
  const bool logit_mix = s.mix == MixPoint::logits;
  const std::size_t width = logit_mix ? s.vocab : s.model.hidden_dim;

  std::vector<Graph<Real>> graphs(n);
  std::vector<Var> outs(n);
  std::vector<Tensor<Real>> finals(n);
  parallel_for(n, threads, [&](std::size_t i) {
    Candidate<Real>& c = s.candidates[i];
    if (c.clamp_uniform) return;
    const auto masks = draw_masks<Real>(s.model, s.vocab, window.batch, c.rng, train);
    auto un = unroll(graphs[i], c.genome, c.params, window, c.hidden, s.model, masks, logit_mix);
    outs[i] = logit_mix ? un.logits : un.features;
    finals[i] = std::move(un.final_hidden);
  });

  Graph<Real> mix;
  const Var w = ad::softmax(mix, mix.parameter(s.logits));
  std::vector<Var> items(n);
  MixtureResult<Real> result;
  result.candidate_outputs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Tensor<Real> out = s.candidates[i].clamp_uniform ? Tensor<Real>(Shape{rows, width}) : graphs[i].value(outs[i]);
    result.candidate_outputs.push_back(out);
    items[i] = s.candidates[i].clamp_uniform ? mix.constant(std::move(out)) : mix.input(std::move(out));
  }
  Var y = ad::weighted_sum<Real>(mix, w, items);
  result.mixture = mix.value(y);
  if (!logit_mix) {
    if (train && s.model.dropout.output > 0.0) {
      const auto mask =
          ad::variational_dropout_mask<Real>(Shape{window.batch, s.model.hidden_dim}, s.model.dropout.output,
                                             s.mixture_rng);
      Tensor<Real> tiled(Shape{rows, s.model.hidden_dim});
      for (std::size_t t = 0; t < window.length; ++t) {
        std::copy(mask.data().begin(), mask.data().end(),
                  tiled.data().begin() + static_cast<std::ptrdiff_t>(t * mask.size()));
      }
      y = ad::apply_mask(mix, y, tiled);
    }
    y = ad::add_bias(mix, ad::matmul(mix, y, mix.parameter(s.shared_decoder_w)), mix.parameter(s.shared_decoder_b));
  }
  const auto targets = window.targets_step_major();
  const Var loss = ad::cross_entropy(mix, y, std::span<const std::int32_t>(targets));
  result.loss = static_cast<double>(mix.value(loss)[0]);

  if (accumulate) {
    mix.backward(loss);
    parallel_for(n, threads, [&](std::size_t i) {
      if (s.candidates[i].clamp_uniform) return;
      graphs[i].backward(outs[i], mix.grad(items[i]));
    });
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.candidates[i].clamp_uniform) s.candidates[i].hidden = std::move(finals[i]);
  }
  return result;
}

template <typename Real>
TrainLog wenet_train(WeNetState<Real>& s, std::span<const BPTTWindow> windows, std::size_t epochs,
                     const ad::OptimizerConfig& opt_cfg, std::size_t threads) {
  if (epochs < 1) throw ConfigError("training needs at least one epoch");
  std::vector<ad::ParamSlot<Real>> slots;
  for (auto& c : s.candidates) {
    if (c.clamp_uniform) continue;
    for (auto& slot : param_slots(c.params)) slots.push_back(slot);
  }
  if (s.mix == MixPoint::hidden) {
    slots.push_back({&s.shared_decoder_w, true});
    slots.push_back({&s.shared_decoder_b, true});
  }
  slots.push_back({&s.logits, false});
  ad::Optimizer<Real> opt(opt_cfg, std::move(slots));

  TrainLog log;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    for (auto& c : s.candidates) c.hidden = Tensor<Real>{};
    double total = 0.0;
    for (std::size_t b = 0; b < windows.size(); ++b) {
      opt.zero_grad();
      const auto r = wenet_forward(s, windows[b], true, true, threads);
      if (!std::isfinite(r.loss)) {
        throw NumericError("non-finite mixture loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b));
      }
      if (opt_cfg.learning_rate > 0.0) opt.step();
      total += r.loss;
    }
    log.mean_loss.push_back(windows.empty() ? 0.0 : total / static_cast<double>(windows.size()));
    log.weights.push_back(weights(s));
  }
  return log;
}

std::vector<std::size_t> rank_by_weight(std::span<const double> w) {
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  return order;
}

template <typename Real>
std::vector<RankedCandidate> top_k(const WeNetState<Real>& s, std::size_t k) {
  if (k < 1 || k > s.size()) {
    throw ConfigError("top_k: K=" + std::to_string(k) + " must lie in [1, " + std::to_string(s.size()) + "]");
  }
  const auto w = weights(s);
  const auto order = rank_by_weight(w);
  std::vector<RankedCandidate> out;
  for (std::size_t r = 0; r < k; ++r) out.push_back({order[r], s.candidates[order[r]].genome, w[order[r]]});
  return out;
}

#define WENAS_INSTANTIATE_WENET(Real)                                                                          \
  template WeNetState<Real> make_wenet<Real>(std::span<const Genome>, const ModelConfig&, std::size_t,         \
                                             std::uint64_t, MixPoint);                                         \
  template std::vector<double> weights<Real>(const WeNetState<Real>&);                                         \
  template MixtureResult<Real> wenet_forward<Real>(WeNetState<Real>&, const BPTTWindow&, bool, bool,           \
                                                   std::size_t);                                               \
  template TrainLog wenet_train<Real>(WeNetState<Real>&, std::span<const BPTTWindow>, std::size_t,             \
                                      const ad::OptimizerConfig&, std::size_t);                                \
  template std::vector<RankedCandidate> top_k<Real>(const WeNetState<Real>&, std::size_t);

WENAS_INSTANTIATE_WENET(float)
WENAS_INSTANTIATE_WENET(double)

#undef WENAS_INSTANTIATE_WENET

}  // namespace wenas
