#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wenas/model.hpp"

namespace wenas {

/// Where candidate outputs are combined. `logits` keeps every candidate a
/// complete network with its own decoder; `hidden` mixes h_t and decodes
/// with one shared decoder.
enum class MixPoint { logits, hidden };

std::string_view to_string(MixPoint mix);
MixPoint parse_mix_point(std::string_view text);

template <typename Real>
struct Candidate {
  Genome genome;
  LMParams<Real> params;
  Tensor<Real> hidden;  // carried state, empty at the start of an epoch
  Rng rng{0};           // dropout stream
  /// Contributes all-zero (uniform) logits and learns nothing.
  bool clamp_uniform = false;
};

/// n candidate networks plus n importance logits; softmax(logits) are the
/// network weights.
template <typename Real>
struct WeNetState {
  ModelConfig model;
  MixPoint mix = MixPoint::logits;
  std::size_t vocab = 0;
  std::vector<Candidate<Real>> candidates;
  Parameter<Real> logits;
  Parameter<Real> shared_decoder_w;  // hidden mixing only
  Parameter<Real> shared_decoder_b;
  Rng mixture_rng{0};

  std::size_t size() const noexcept { return candidates.size(); }
};

/// Fresh parameters for every genome and all-zero logits. Candidate i
/// initializes from child_seed(seed, 2i) and draws dropout masks from
/// child_seed(seed, 2i + 1).
template <typename Real>
WeNetState<Real> make_wenet(std::span<const Genome> genomes, const ModelConfig& cfg, std::size_t vocab,
                            std::uint64_t seed, MixPoint mix = MixPoint::logits);

template <typename Real>
std::vector<double> weights(const WeNetState<Real>& s);

template <typename Real>
struct MixtureResult {
  double loss = 0.0;
  Tensor<Real> mixture;                  // mixed logits (or mixed features in hidden mode)
  std::vector<Tensor<Real>> candidate_outputs;
};

/// One window through every candidate and the mixture. With `accumulate`
/// the gradients of the mixture loss are added into all candidate
/// parameters and the logits (callers zero them first). Candidate hidden
/// states and dropout streams advance.
template <typename Real>
MixtureResult<Real> wenet_forward(WeNetState<Real>& s, const BPTTWindow& window, bool train, bool accumulate,
                                  std::size_t threads = 1);

struct TrainLog {
  std::vector<std::vector<double>> weights;  // one row per finished epoch
  std::vector<double> mean_loss;
};

/// Joint training: each window is one forward, one backward and one
/// simultaneous optimizer step over every candidate parameter and the
/// logits. Throws NumericError naming the batch on a non-finite loss.
template <typename Real>
TrainLog wenet_train(WeNetState<Real>& s, std::span<const BPTTWindow> windows, std::size_t epochs,
                     const ad::OptimizerConfig& opt, std::size_t threads = 1);

struct RankedCandidate {
  std::size_t index = 0;
  Genome genome;
  double weight = 0.0;
};

/// The K largest weights, descending; ties go to the lower index.
template <typename Real>
std::vector<RankedCandidate> top_k(const WeNetState<Real>& s, std::size_t k);

/// Same ranking from a plain weight vector.
std::vector<std::size_t> rank_by_weight(std::span<const double> weights);

}  // namespace wenas
