#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wenas/autodiff/graph.hpp"
#include "wenas/autodiff/ops.hpp"
#include "wenas/autodiff/optimizer.hpp"
#include "wenas/cellspace.hpp"
#include "wenas/lmdata.hpp"
#include "wenas/random.hpp"

namespace wenas {

using ad::Graph;
using ad::Parameter;
using ad::Tensor;
using ad::Var;

/// Variational dropout rates. Defaults are the search-time rates.
struct DropoutRates {
  double embedding = 0.2;   // whole embedding rows (word types), per window
  double cell_input = 0.75; // x_t before node 0
  double hidden = 0.25;     // h_t after node averaging
  double output = 0.75;     // decoder input

  static DropoutRates none() { return {0.0, 0.0, 0.0, 0.0}; }
};

/// Search mode keeps per-node batch normalization; eval mode removes it.
enum class CellMode { search, eval };

struct ModelConfig {
  std::size_t embedding_dim = 64;
  std::size_t hidden_dim = 64;
  std::uint32_t levels = 8;
  DropoutRates dropout;
  bool batch_norm = true;
  CellMode mode = CellMode::search;
  double init_range = 0.1;

  bool batch_norm_active() const noexcept { return batch_norm && mode == CellMode::search; }
  void validate() const;
};

template <typename Real>
struct CellParams {
  Parameter<Real> w_x;             // [embedding x hidden]
  Parameter<Real> w_h;             // [hidden x hidden]
  std::vector<Parameter<Real>> edges;  // edges[i-1] feeds node i, [hidden x hidden]
};

template <typename Real>
struct LMParams {
  std::size_t vocab = 0;
  Parameter<Real> embedding;  // [vocab x embedding]
  Parameter<Real> decoder_w;  // [hidden x vocab]
  Parameter<Real> decoder_b;  // [vocab]
  CellParams<Real> cell;

  /// All parameters in a fixed order: embedding, w_x, w_h, edges, decoder.
  std::vector<Parameter<Real>*> all();
  std::size_t parameter_count() const;
};

/// Uniform(-init_range, init_range) matrices, zero decoder bias.
template <typename Real>
LMParams<Real> init_params(const Genome& genome, const ModelConfig& cfg, std::size_t vocab, Rng& rng);

/// Node 0: c = sigmoid(x W_x), h = tanh(h_prev W_h), s0 = h_prev + c*(h - h_prev).
template <typename Real>
Var node0(Graph<Real>& g, Var x, Var h_prev, CellParams<Real>& p);

template <typename Real>
struct CellTrace {
  std::vector<Var> states;  // s_0 .. s_{L-1}
  Var h;                    // mean of s_1 .. s_{L-1}
};

/// One recurrent step of the cell described by `genome`.
template <typename Real>
CellTrace<Real> cell_step(Graph<Real>& g, const Genome& genome, CellParams<Real>& p, Var x, Var h_prev,
                          const ModelConfig& cfg);

/// Dropout masks for one window; all-ones tensors when not training.
template <typename Real>
struct WindowMasks {
  Tensor<Real> embedding_rows;  // [vocab], empty when inactive
  Tensor<Real> cell_input;      // [batch x embedding]
  Tensor<Real> hidden;          // [batch x hidden]
  Tensor<Real> output;          // [batch x hidden]
};

template <typename Real>
WindowMasks<Real> draw_masks(const ModelConfig& cfg, std::size_t vocab, std::size_t batch, Rng& rng, bool train);

template <typename Real>
struct Unrolled {
  Var features;  // dropped h_t stacked step-major, [length*batch x hidden]
  Var logits;    // decoder output on output-dropped features, [length*batch x vocab]
  Tensor<Real> final_hidden;  // carry-over state (values only)
};

/// Runs the cell over a window, threading the hidden state from `h_init`.
/// When `decode` is false the decoder is skipped and `logits` is unset.
template <typename Real>
Unrolled<Real> unroll(Graph<Real>& g, const Genome& genome, LMParams<Real>& params, const BPTTWindow& window,
                      const Tensor<Real>& h_init, const ModelConfig& cfg, const WindowMasks<Real>& masks,
                      bool decode = true);

template <typename Real>
struct LmForward {
  Var loss;
  Var logits;
  Tensor<Real> final_hidden;
};

/// Embedding, cell over the window, decoder, mean cross-entropy.
template <typename Real>
LmForward<Real> lm_forward(Graph<Real>& g, const Genome& genome, LMParams<Real>& params, const BPTTWindow& window,
                           const Tensor<Real>& h_init, const ModelConfig& cfg, Rng& rng, bool train);

struct EvalResult {
  double total_nll = 0.0;
  std::size_t tokens = 0;

  double perplexity() const;
};

template <typename Real>
EvalResult evaluate_lm(const Genome& genome, LMParams<Real>& params, const BatchedCorpus& data, std::size_t bptt,
                       const ModelConfig& cfg);

/// One pass over `windows` with carried, detached hidden state. Returns the
/// mean training loss. Throws NumericError naming the window on NaN.
template <typename Real>
double train_lm_epoch(const Genome& genome, LMParams<Real>& params, std::span<const BPTTWindow> windows,
                      const ModelConfig& cfg, ad::Optimizer<Real>& opt, Rng& rng);

template <typename Real>
std::vector<ad::ParamSlot<Real>> param_slots(LMParams<Real>& params);

/// Free-running hidden-state monitor for relu/identity cells.
struct HiddenTrace {
  std::size_t steps = 0;
  double max_norm = 0.0;
  bool finite = true;
  std::optional<std::size_t> first_nonfinite_step;
  double divergence_threshold = 1e6;
  bool diverged = false;
};

template <typename Real>
HiddenTrace trace_hidden(const Genome& genome, LMParams<Real>& params, const ModelConfig& cfg, std::size_t steps,
                         std::size_t batch, Rng& rng);

std::string_view to_string(CellMode mode);

/// JSON checkpoint with keys embedding, w_x, w_h, edge_1..edge_{L-1},
/// decoder_w, decoder_b under "tensors".
template <typename Real>
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg, const Genome& genome,
                     const LMParams<Real>& params, const Vocab& vocab, const std::string& run_config = {});

template <typename Real>
struct Checkpoint {
  ModelConfig config;
  Genome genome;
  LMParams<Real> params;
  std::vector<std::string> vocab;
};

template <typename Real>
Checkpoint<Real> load_checkpoint(const std::filesystem::path& path);

}  // namespace wenas
