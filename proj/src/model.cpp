#include "wenas/model.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "wenas/autodiff/regularize.hpp"
#include "wenas/error.hpp"

namespace wenas {

using ad::Shape;

void ModelConfig::validate() const {
  if (embedding_dim == 0 || hidden_dim == 0) throw ConfigError("embedding and hidden dims must be positive");
  if (levels < 2) throw ConfigError("cell needs at least 2 levels, got " + std::to_string(levels));
  for (double r : {dropout.embedding, dropout.cell_input, dropout.hidden, dropout.output}) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("dropout rates must lie in [0, 1), got " + std::to_string(r));
  }
  if (!(init_range > 0.0)) throw ConfigError("init range must be positive");
}

std::string_view to_string(CellMode mode) { return mode == CellMode::search ? "search" : "eval"; }

template <typename Real>
std::vector<Parameter<Real>*> LMParams<Real>::all() {
  std::vector<Parameter<Real>*> out{&embedding, &cell.w_x, &cell.w_h};
  for (auto& e : cell.edges) out.push_back(&e);
  out.push_back(&decoder_w);
  out.push_back(&decoder_b);
  return out;
}

template <typename Real>
std::size_t LMParams<Real>::parameter_count() const {
  std::size_t n = embedding.value.size() + decoder_w.value.size() + decoder_b.value.size() +
                  cell.w_x.value.size() + cell.w_h.value.size();
  for (const auto& e : cell.edges) n += e.value.size();
  return n;
}

template <typename Real>
LMParams<Real> init_params(const Genome& genome, const ModelConfig& cfg, std::size_t vocab, Rng& rng) {
  cfg.validate();
  require_valid(genome);
  if (genome.levels != cfg.levels) {
    throw ConfigError("genome has " + std::to_string(genome.levels) + " levels but the model expects " +
                      std::to_string(cfg.levels));
  }
  if (vocab == 0) throw ConfigError("vocabulary must be non-empty");
  const double r = cfg.init_range;
  const std::size_t e = cfg.embedding_dim;
  const std::size_t h = cfg.hidden_dim;
  LMParams<Real> p;
  p.vocab = vocab;
  p.embedding = Parameter<Real>("embedding", ad::uniform_tensor<Real>(Shape{vocab, e}, r, rng));
  p.cell.w_x = Parameter<Real>("w_x", ad::uniform_tensor<Real>(Shape{e, h}, r, rng));
  p.cell.w_h = Parameter<Real>("w_h", ad::uniform_tensor<Real>(Shape{h, h}, r, rng));
  for (std::uint32_t i = 1; i < genome.levels; ++i) {
    p.cell.edges.emplace_back("edge_" + std::to_string(i), ad::uniform_tensor<Real>(Shape{h, h}, r, rng));
  }
  p.decoder_w = Parameter<Real>("decoder_w", ad::uniform_tensor<Real>(Shape{h, vocab}, r, rng));
  p.decoder_b = Parameter<Real>("decoder_b", Tensor<Real>(Shape{vocab}));
  return p;
}

template <typename Real>
Var node0(Graph<Real>& g, Var x, Var h_prev, CellParams<Real>& p) {
  const Var gate = ad::activation(g, OpKind::sigmoid, ad::matmul(g, x, g.parameter(p.w_x)));
  const Var cand = ad::activation(g, OpKind::tanh, ad::matmul(g, h_prev, g.parameter(p.w_h)));
  return ad::add(g, h_prev, ad::mul(g, gate, ad::sub(g, cand, h_prev)));
}

template <typename Real>
CellTrace<Real> cell_step(Graph<Real>& g, const Genome& genome, CellParams<Real>& p, Var x, Var h_prev,
                          const ModelConfig& cfg) {
  require_valid(genome);
  if (p.edges.size() + 1 != genome.levels) {
    throw ConfigError("cell has " + std::to_string(p.edges.size()) + " edge matrices for a genome of " +
                      std::to_string(genome.levels) + " levels");
  }
  const bool bn = cfg.batch_norm_active();
  CellTrace<Real> trace;
  trace.states.reserve(genome.levels);
  trace.states.push_back(node0(g, x, h_prev, p));
  for (std::size_t i = 0; i < genome.genes.size(); ++i) {
    const NodeGene& gene = genome.genes[i];
    Var pre = ad::matmul(g, trace.states[gene.ancestor], g.parameter(p.edges[i]));
    pre = ad::batch_norm(g, pre, bn);
    trace.states.push_back(ad::activation(g, gene.op, pre));
  }
  trace.h = ad::mean_of<Real>(g, std::span<const Var>(trace.states).subspan(1));
  return trace;
}

template <typename Real>
WindowMasks<Real> draw_masks(const ModelConfig& cfg, std::size_t vocab, std::size_t batch, Rng& rng, bool train) {
  WindowMasks<Real> m;
  if (!train) return m;
  const auto& d = cfg.dropout;
  if (d.embedding > 0.0) m.embedding_rows = ad::variational_dropout_mask<Real>(Shape{vocab}, d.embedding, rng);
  if (d.cell_input > 0.0) {
    m.cell_input = ad::variational_dropout_mask<Real>(Shape{batch, cfg.embedding_dim}, d.cell_input, rng);
  }
  if (d.hidden > 0.0) m.hidden = ad::variational_dropout_mask<Real>(Shape{batch, cfg.hidden_dim}, d.hidden, rng);
  if (d.output > 0.0) m.output = ad::variational_dropout_mask<Real>(Shape{batch, cfg.hidden_dim}, d.output, rng);
  return m;
}

template <typename Real>
Unrolled<Real> unroll(Graph<Real>& g, const Genome& genome, LMParams<Real>& params, const BPTTWindow& window,
                      const Tensor<Real>& h_init, const ModelConfig& cfg, const WindowMasks<Real>& masks,
                      bool decode) {
  if (window.length == 0) throw ConfigError("bptt window must contain at least one step");
  const std::size_t batch = window.batch;
  const Shape hidden_shape{batch, cfg.hidden_dim};
  Var h_prev = g.constant(h_init.empty() ? Tensor<Real>(hidden_shape) : h_init);
  if (g.value(h_prev).shape() != hidden_shape) {
    throw ShapeError("initial hidden state " + ad::shape_string(g.value(h_prev).shape()) + " expected " +
                     ad::shape_string(hidden_shape));
  }
  const Var table = g.parameter(params.embedding);
  std::vector<Var> outputs;
  outputs.reserve(window.length);
  for (std::size_t t = 0; t < window.length; ++t) {
    const auto tokens = window.inputs_at(t);
    Var x = ad::embedding(g, table, std::span<const std::int32_t>(tokens), masks.embedding_rows);
    if (!masks.cell_input.empty()) x = ad::apply_mask(g, x, masks.cell_input);
    Var h = cell_step(g, genome, params.cell, x, h_prev, cfg).h;
    if (!masks.hidden.empty()) h = ad::apply_mask(g, h, masks.hidden);
    outputs.push_back(h);
    h_prev = h;
  }
  Unrolled<Real> out;
  out.features = outputs.size() == 1 ? outputs[0] : ad::concat_rows<Real>(g, outputs);
  out.final_hidden = g.value(h_prev);
  if (decode) {
    Var dec_in = out.features;
    if (!masks.output.empty()) {
      Tensor<Real> tiled(Shape{window.length * batch, cfg.hidden_dim});
      const auto src = masks.output.data();
      for (std::size_t t = 0; t < window.length; ++t) {
        std::copy(src.begin(), src.end(), tiled.data().begin() + static_cast<std::ptrdiff_t>(t * src.size()));
      }
      dec_in = ad::apply_mask(g, dec_in, tiled);
    }
    out.logits = ad::add_bias(g, ad::matmul(g, dec_in, g.parameter(params.decoder_w)), g.parameter(params.decoder_b));
  }
  return out;
}

template <typename Real>
LmForward<Real> lm_forward(Graph<Real>& g, const Genome& genome, LMParams<Real>& params, const BPTTWindow& window,
                           const Tensor<Real>& h_init, const ModelConfig& cfg, Rng& rng, bool train) {
  const auto masks = draw_masks<Real>(cfg, params.vocab, window.batch, rng, train);
  auto un = unroll(g, genome, params, window, h_init, cfg, masks, true);
  const auto targets = window.targets_step_major();
  LmForward<Real> out;
  out.logits = un.logits;
  out.loss = ad::cross_entropy(g, un.logits, std::span<const std::int32_t>(targets));
  out.final_hidden = std::move(un.final_hidden);
  return out;
}

double EvalResult::perplexity() const { return wenas::perplexity(total_nll, tokens); }

template <typename Real>
EvalResult evaluate_lm(const Genome& genome, LMParams<Real>& params, const BatchedCorpus& data, std::size_t bptt,
                       const ModelConfig& cfg) {
  EvalResult result;
  Rng unused(0);
  Tensor<Real> hidden;
  for (const auto& w : bptt_windows(data, bptt)) {
    Graph<Real> g;
    auto fwd = lm_forward(g, genome, params, w, hidden, cfg, unused, false);
    const std::size_t n = w.batch * w.length;
    result.total_nll += static_cast<double>(g.value(fwd.loss)[0]) * static_cast<double>(n);
    result.tokens += n;
    hidden = std::move(fwd.final_hidden);
  }
  return result;
}

template <typename Real>
std::vector<ad::ParamSlot<Real>> param_slots(LMParams<Real>& params) {
  std::vector<ad::ParamSlot<Real>> slots;
  for (auto* p : params.all()) slots.push_back({p, true});
  return slots;
}

template <typename Real>
double train_lm_epoch(const Genome& genome, LMParams<Real>& params, std::span<const BPTTWindow> windows,
                      const ModelConfig& cfg, ad::Optimizer<Real>& opt, Rng& rng) {
  Tensor<Real> hidden;
  double total = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    opt.zero_grad();
    Graph<Real> g;
    auto fwd = lm_forward(g, genome, params, windows[i], hidden, cfg, rng, true);
    const double loss = static_cast<double>(g.value(fwd.loss)[0]);
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite training loss at batch " + std::to_string(i) + " for genome " + describe(genome));
    }
    g.backward(fwd.loss);
    opt.step();
    total += loss;
    hidden = std::move(fwd.final_hidden);
  }
  return windows.empty() ? 0.0 : total / static_cast<double>(windows.size());
}

template <typename Real>
HiddenTrace trace_hidden(const Genome& genome, LMParams<Real>& params, const ModelConfig& cfg, std::size_t steps,
                         std::size_t batch, Rng& rng) {
  HiddenTrace trace;
  std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(params.vocab) - 1);
  Tensor<Real> hidden(Shape{batch, cfg.hidden_dim});
  for (std::size_t s = 0; s < steps; ++s) {
    Graph<Real> g;
    std::vector<std::int32_t> tokens(batch);
    for (auto& t : tokens) t = pick(rng);
    const Var x = ad::embedding(g, g.parameter(params.embedding), std::span<const std::int32_t>(tokens));
    const Var h = cell_step(g, genome, params.cell, x, g.constant(hidden), cfg).h;
    hidden = g.value(h);
    trace.steps = s + 1;
    double sq = 0.0;
    for (Real v : hidden.data()) sq += static_cast<double>(v) * static_cast<double>(v);
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) {
      trace.finite = false;
      trace.diverged = true;
      trace.first_nonfinite_step = s;
      break;
    }
    trace.max_norm = std::max(trace.max_norm, norm);
    if (norm > trace.divergence_threshold) trace.diverged = true;
  }
  return trace;
}

namespace {

using json = nlohmann::ordered_json;

template <typename Real>
json tensor_json(const Tensor<Real>& t) {
  json j;
  j["shape"] = t.shape();
  json data = json::array();
  for (Real v : t.data()) data.push_back(static_cast<double>(v));
  j["data"] = std::move(data);
  return j;
}

template <typename Real>
Tensor<Real> tensor_from_json(const json& j, const std::string& key) {
  if (!j.contains("shape") || !j.contains("data")) throw ParseError("checkpoint tensor '" + key + "' malformed", 0);
  auto shape = j["shape"].get<Shape>();
  std::vector<Real> data;
  data.reserve(j["data"].size());
  for (const auto& v : j["data"]) data.push_back(static_cast<Real>(v.get<double>()));
  return Tensor<Real>(std::move(shape), std::move(data));
}

}  // namespace

template <typename Real>
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg, const Genome& genome,
                     const LMParams<Real>& params, const Vocab& vocab, const std::string& run_config) {
  json j;
  j["format"] = "wenas-checkpoint";
  j["version"] = 1;
  j["config"] = {{"embedding_dim", cfg.embedding_dim},
                 {"hidden_dim", cfg.hidden_dim},
                 {"levels", cfg.levels},
                 {"batch_norm", cfg.batch_norm},
                 {"mode", std::string(to_string(cfg.mode))},
                 {"init_range", cfg.init_range},
                 {"dropout",
                  {{"embedding", cfg.dropout.embedding},
                   {"cell_input", cfg.dropout.cell_input},
                   {"hidden", cfg.dropout.hidden},
                   {"output", cfg.dropout.output}}}};
  j["genome"] = json::parse(serialize(genome));
  j["vocab"] = vocab.tokens();
  json tensors;
  tensors["embedding"] = tensor_json(params.embedding.value);
  tensors["w_x"] = tensor_json(params.cell.w_x.value);
  tensors["w_h"] = tensor_json(params.cell.w_h.value);
  for (std::size_t i = 0; i < params.cell.edges.size(); ++i) {
    tensors["edge_" + std::to_string(i + 1)] = tensor_json(params.cell.edges[i].value);
  }
  tensors["decoder_w"] = tensor_json(params.decoder_w.value);
  tensors["decoder_b"] = tensor_json(params.decoder_b.value);
  j["tensors"] = std::move(tensors);
  if (!run_config.empty()) j["run_config"] = run_config;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
}

template <typename Real>
Checkpoint<Real> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what(), e.byte);
  }
  Checkpoint<Real> ck;
  const auto& c = j.at("config");
  ck.config.embedding_dim = c.at("embedding_dim").get<std::size_t>();
  ck.config.hidden_dim = c.at("hidden_dim").get<std::size_t>();
  ck.config.levels = c.at("levels").get<std::uint32_t>();
  ck.config.batch_norm = c.at("batch_norm").get<bool>();
  ck.config.mode = c.at("mode").get<std::string>() == "search" ? CellMode::search : CellMode::eval;
  ck.config.init_range = c.at("init_range").get<double>();
  const auto& d = c.at("dropout");
  ck.config.dropout = {d.at("embedding").get<double>(), d.at("cell_input").get<double>(),
                       d.at("hidden").get<double>(), d.at("output").get<double>()};
  ck.genome = parse_genome(j.at("genome").dump());
  ck.vocab = j.at("vocab").get<std::vector<std::string>>();
  const auto& t = j.at("tensors");
  auto load = [&](const std::string& key) { return Parameter<Real>(key, tensor_from_json<Real>(t.at(key), key)); };
  ck.params.embedding = load("embedding");
  ck.params.cell.w_x = load("w_x");
  ck.params.cell.w_h = load("w_h");
  for (std::uint32_t i = 1; i < ck.genome.levels; ++i) ck.params.cell.edges.push_back(load("edge_" + std::to_string(i)));
  ck.params.decoder_w = load("decoder_w");
  ck.params.decoder_b = load("decoder_b");
  ck.params.vocab = ck.params.embedding.value.rows();
  return ck;
}

#define WENAS_INSTANTIATE_MODEL(Real)                                                                             \
  template struct LMParams<Real>;                                                                                 \
  template LMParams<Real> init_params<Real>(const Genome&, const ModelConfig&, std::size_t, Rng&);                \
  template Var node0<Real>(Graph<Real>&, Var, Var, CellParams<Real>&);                                            \
  template CellTrace<Real> cell_step<Real>(Graph<Real>&, const Genome&, CellParams<Real>&, Var, Var,              \
                                           const ModelConfig&);                                                   \
  template WindowMasks<Real> draw_masks<Real>(const ModelConfig&, std::size_t, std::size_t, Rng&, bool);          \
  template Unrolled<Real> unroll<Real>(Graph<Real>&, const Genome&, LMParams<Real>&, const BPTTWindow&,           \
                                       const Tensor<Real>&, const ModelConfig&, const WindowMasks<Real>&, bool);  \
  template LmForward<Real> lm_forward<Real>(Graph<Real>&, const Genome&, LMParams<Real>&, const BPTTWindow&,      \
                                            const Tensor<Real>&, const ModelConfig&, Rng&, bool);                 \
  template EvalResult evaluate_lm<Real>(const Genome&, LMParams<Real>&, const BatchedCorpus&, std::size_t,        \
                                        const ModelConfig&);                                                      \
  template std::vector<ad::ParamSlot<Real>> param_slots<Real>(LMParams<Real>&);                                   \
  template double train_lm_epoch<Real>(const Genome&, LMParams<Real>&, std::span<const BPTTWindow>,               \
                                       const ModelConfig&, ad::Optimizer<Real>&, Rng&);                           \
  template HiddenTrace trace_hidden<Real>(const Genome&, LMParams<Real>&, const ModelConfig&, std::size_t,        \
                                          std::size_t, Rng&);                                                     \
  template void save_checkpoint<Real>(const std::filesystem::path&, const ModelConfig&, const Genome&,            \
                                      const LMParams<Real>&, const Vocab&, const std::string&);                   \
  template Checkpoint<Real> load_checkpoint<Real>(const std::filesystem::path&);

WENAS_INSTANTIATE_MODEL(float)
WENAS_INSTANTIATE_MODEL(double)

#undef WENAS_INSTANTIATE_MODEL

}  // namespace wenas
