#include "wenas/lmdata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wenas/error.hpp"

namespace wenas {

Vocab::Vocab() {
  add(kUnkToken);
  add(kEosToken);
}

std::int32_t Vocab::add(std::string_view token) {
  std::string key(token);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(tokens_.size());
  tokens_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

std::int32_t Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const { return ids_.count(std::string(token)) != 0; }

const std::string& Vocab::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of size " + std::to_string(size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

namespace {

// Splits a line into UTF-8 code points.
std::vector<std::string_view> utf8_chars(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const auto lead = static_cast<unsigned char>(line[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    len = std::min(len, line.size() - i);
    out.push_back(line.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

Corpus tokenize_text(std::string_view text, const Vocab* vocab, Tokenization mode) {
  Corpus corpus;
  if (vocab) corpus.vocab = *vocab;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto pieces = mode == Tokenization::word ? split_words(line) : utf8_chars(line);
    for (auto piece : pieces) {
      corpus.ids.push_back(vocab ? corpus.vocab.id(piece) : corpus.vocab.add(piece));
    }
    corpus.ids.push_back(Vocab::kEos);
    pos = end + 1;
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const Vocab* vocab, Tokenization mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read corpus file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  Corpus corpus = tokenize_text(buffer.str(), vocab, mode);
  if (corpus.ids.empty()) throw ConfigError("corpus file " + path.string() + " is empty");
  return corpus;
}

CorpusSplits load_corpus_dir(const std::filesystem::path& dir, Tokenization mode) {
  CorpusSplits splits;
  Corpus train = load_corpus(dir / "train.txt", nullptr, mode);
  splits.vocab = std::move(train.vocab);
  splits.train = std::move(train.ids);
  for (auto [name, dst] : {std::pair{"valid.txt", &splits.valid}, std::pair{"test.txt", &splits.test}}) {
    if (std::filesystem::exists(dir / name)) *dst = load_corpus(dir / name, &splits.vocab, mode).ids;
  }
  return splits;
}

std::string detokenize(std::span<const std::int32_t> ids, const Vocab& vocab, Tokenization mode) {
  std::string out;
  bool line_start = true;
  for (auto id : ids) {
    if (id == Vocab::kEos) {
      out += '\n';
      line_start = true;
      continue;
    }
    if (!line_start && mode == Tokenization::word) out += ' ';
    out += vocab.token(id);
    line_start = false;
  }
  return out;
}

BatchedCorpus batchify(std::span<const std::int32_t> stream, std::size_t batch) {
  if (batch == 0) throw ConfigError("batch size must be positive");
  if (stream.size() < batch) {
    throw ConfigError("stream of " + std::to_string(stream.size()) + " tokens is too short for batch " +
                      std::to_string(batch));
  }
  BatchedCorpus bc;
  bc.batch = batch;
  bc.steps = stream.size() / batch;
  bc.data.assign(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(bc.batch * bc.steps));
  return bc;
}

std::vector<std::int32_t> BPTTWindow::inputs_at(std::size_t t) const {
  std::vector<std::int32_t> col(batch);
  for (std::size_t r = 0; r < batch; ++r) col[r] = inputs[r * length + t];
  return col;
}

std::vector<std::int32_t> BPTTWindow::targets_step_major() const {
  std::vector<std::int32_t> out(batch * length);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t r = 0; r < batch; ++r) out[t * batch + r] = targets[r * length + t];
  }
  return out;
}

std::vector<BPTTWindow> bptt_windows(const BatchedCorpus& bc, std::size_t bptt) {
  if (bptt == 0) throw ConfigError("bptt length must be positive");
  if (bc.steps < bptt + 1) {
    throw ConfigError("stream too short: " + std::to_string(bc.batch * bc.steps) + " tokens < batch*(bptt+1) = " +
                      std::to_string(bc.batch * (bptt + 1)));
  }
  std::vector<BPTTWindow> windows;
  for (std::size_t t = 0; t + 1 < bc.steps; t += bptt) {
    BPTTWindow w;
    w.batch = bc.batch;
    w.length = std::min(bptt, bc.steps - 1 - t);
    w.offset = t;
    w.inputs.resize(w.batch * w.length);
    w.targets.resize(w.batch * w.length);
    for (std::size_t r = 0; r < w.batch; ++r) {
      for (std::size_t k = 0; k < w.length; ++k) {
        w.inputs[r * w.length + k] = bc.at(r, t + k);
        w.targets[r * w.length + k] = bc.at(r, t + k + 1);
      }
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

double perplexity(double total_nll_nats, std::size_t token_count) {
  if (token_count == 0) throw ConfigError("perplexity needs at least one token");
  return std::exp(total_nll_nats / static_cast<double>(token_count));
}

double unigram_perplexity(std::span<const std::int32_t> train, std::span<const std::int32_t> eval,
                          std::size_t vocab_size, double smoothing) {
  if (vocab_size == 0) throw ConfigError("vocabulary must be non-empty");
  std::vector<double> counts(vocab_size, smoothing);
  for (auto id : train) counts.at(static_cast<std::size_t>(id)) += 1.0;
  double total = 0.0;
  for (double c : counts) total += c;
  double nll = 0.0;
  std::size_t n = 0;
  for (auto id : eval) {
    const double p = counts.at(static_cast<std::size_t>(id)) / total;
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    nll -= std::log(p);
    ++n;
  }
  return perplexity(nll, n);
}

}  // namespace wenas
