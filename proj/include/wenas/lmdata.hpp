#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wenas {

enum class Tokenization { word, character };

/// Token <-> id map. Ids 0 and 1 are always <unk> and <eos>; other tokens
/// follow in order of first occurrence.
class Vocab {
 public:
  static constexpr std::int32_t kUnk = 0;
  static constexpr std::int32_t kEos = 1;
  static constexpr std::string_view kUnkToken = "<unk>";
  static constexpr std::string_view kEosToken = "<eos>";

  Vocab();

  std::int32_t add(std::string_view token);
  /// Id of `token`, or <unk> when absent.
  std::int32_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

struct Corpus {
  std::vector<std::int32_t> ids;
  Vocab vocab;
};

/// Tokenizes text, appending <eos> after every line. When `vocab` is null a
/// new vocabulary is grown from the text; otherwise unseen tokens map to
/// <unk> and the given vocabulary is copied into the result unchanged.
Corpus tokenize_text(std::string_view text, const Vocab* vocab = nullptr, Tokenization mode = Tokenization::word);
/// Reads a UTF-8 file and tokenizes it. Throws std::runtime_error when the
/// file cannot be read and ConfigError when it holds no tokens.
Corpus load_corpus(const std::filesystem::path& path, const Vocab* vocab = nullptr,
                   Tokenization mode = Tokenization::word);

/// train.txt / valid.txt / test.txt of a corpus directory, all mapped with
/// the vocabulary grown on train. Missing valid/test files leave the
/// corresponding stream empty.
struct CorpusSplits {
  Vocab vocab;
  std::vector<std::int32_t> train;
  std::vector<std::int32_t> valid;
  std::vector<std::int32_t> test;
};
CorpusSplits load_corpus_dir(const std::filesystem::path& dir, Tokenization mode = Tokenization::word);

/// Inverse of tokenization: tokens joined by spaces (characters joined
/// directly), <eos> rendered as a newline.
std::string detokenize(std::span<const std::int32_t> ids, const Vocab& vocab,
                       Tokenization mode = Tokenization::word);

/// The flat stream cut into `batch` contiguous segments; trailing tokens
/// that do not fill a full column are dropped.
struct BatchedCorpus {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<std::int32_t> data;  // [batch x steps], row-major

  std::int32_t at(std::size_t row, std::size_t step) const { return data[row * steps + step]; }
};

BatchedCorpus batchify(std::span<const std::int32_t> stream, std::size_t batch);

/// One truncated-BPTT window. inputs/targets are [batch x length] row-major
/// and targets are the inputs shifted by one step.
struct BPTTWindow {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::size_t offset = 0;
  std::vector<std::int32_t> inputs;
  std::vector<std::int32_t> targets;

  /// Column of tokens at step t ([batch]).
  std::vector<std::int32_t> inputs_at(std::size_t t) const;
  /// Targets flattened step-major (t * batch + row), matching the row order
  /// of stacked per-step logits.
  std::vector<std::int32_t> targets_step_major() const;
};

/// Tiles the corpus with windows of `bptt` steps; the last window may be
/// shorter. Requires steps >= bptt + 1.
std::vector<BPTTWindow> bptt_windows(const BatchedCorpus& bc, std::size_t bptt);

double perplexity(double total_nll_nats, std::size_t token_count);

/// Perplexity of the add-`smoothing` unigram model estimated on `train`,
/// scored on `eval`.
double unigram_perplexity(std::span<const std::int32_t> train, std::span<const std::int32_t> eval,
                          std::size_t vocab_size, double smoothing = 1.0);

}  // namespace wenas
