#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wenas/wenet.hpp"

namespace wenas {

struct SearchConfig {
  std::size_t total_networks = 64;  // T
  std::size_t net_batch = 16;       // B
  std::size_t seed_size = 4;        // K
  std::size_t epochs_per_round = 2;
  ModelConfig model;
  ad::OptimizerConfig optimizer;
  std::uint64_t seed = 1;
  bool dedupe = true;
  std::size_t batch_size = 20;
  std::size_t bptt = 35;
  std::size_t threads = 1;
  MixPoint mix = MixPoint::logits;
  /// Round bookkeeping only; nothing is trained and seeds are placeholders.
  bool dry_run = false;

  std::uint32_t levels() const noexcept { return model.levels; }
  void validate() const;
};

/// One row of a round's sorted weight table.
struct WeightRow {
  std::size_t rank = 0;       // 1-based
  std::size_t net_index = 0;  // index into the round's candidate list
  Genome genome;
  double weight = 0.0;
};

struct RoundResult {
  std::vector<RankedCandidate> seeds;
  std::vector<WeightRow> table;  // descending weight
  TrainLog log;
};

/// Trains one weighted network over batch followed by the seeds (fresh
/// parameters, zero logits) and keeps the K heaviest candidates. Seeds that
/// duplicate a batch genome are collapsed into one candidate.
template <typename Real>
RoundResult round_once(std::span<const Genome> batch, std::span<const Genome> seeds, const SearchConfig& cfg,
                       std::span<const BPTTWindow> windows, std::size_t vocab, std::uint64_t round_seed);

/// Highest weight, ties to the earlier entry. Throws ConfigError when empty.
Genome select_best(std::span<const RankedCandidate> seeds);

struct RoundRecord {
  std::size_t round = 0;               // 1-based
  std::vector<std::size_t> batch;      // pool indices drawn this round
  std::vector<std::size_t> candidates; // pool indices in training order
  std::vector<double> weights;         // aligned with candidates
  std::vector<std::size_t> seeds;      // pool indices kept, heaviest first
  std::vector<std::vector<double>> trajectory;  // weights after each epoch
  std::size_t collapsed_duplicates = 0;
};

struct SearchReport {
  std::vector<Genome> pool;
  std::vector<RoundRecord> rounds;
  Genome best;
  std::size_t best_index = 0;
  std::size_t total_rounds = 0;
  std::size_t total_epochs = 0;
  bool dry_run = false;
  double wall_seconds = 0.0;  // not serialized
};

/// Generates the pool of T genomes and processes it B at a time, carrying
/// the top K networks of each round into the next.
template <typename Real>
SearchReport run_search(const SearchConfig& cfg, std::span<const std::int32_t> train_stream, std::size_t vocab);

/// Structured report. Deterministic for a deterministic search.
std::string report_json(const SearchReport& report, const std::string& run_config = {});

/// `round,rank,net_index,genome,weight` rows, preceded by "# " comment
/// lines carrying `run_config`. net_index is the pool index.
std::string report_csv(const SearchReport& report, const std::string& run_config = {});

struct CsvWeightRow {
  std::size_t round = 0;
  std::size_t rank = 0;
  std::size_t net_index = 0;
  std::string genome;
  double weight = 0.0;
};

/// Parses report_csv output; comment lines are skipped. Throws ParseError.
std::vector<CsvWeightRow> parse_report_csv(std::string_view text);

}  // namespace wenas
