#include "wenas/search.hpp"

#include <chrono>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "wenas/error.hpp"

namespace wenas {

void SearchConfig::validate() const {
  if (total_networks == 0) throw ConfigError("total networks T must be at least 1");
  if (net_batch < 1 || net_batch > total_networks) {
    throw ConfigError("network batch B=" + std::to_string(net_batch) + " must satisfy 1 <= B <= T=" +
                      std::to_string(total_networks));
  }
  if (seed_size < 1 || seed_size > net_batch) {
    throw ConfigError("seed size K=" + std::to_string(seed_size) + " must satisfy 1 <= K <= B=" +
                      std::to_string(net_batch));
  }
  if (epochs_per_round < 1) throw ConfigError("epochs per round must be at least 1");
  if (batch_size < 1) throw ConfigError("data batch size must be positive");
  if (bptt < 1) throw ConfigError("bptt length must be positive");
  if (model.batch_norm_active() && batch_size < 2) {
    throw ConfigError("per-node batch normalization needs a data batch of at least 2");
  }
  model.validate();
  if (!dry_run) optimizer.validate();
}

namespace {

struct UnionBuild {
  std::vector<Genome> genomes;
  std::vector<std::size_t> source;  // position in batch ++ seeds
  std::size_t collapsed = 0;
};

UnionBuild build_union(std::span<const Genome> batch, std::span<const Genome> seeds) {
  UnionBuild u;
  auto add = [&](const Genome& g, std::size_t pos) {
    if (std::find(u.genomes.begin(), u.genomes.end(), g) != u.genomes.end()) {
      ++u.collapsed;
      return;
    }
    u.genomes.push_back(g);
    u.source.push_back(pos);
  };
  for (std::size_t i = 0; i < batch.size(); ++i) add(batch[i], i);
  for (std::size_t i = 0; i < seeds.size(); ++i) add(seeds[i], batch.size() + i);
  return u;
}

std::vector<WeightRow> sorted_table(std::span<const Genome> genomes, std::span<const double> w) {
  const auto order = rank_by_weight(w);
  std::vector<WeightRow> table;
  for (std::size_t r = 0; r < order.size(); ++r) table.push_back({r + 1, order[r], genomes[order[r]], w[order[r]]});
  return table;
}

}  // namespace

template <typename Real>
RoundResult round_once(std::span<const Genome> batch, std::span<const Genome> seeds, const SearchConfig& cfg,
                       std::span<const BPTTWindow> windows, std::size_t vocab, std::uint64_t round_seed) {
  const UnionBuild u = build_union(batch, seeds);
  if (u.genomes.empty()) throw ConfigError("a search round needs at least one candidate");
  RoundResult result;
  const std::size_t k = std::min(cfg.seed_size, u.genomes.size());
  auto state = make_wenet<Real>(u.genomes, cfg.model, vocab, round_seed, cfg.mix);
  result.log = wenet_train(state, windows, cfg.epochs_per_round, cfg.optimizer, cfg.threads);
  result.seeds = top_k(state, k);
  const auto w = weights(state);
  result.table = sorted_table(u.genomes, w);
  return result;
}

Genome select_best(std::span<const RankedCandidate> seeds) {
  if (seeds.empty()) throw ConfigError("select_best: no seed networks to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < seeds.size(); ++i) {
    if (seeds[i].weight > seeds[best].weight) best = i;
  }
  return seeds[best].genome;
}

template <typename Real>
SearchReport run_search(const SearchConfig& cfg, std::span<const std::int32_t> train_stream, std::size_t vocab) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  SearchReport report;
  report.dry_run = cfg.dry_run;

  Rng pool_rng(child_seed(cfg.seed, 0));
  report.pool = random_pool(cfg.total_networks, cfg.levels(), pool_rng, cfg.dedupe);

  std::vector<BPTTWindow> windows;
  if (!cfg.dry_run) {
    if (train_stream.empty()) throw ConfigError("search corpus is empty");
    windows = bptt_windows(batchify(train_stream, cfg.batch_size), cfg.bptt);
  }

  std::vector<std::size_t> seed_indices;
  std::vector<RankedCandidate> last_seeds;
  std::size_t next = 0;
  while (next < report.pool.size()) {
    RoundRecord rec;
    rec.round = report.rounds.size() + 1;
    const std::size_t take = std::min(cfg.net_batch, report.pool.size() - next);
    for (std::size_t i = 0; i < take; ++i) rec.batch.push_back(next + i);
    next += take;

    std::vector<Genome> batch_genomes;
    for (auto idx : rec.batch) batch_genomes.push_back(report.pool[idx]);
    std::vector<Genome> seed_genomes;
    for (auto idx : seed_indices) seed_genomes.push_back(report.pool[idx]);
    std::vector<std::size_t> combined = rec.batch;
    combined.insert(combined.end(), seed_indices.begin(), seed_indices.end());

    const UnionBuild u = build_union(batch_genomes, seed_genomes);
    rec.collapsed_duplicates = u.collapsed;
    for (auto pos : u.source) rec.candidates.push_back(combined[pos]);

    const std::size_t k = std::min(cfg.seed_size, rec.candidates.size());
    if (cfg.dry_run) {
      rec.weights.assign(rec.candidates.size(), 1.0 / static_cast<double>(rec.candidates.size()));
      last_seeds.clear();
      for (std::size_t i = 0; i < k; ++i) last_seeds.push_back({i, u.genomes[i], rec.weights[i]});
    } else {
      const auto result = round_once<Real>(batch_genomes, seed_genomes, cfg, windows, vocab,
                                           child_seed(cfg.seed, rec.round));
      rec.weights.assign(rec.candidates.size(), 0.0);
      for (const auto& row : result.table) rec.weights[row.net_index] = row.weight;
      rec.trajectory = result.log.weights;
      last_seeds = result.seeds;
    }
    seed_indices.clear();
    for (const auto& s : last_seeds) seed_indices.push_back(rec.candidates[s.index]);
    rec.seeds = seed_indices;
    report.rounds.push_back(std::move(rec));
  }

  report.total_rounds = report.rounds.size();
  report.total_epochs = report.total_rounds * cfg.epochs_per_round;
  report.best = select_best(last_seeds);
  for (std::size_t i = 0; i < last_seeds.size(); ++i) {
    if (last_seeds[i].genome == report.best) {
      report.best_index = seed_indices[i];
      break;
    }
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

std::string format_weight(double w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void comment_block(std::ostringstream& out, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out << "# " << line << '\n';
}

}  // namespace

std::string report_json(const SearchReport& report, const std::string& run_config) {
  using json = nlohmann::ordered_json;
  json j;
  j["format"] = "wenas-search-report";
  j["version"] = 1;
  if (!run_config.empty()) j["run_config"] = run_config;
  j["dry_run"] = report.dry_run;
  j["total_rounds"] = report.total_rounds;
  j["total_epochs"] = report.total_epochs;
  j["best_index"] = report.best_index;
  j["best"] = json::parse(serialize(report.best));
  json pool = json::array();
  for (const auto& g : report.pool) pool.push_back(serialize(g));
  j["pool"] = std::move(pool);
  json rounds = json::array();
  for (const auto& r : report.rounds) {
    json jr;
    jr["round"] = r.round;
    jr["batch"] = r.batch;
    jr["candidates"] = r.candidates;
    jr["weights"] = r.weights;
    jr["seeds"] = r.seeds;
    jr["trajectory"] = r.trajectory;
    jr["collapsed_duplicates"] = r.collapsed_duplicates;
    rounds.push_back(std::move(jr));
  }
  j["rounds"] = std::move(rounds);
  return j.dump(1) + "\n";
}

std::string report_csv(const SearchReport& report, const std::string& run_config) {
  std::ostringstream out;
  out << "# wenas search report\n";
  comment_block(out, run_config);
  out << "round,rank,net_index,genome,weight\n";
  for (const auto& r : report.rounds) {
    const auto order = rank_by_weight(r.weights);
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t pool_index = r.candidates[order[k]];
      out << r.round << ',' << (k + 1) << ',' << pool_index << ',' << csv_quote(serialize(report.pool[pool_index]))
          << ',' << format_weight(r.weights[order[k]]) << '\n';
    }
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote on line " + std::to_string(line_no), line_no);
  fields.push_back(std::move(cur));
  return fields;
}

std::size_t to_index(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError("bad integer '" + s + "' on line " + std::to_string(line_no), line_no);
  }
}

}  // namespace

std::vector<CsvWeightRow> parse_report_csv(std::string_view text) {
  std::vector<CsvWeightRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "round,rank,net_index,genome,weight") {
        throw ParseError("expected header 'round,rank,net_index,genome,weight' on line " + std::to_string(line_no),
                         line_no);
      }
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line, line_no);
    if (f.size() != 5) throw ParseError("expected 5 fields on line " + std::to_string(line_no), line_no);
    CsvWeightRow row;
    row.round = to_index(f[0], line_no);
    row.rank = to_index(f[1], line_no);
    row.net_index = to_index(f[2], line_no);
    row.genome = f[3];
    try {
      row.weight = std::stod(f[4]);
    } catch (const std::exception&) {
      throw ParseError("bad weight '" + f[4] + "' on line " + std::to_string(line_no), line_no);
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError("report has no header row", 0);
  return rows;
}

template RoundResult round_once<float>(std::span<const Genome>, std::span<const Genome>, const SearchConfig&,
                                       std::span<const BPTTWindow>, std::size_t, std::uint64_t);
template RoundResult round_once<double>(std::span<const Genome>, std::span<const Genome>, const SearchConfig&,
                                        std::span<const BPTTWindow>, std::size_t, std::uint64_t);
template SearchReport run_search<float>(const SearchConfig&, std::span<const std::int32_t>, std::size_t);
template SearchReport run_search<double>(const SearchConfig&, std::span<const std::int32_t>, std::size_t);

}  // namespace wenas
