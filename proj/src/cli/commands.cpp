#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "wenas/cli.hpp"
#include "wenas/error.hpp"
#include "wenas/search.hpp"

namespace wenas::cli {
namespace {

using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Tokenization parse_tokenization(const std::string& s) {
  if (s == "word") return Tokenization::word;
  if (s == "char") return Tokenization::character;
  throw ConfigError("unknown corpus mode '" + s + "' (expected word or char)");
}

void print_config(std::ostream& out, const RunConfig& rc) {
  std::istringstream in(rc.to_text());
  std::string line;
  while (std::getline(in, line)) out << "# " << line << '\n';
}

/// Model and dropout flags shared by search and eval.
struct ModelFlags {
  std::size_t emb_dim = 64;
  std::size_t hidden_dim = 64;
  double dropout_embedding = 0.2;
  double dropout_input = 0.75;
  double dropout_hidden = 0.25;
  double dropout_output = 0.75;
  double init_range = 0.1;

  void add_to(CLI::App* app) {
    app->add_option("--emb-dim", emb_dim, "Embedding size")->capture_default_str();
    app->add_option("--hidden-dim", hidden_dim, "Hidden state size")->capture_default_str();
    app->add_option("--dropout-embedding", dropout_embedding, "Word-embedding dropout")->capture_default_str();
    app->add_option("--dropout-input", dropout_input, "Cell-input dropout")->capture_default_str();
    app->add_option("--dropout-hidden", dropout_hidden, "Hidden-node dropout")->capture_default_str();
    app->add_option("--dropout-output", dropout_output, "Decoder-input dropout")->capture_default_str();
    app->add_option("--init-range", init_range, "Uniform init bound")->capture_default_str();
  }

  ModelConfig to_config(std::uint32_t levels, CellMode mode, bool batch_norm) const {
    ModelConfig cfg;
    cfg.embedding_dim = emb_dim;
    cfg.hidden_dim = hidden_dim;
    cfg.levels = levels;
    cfg.dropout = {dropout_embedding, dropout_input, dropout_hidden, dropout_output};
    cfg.mode = mode;
    cfg.batch_norm = batch_norm;
    cfg.init_range = init_range;
    return cfg;
  }

  void record(RunConfig& rc) const {
    rc.set("emb-dim", std::to_string(emb_dim));
    rc.set("hidden-dim", std::to_string(hidden_dim));
    rc.set("dropout-embedding", num(dropout_embedding));
    rc.set("dropout-input", num(dropout_input));
    rc.set("dropout-hidden", num(dropout_hidden));
    rc.set("dropout-output", num(dropout_output));
    rc.set("init-range", num(init_range));
  }
};

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  std::uint32_t levels = 8;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  std::string out = "-";
  bool allow_dup = false;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
  RunConfig rc;
  rc.set("command", "generate");
  rc.set("levels", std::to_string(o.levels));
  rc.set("count", std::to_string(o.count));
  rc.set("seed", std::to_string(o.seed));
  rc.set("allow-dup", o.allow_dup ? "true" : "false");

  Rng rng(o.seed);
  const auto pool = random_pool(o.count, o.levels, rng, !o.allow_dup);
  std::string text;
  for (const auto& g : pool) text += serialize(g) + "\n";
  if (o.out == "-") {
    out << text;
  } else {
    write_file(o.out, text);
    write_file(o.out + ".cfg", rc.to_text());
  }
  return kOk;
}

// ------------------------------------------------------------------ search

struct SearchOptions {
  std::string corpus;
  std::size_t total_nets = 64;
  std::size_t net_batch = 16;
  std::size_t seed_size = 4;
  std::uint32_t levels = 8;
  std::size_t epochs_per_round = 2;
  ModelFlags model;
  std::string optimizer = "adam";
  double lr = 1e-3;
  double weight_decay = 5e-7;
  double clip = 0.0;
  std::uint64_t seed = 1;
  std::size_t restarts = 1;
  std::size_t restart_epochs = 1;
  std::string out = "genome.json";
  std::string report = "report.csv";
  std::string report_json;
  std::size_t batch = 20;
  std::size_t bptt = 35;
  std::size_t threads = 1;
  std::string mix = "logits";
  int precision = 32;
  bool allow_dup = false;
  bool dry_run = false;
  bool no_batch_norm = false;
  std::string corpus_mode = "word";
};

RunConfig search_run_config(const SearchOptions& o) {
  RunConfig rc;
  rc.set("command", "search");
  rc.set("corpus", o.corpus);
  rc.set("corpus-mode", o.corpus_mode);
  rc.set("total-nets", std::to_string(o.total_nets));
  rc.set("net-batch", std::to_string(o.net_batch));
  rc.set("seed-size", std::to_string(o.seed_size));
  rc.set("levels", std::to_string(o.levels));
  rc.set("epochs-per-round", std::to_string(o.epochs_per_round));
  o.model.record(rc);
  rc.set("no-batch-norm", o.no_batch_norm ? "true" : "false");
  rc.set("optimizer", o.optimizer);
  rc.set("lr", num(o.lr));
  rc.set("weight-decay", num(o.weight_decay));
  rc.set("clip", num(o.clip));
  rc.set("batch", std::to_string(o.batch));
  rc.set("bptt", std::to_string(o.bptt));
  rc.set("mix", o.mix);
  rc.set("precision", std::to_string(o.precision));
  rc.set("allow-dup", o.allow_dup ? "true" : "false");
  rc.set("dry-run", o.dry_run ? "true" : "false");
  rc.set("seed", std::to_string(o.seed));
  rc.set("restarts", std::to_string(o.restarts));
  rc.set("restart-epochs", std::to_string(o.restart_epochs));
  return rc;
}

SearchConfig to_search_config(const SearchOptions& o) {
  SearchConfig cfg;
  cfg.total_networks = o.total_nets;
  cfg.net_batch = o.net_batch;
  cfg.seed_size = o.seed_size;
  cfg.epochs_per_round = o.epochs_per_round;
  cfg.model = o.model.to_config(o.levels, CellMode::search, !o.no_batch_norm);
  cfg.optimizer.kind = ad::parse_optimizer_kind(o.optimizer);
  cfg.optimizer.learning_rate = o.lr;
  cfg.optimizer.weight_decay = o.weight_decay;
  cfg.optimizer.clip_norm = o.clip;
  cfg.seed = o.seed;
  cfg.dedupe = !o.allow_dup;
  cfg.batch_size = o.batch;
  cfg.bptt = o.bptt;
  cfg.threads = std::max<std::size_t>(1, o.threads);
  cfg.mix = parse_mix_point(o.mix);
  cfg.dry_run = o.dry_run;
  return cfg;
}

/// Short from-scratch training of a genome in evaluation mode; returns the
/// validation perplexity. Used to compare restarts, whose mixture weights
/// are not comparable with each other.
template <typename Real>
double fine_train_valid_ppl(const Genome& genome, const SearchConfig& cfg, const CorpusSplits& data,
                            std::size_t epochs, std::uint64_t seed) {
  ModelConfig mc = cfg.model;
  mc.mode = CellMode::eval;
  Rng init(child_seed(seed, 1));
  auto params = init_params<Real>(genome, mc, data.vocab.size(), init);
  ad::Optimizer<Real> opt(cfg.optimizer, param_slots(params));
  const auto windows = bptt_windows(batchify(data.train, cfg.batch_size), cfg.bptt);
  Rng drop(child_seed(seed, 2));
  for (std::size_t e = 0; e < epochs; ++e) train_lm_epoch(genome, params, std::span<const BPTTWindow>(windows), mc, opt, drop);
  const std::size_t eval_batch = std::min<std::size_t>(10, std::max<std::size_t>(1, data.valid.size() / (cfg.bptt + 1)));
  return evaluate_lm(genome, params, batchify(data.valid, eval_batch), cfg.bptt, mc).perplexity();
}

template <typename Real>
int cmd_search_impl(const SearchOptions& o, std::ostream& out) {
  const RunConfig rc = search_run_config(o);
  const SearchConfig cfg = to_search_config(o);
  cfg.validate();
  if (o.restarts < 1) throw ConfigError("--restarts must be at least 1");
  if (o.restarts > 1 && o.dry_run) throw ConfigError("--restarts cannot be combined with --dry-run");
  if (o.corpus.empty() && !o.dry_run) throw ConfigError("--corpus is required unless --dry-run is given");

  CorpusSplits data;
  if (!o.corpus.empty()) data = load_corpus_dir(o.corpus, parse_tokenization(o.corpus_mode));
  if (o.restarts > 1 && data.valid.empty()) {
    throw ConfigError("--restarts > 1 needs valid.txt in the corpus directory");
  }
  print_config(out, rc);

  SearchReport chosen;
  double chosen_ppl = INFINITY;
  for (std::size_t r = 0; r < o.restarts; ++r) {
    SearchConfig rcfg = cfg;
    rcfg.seed = r == 0 ? cfg.seed : child_seed(cfg.seed, 0xA000 + r);
    auto report = run_search<Real>(rcfg, data.train, data.vocab.size());
    out << "restart " << r << ": " << report.total_rounds << " rounds, " << report.total_epochs
        << " epochs, best " << describe(report.best) << " (" << num(report.wall_seconds) << " s)\n";
    if (o.restarts == 1) {
      chosen = std::move(report);
      break;
    }
    const double ppl = fine_train_valid_ppl<Real>(report.best, rcfg, data, o.restart_epochs, rcfg.seed);
    out << "restart " << r << ": fine-tuned valid ppl " << num(ppl) << "\n";
    if (ppl < chosen_ppl) {
      chosen_ppl = ppl;
      chosen = std::move(report);
    }
  }

  json genome = json::parse(serialize(chosen.best));
  genome["run_config"] = rc.to_text();
  write_file(o.out, genome.dump() + "\n");
  write_file(o.report, report_csv(chosen, rc.to_text()));
  std::filesystem::path report_json_path = o.report_json;
  if (report_json_path.empty()) {
    report_json_path = o.report;
    report_json_path.replace_extension(".json");
    if (report_json_path == std::filesystem::path(o.report)) report_json_path += ".report.json";
  }
  write_file(report_json_path, report_json(chosen, rc.to_text()));
  out << "best genome " << describe(chosen.best) << " -> " << o.out << "\n";
  return kOk;
}

// -------------------------------------------------------------------- eval

struct EvalOptions {
  std::string genome;
  std::string corpus;
  std::size_t epochs = 10;
  std::string optimizer = "asgd";
  double lr = 20.0;
  double weight_decay = 8e-7;
  double clip = 0.25;
  std::size_t asgd_start = 0;  // 0: midpoint of training
  std::size_t batch = 64;
  std::size_t eval_batch = 10;
  std::size_t bptt = 35;
  std::uint64_t seed = 1;
  std::string checkpoint;
  std::string metrics;
  ModelFlags model;
  int precision = 32;
  std::string corpus_mode = "word";
};

RunConfig eval_run_config(const EvalOptions& o) {
  RunConfig rc;
  rc.set("command", "eval");
  rc.set("genome", o.genome);
  rc.set("corpus", o.corpus);
  rc.set("corpus-mode", o.corpus_mode);
  rc.set("epochs", std::to_string(o.epochs));
  rc.set("optimizer", o.optimizer);
  rc.set("lr", num(o.lr));
  rc.set("weight-decay", num(o.weight_decay));
  rc.set("clip", num(o.clip));
  rc.set("asgd-start", std::to_string(o.asgd_start));
  rc.set("batch", std::to_string(o.batch));
  rc.set("eval-batch", std::to_string(o.eval_batch));
  rc.set("bptt", std::to_string(o.bptt));
  o.model.record(rc);
  rc.set("precision", std::to_string(o.precision));
  rc.set("seed", std::to_string(o.seed));
  return rc;
}

template <typename Real>
int cmd_eval_impl(const EvalOptions& o, std::ostream& out) {
  RunConfig rc = eval_run_config(o);
  const Genome genome = parse_genome(read_file(o.genome));
  const CorpusSplits data = load_corpus_dir(o.corpus, parse_tokenization(o.corpus_mode));
  if (data.valid.empty()) throw ConfigError("corpus directory " + o.corpus + " has no valid.txt");

  ModelConfig mc = o.model.to_config(genome.levels, CellMode::eval, false);
  mc.validate();
  const auto train_windows = bptt_windows(batchify(data.train, o.batch), o.bptt);
  const auto valid = batchify(data.valid, o.eval_batch);
  const bool has_test = !data.test.empty();
  const auto test = has_test ? batchify(data.test, o.eval_batch) : BatchedCorpus{};

  ad::OptimizerConfig oc;
  oc.kind = ad::parse_optimizer_kind(o.optimizer);
  oc.learning_rate = o.lr;
  oc.weight_decay = o.weight_decay;
  oc.clip_norm = o.clip;
  oc.asgd_start = o.asgd_start > 0 ? o.asgd_start : std::max<std::size_t>(1, o.epochs * train_windows.size() / 2 + 1);
  oc.validate();
  rc.set("asgd-start", std::to_string(oc.asgd_start));
  print_config(out, rc);

  Rng init(child_seed(o.seed, 1));
  Rng drop(child_seed(o.seed, 2));
  auto params = init_params<Real>(genome, mc, data.vocab.size(), init);
  ad::Optimizer<Real> opt(oc, param_slots(params));

  const double unigram = unigram_perplexity(data.train, data.valid, data.vocab.size());
  out << "genome " << describe(genome) << ", " << params.parameter_count() << " parameters, vocab "
      << data.vocab.size() << ", unigram valid ppl " << num(unigram) << "\n";

  json epochs = json::array();
  auto score = [&](std::size_t epoch, double train_ppl) {
    // Evaluation uses the averaged iterate once ASGD has started averaging.
    opt.swap_averaged();
    const double vppl = evaluate_lm(genome, params, valid, o.bptt, mc).perplexity();
    const double tppl = has_test ? evaluate_lm(genome, params, test, o.bptt, mc).perplexity() : NAN;
    opt.swap_averaged();
    out << "epoch " << epoch << " train_ppl " << num(train_ppl) << " valid_ppl " << num(vppl);
    if (has_test) out << " test_ppl " << num(tppl);
    out << "\n";
    json e;
    e["epoch"] = epoch;
    e["train_ppl"] = train_ppl;
    e["valid_ppl"] = vppl;
    if (has_test) e["test_ppl"] = tppl;
    epochs.push_back(std::move(e));
  };

  score(0, evaluate_lm(genome, params, batchify(data.train, o.batch), o.bptt, mc).perplexity());
  for (std::size_t e = 1; e <= o.epochs; ++e) {
    const double loss = train_lm_epoch(genome, params, std::span<const BPTTWindow>(train_windows), mc, opt, drop);
    score(e, std::exp(loss));
  }

  if (!o.checkpoint.empty()) {
    opt.swap_averaged();
    save_checkpoint(o.checkpoint, mc, genome, params, data.vocab, rc.to_text());
    opt.swap_averaged();
  }
  if (!o.metrics.empty()) {
    json m;
    m["run_config"] = rc.to_text();
    m["genome"] = json::parse(serialize(genome));
    m["parameters"] = params.parameter_count();
    m["vocab"] = data.vocab.size();
    m["unigram_valid_ppl"] = unigram;
    m["epochs"] = epochs;
    m["final"] = epochs.back();
    write_file(o.metrics, m.dump(1) + "\n");
  }
  return kOk;
}

// ------------------------------------------------------------------ report

struct ReportOptions {
  std::string report;
  std::size_t round = 0;  // 0: all rounds
};

int cmd_report(const ReportOptions& o, std::ostream& out) {
  const auto rows = parse_report_csv(read_file(o.report));
  std::map<std::size_t, std::vector<CsvWeightRow>> rounds;
  for (const auto& r : rows) rounds[r.round].push_back(r);
  if (rounds.empty()) throw std::runtime_error("report " + o.report + " has no weight rows");
  for (auto& [_, list] : rounds) {
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
  }
  const std::size_t first = rounds.begin()->first;
  const std::size_t last = rounds.rbegin()->first;

  if (o.round != 0) {
    auto it = rounds.find(o.round);
    if (it == rounds.end()) {
      throw ConfigError("round " + std::to_string(o.round) + " out of range; valid rounds are " +
                        std::to_string(first) + ".." + std::to_string(last));
    }
    out << "rank,net_index,weight,cumulative,genome\n";
    double cumulative = 0.0;
    for (std::size_t k = 0; k < it->second.size(); ++k) {
      const auto& r = it->second[k];
      cumulative += r.weight;
      char buf[128];
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,", k + 1, r.net_index, r.weight, cumulative);
      out << buf << describe(parse_genome(r.genome)) << "\n";
    }
    return kOk;
  }
  out << "round,candidates,weight_sum,max_weight,min_weight,top_net_index\n";
  for (const auto& [round, list] : rounds) {
    double total = 0.0;
    for (const auto& r : list) total += r.weight;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g,%zu\n", round, list.size(), total,
                  list.front().weight, list.back().weight, list.front().net_index);
    out << buf;
  }
  return kOk;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recurrent cell search with weighted networks", "wenas"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Write random cell genomes, one JSON object per line");
  g->add_option("--levels", gen.levels, "Nodes per cell, including node 0")->capture_default_str();
  g->add_option("--count", gen.count, "Number of genomes")->required();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output path, '-' for stdout")->capture_default_str();
  g->add_flag("--allow-dup", gen.allow_dup, "Allow duplicate genomes");

  SearchOptions so;
  std::size_t threads_default = 1;
  auto* s = app.add_subcommand("search", "Search a cell with batched weighted networks");
  s->add_option("--corpus", so.corpus, "Corpus directory with train.txt (valid.txt for restarts)");
  s->add_option("--corpus-mode", so.corpus_mode, "word or char tokenization")->capture_default_str();
  s->add_option("--total-nets", so.total_nets, "Pool size T")->capture_default_str();
  s->add_option("--net-batch", so.net_batch, "Networks per round B")->capture_default_str();
  s->add_option("--seed-size", so.seed_size, "Seeds carried between rounds K")->capture_default_str();
  s->add_option("--levels", so.levels, "Nodes per cell L")->capture_default_str();
  s->add_option("--epochs-per-round", so.epochs_per_round, "Training epochs per round")->capture_default_str();
  so.model.add_to(s);
  s->add_flag("--no-batch-norm", so.no_batch_norm, "Disable per-node batch normalization");
  s->add_option("--optimizer", so.optimizer, "sgd, adam or asgd")->capture_default_str();
  s->add_option("--lr", so.lr, "Learning rate")->capture_default_str();
  s->add_option("--weight-decay", so.weight_decay, "L2 coefficient")->capture_default_str();
  s->add_option("--clip", so.clip, "Global gradient-norm cap, 0 = off")->capture_default_str();
  s->add_option("--batch", so.batch, "Data batch size")->capture_default_str();
  s->add_option("--bptt", so.bptt, "BPTT length")->capture_default_str();
  s->add_option("--mix", so.mix, "Mixing point: logits or hidden")->capture_default_str();
  s->add_option("--precision", so.precision, "32 or 64")->capture_default_str();
  s->add_option("--seed", so.seed, "Master seed")->capture_default_str();
  s->add_option("--restarts", so.restarts, "Independent searches; best by short fine-train")->capture_default_str();
  s->add_option("--restart-epochs", so.restart_epochs, "Fine-train epochs per restart")->capture_default_str();
  s->add_option("--out", so.out, "Best genome output")->capture_default_str();
  s->add_option("--report", so.report, "Weight table CSV")->capture_default_str();
  s->add_option("--report-json", so.report_json, "Structured report (default: report path with .json)");
  s->add_option("--threads", so.threads, "Candidate-level worker threads")->envname("WENAS_THREADS")->capture_default_str();
  s->add_flag("--allow-dup", so.allow_dup, "Keep duplicate genomes in the pool");
  s->add_flag("--dry-run", so.dry_run, "Bookkeeping only; no training");
  (void)threads_default;

  EvalOptions eo;
  auto* e = app.add_subcommand("eval", "Train a single cell from scratch and report perplexity");
  e->add_option("--genome", eo.genome, "Genome JSON file")->required();
  e->add_option("--corpus", eo.corpus, "Corpus directory with train.txt and valid.txt")->required();
  e->add_option("--corpus-mode", eo.corpus_mode, "word or char tokenization")->capture_default_str();
  e->add_option("--epochs", eo.epochs, "Training epochs")->capture_default_str();
  e->add_option("--optimizer", eo.optimizer, "sgd, adam or asgd")->capture_default_str();
  e->add_option("--lr", eo.lr, "Learning rate")->capture_default_str();
  e->add_option("--weight-decay", eo.weight_decay, "L2 coefficient")->capture_default_str();
  e->add_option("--clip", eo.clip, "Global gradient-norm cap, 0 = off")->capture_default_str();
  e->add_option("--asgd-start", eo.asgd_start, "Optimizer step where averaging starts, 0 = midpoint")
      ->capture_default_str();
  e->add_option("--batch", eo.batch, "Training batch size")->capture_default_str();
  e->add_option("--eval-batch", eo.eval_batch, "Batch size for valid/test scoring")->capture_default_str();
  e->add_option("--bptt", eo.bptt, "BPTT length")->capture_default_str();
  e->add_option("--seed", eo.seed, "Random seed")->capture_default_str();
  e->add_option("--checkpoint", eo.checkpoint, "Checkpoint output path");
  e->add_option("--metrics", eo.metrics, "Per-epoch metrics JSON output path");
  e->add_option("--precision", eo.precision, "32 or 64")->capture_default_str();
  eo.model.add_to(e);

  ReportOptions ro;
  auto* r = app.add_subcommand("report", "Summarize sorted network weights from a search report");
  r->add_option("--report", ro.report, "Report CSV written by search")->required();
  r->add_option("--round", ro.round, "Round to print (1-based); all rounds when omitted");

  try {
    args = expand_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kConfigError;
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << "\n";
    return kConfigError;
  }

  auto check_precision = [](int p) {
    if (p != 32 && p != 64) throw ConfigError("--precision must be 32 or 64");
    return p == 64;
  };
  try {
    if (*g) return cmd_generate(gen, out);
    if (*s) return check_precision(so.precision) ? cmd_search_impl<double>(so, out) : cmd_search_impl<float>(so, out);
    if (*e) return check_precision(eo.precision) ? cmd_eval_impl<double>(eo, out) : cmd_eval_impl<float>(eo, out);
    if (*r) return cmd_report(ro, out);
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const NumericError& ex) {
    err << "error: " << ex.what() << "\n";
    return kRuntimeError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace wenas::cli
