#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "support/synthetic.hpp"
#include "wenas/cellspace.hpp"
#include "wenas/cli.hpp"
#include "wenas/search.hpp"

using namespace wenas;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "wenas");
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("wenas_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

const fs::path& tiny_corpus() {
  static const fs::path dir = [] {
    auto d = scratch("corpus");
    testing::write_markov3_corpus(d, 5000, 1500, 3);
    return d;
  }();
  return dir;
}

std::vector<std::string> toy_search_args(const fs::path& dir, std::uint64_t seed = 1) {
  return {"search", "--corpus", tiny_corpus().string(), "--total-nets", "8", "--net-batch", "4",
          "--seed-size", "2", "--levels", "4", "--epochs-per-round", "1", "--emb-dim", "8",
          "--hidden-dim", "8", "--batch", "4", "--bptt", "10", "--threads", "1",
          "--seed", std::to_string(seed), "--out", (dir / "genome.json").string(),
          "--report", (dir / "report.csv").string()};
}

}  // namespace

TEST_SUITE("cli generate") {
  TEST_CASE("L=2 count 4 covers every op") {
    const auto dir = scratch("gen");
    const auto path = dir / "g.jsonl";
    const auto r = run_cli({"generate", "--levels", "2", "--count", "4", "--out", path.string()});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(slurp(path));
    REQUIRE(lines.size() == 4);
    std::set<Genome> seen;
    for (const auto& l : lines) {
      const auto g = parse_genome(l);
      CHECK(g.genes[0].ancestor == 0);
      seen.insert(g);
    }
    CHECK(seen.size() == 4);
    CHECK(fs::exists(dir / "g.jsonl.cfg"));
  }

  TEST_CASE("same seed, same bytes") {
    const auto dir = scratch("gen_det");
    const auto a = dir / "a.jsonl", b = dir / "b.jsonl";
    REQUIRE(run_cli({"generate", "--count", "20", "--seed", "9", "--out", a.string()}).code == 0);
    REQUIRE(run_cli({"generate", "--count", "20", "--seed", "9", "--out", b.string()}).code == 0);
    CHECK(slurp(a) == slurp(b));
  }

  TEST_CASE("distinct genomes on stdout") {
    const auto r = run_cli({"generate", "--levels", "3", "--count", "10", "--out", "-"});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    CHECK(std::set<std::string>(lines.begin(), lines.end()).size() == 10);
  }

  TEST_CASE("too many genomes for the space") {
    const auto r = run_cli({"generate", "--levels", "2", "--count", "5", "--out", "-"});
    CHECK(r.code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
  }
}

TEST_SUITE("cli search") {
  TEST_CASE("toy search writes a genome and a report") {
    const auto dir = scratch("search");
    const auto r = run_cli(toy_search_args(dir));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("best genome") != std::string::npos);
    const auto genome_text = slurp(dir / "genome.json");
    const Genome best = parse_genome(genome_text);
    CHECK(best.levels == 4);
    CHECK(nlohmann::json::parse(genome_text).contains("run_config"));

    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report["total_rounds"] == 2);
    std::size_t candidates = 0;
    for (const auto& round : report["rounds"]) candidates += round["candidates"].size();
    const auto rows = parse_report_csv(slurp(dir / "report.csv"));
    CHECK(rows.size() == candidates);
    CHECK(report["rounds"][1]["candidates"].size() == 6);

    // The per-round CSV table, sorted by the report command, leads with the seeds.
    for (const auto& round : report["rounds"]) {
      const auto n = round["round"].get<std::size_t>();
      const auto table = run_cli({"report", "--report", (dir / "report.csv").string(), "--round", std::to_string(n)});
      REQUIRE(table.code == 0);
      const auto lines = lines_of(table.out);
      REQUIRE(lines.size() == round["candidates"].size() + 1);
      CHECK(lines[0] == "rank,net_index,weight,cumulative,genome");
      double previous = 2.0, cumulative = 0.0;
      for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream cells(lines[i]);
        std::string rank, index, weight, cum;
        std::getline(cells, rank, ',');
        std::getline(cells, index, ',');
        std::getline(cells, weight, ',');
        std::getline(cells, cum, ',');
        CHECK(std::stoul(rank) == i);
        const double w = std::stod(weight);
        CHECK(w <= previous);
        previous = w;
        cumulative = std::stod(cum);
        if (i - 1 < round["seeds"].size()) CHECK(std::stoul(index) == round["seeds"][i - 1].get<std::size_t>());
      }
      CHECK(cumulative == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("same seed, same files") {
    const auto a = scratch("search_a"), b = scratch("search_b");
    REQUIRE(run_cli(toy_search_args(a, 4)).code == 0);
    REQUIRE(run_cli(toy_search_args(b, 4)).code == 0);
    const auto strip_paths = [](std::string text, const fs::path& dir) {
      const std::string needle = dir.string();
      for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle)) text.replace(pos, needle.size(), "DIR");
      return text;
    };
    CHECK(strip_paths(slurp(a / "genome.json"), a) == strip_paths(slurp(b / "genome.json"), b));
    CHECK(strip_paths(slurp(a / "report.csv"), a) == strip_paths(slurp(b / "report.csv"), b));
  }

  TEST_CASE("dry run at full scale") {
    const auto dir = scratch("dry");
    const auto r = run_cli({"search", "--dry-run", "--total-nets", "10000", "--net-batch", "100", "--seed-size", "20",
                            "--out", (dir / "g.json").string(), "--report", (dir / "r.csv").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto report = nlohmann::json::parse(slurp(dir / "r.json"));
    CHECK(report["total_rounds"] == 100);
    CHECK(report["total_epochs"] == 200);
    CHECK(report["dry_run"] == true);
  }

  TEST_CASE("configuration errors exit with 2") {
    const auto dir = scratch("search_bad");
    auto args = toy_search_args(dir);
    args.push_back("--seed-size");
    args.push_back("9");
    CHECK(run_cli(args).code == 2);
    CHECK(run_cli({"search", "--total-nets", "4", "--net-batch", "2", "--out", (dir / "g.json").string()}).code == 2);
    CHECK(run_cli({"search", "--precision", "16", "--dry-run"}).code == 2);
    CHECK(run_cli({"search", "--bogus"}).code == 2);
    CHECK(run_cli({}).code == 2);
  }

  TEST_CASE("help exits with 0") {
    CHECK(run_cli({"--help"}).code == 0);
  }
}

TEST_SUITE("cli eval") {
  TEST_CASE("untrained model scores near uniform") {
    const auto dir = scratch("eval0");
    const auto genome = dir / "g.json";
    std::ofstream(genome) << serialize(Genome{3, {{0, OpKind::tanh}, {1, OpKind::sigmoid}}}) << "\n";
    const auto metrics = dir / "m.json";
    const auto r = run_cli({"eval", "--genome", genome.string(), "--corpus", tiny_corpus().string(), "--epochs", "0",
                            "--batch", "8", "--bptt", "10", "--emb-dim", "8", "--hidden-dim", "8", "--init-range", "0.01", "--metrics",
                            metrics.string(), "--precision", "64"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto m = nlohmann::json::parse(slurp(metrics));
    const double vocab = m["vocab"].get<double>();
    const double ppl = m["final"]["valid_ppl"].get<double>();
    CHECK(std::fabs(ppl - vocab) / vocab < 0.05);
  }

  TEST_CASE("training beats unigram and is deterministic") {
    const auto dir = scratch("eval1");
    const auto genome = dir / "g.json";
    std::ofstream(genome) << serialize(Genome{3, {{0, OpKind::sigmoid}, {1, OpKind::tanh}}}) << "\n";
    const std::vector<std::string> args{"eval", "--genome", genome.string(), "--corpus", tiny_corpus().string(),
                                        "--epochs", "3", "--emb-dim", "16", "--hidden-dim", "16", "--batch", "8",
                                        "--bptt", "10", "--optimizer", "adam", "--lr", "0.01"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    REQUIRE_MESSAGE(a.code == 0, a.err);
    CHECK(a.out == b.out);
    std::size_t reported = 0;
    for (const auto& l : lines_of(a.out)) reported += l.rfind("epoch ", 0) == 0;
    CHECK(reported == 4);  // epochs 0..3
  }

  TEST_CASE("bad genome exits with 2") {
    const auto dir = scratch("eval_bad");
    const auto genome = dir / "g.json";
    std::ofstream(genome) << R"({"version":1,"levels":3,"nodes":[{"ancestor":2,"op":"relu"},{"ancestor":0,"op":"relu"}]})";
    const auto r = run_cli({"eval", "--genome", genome.string(), "--corpus", tiny_corpus().string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("ancestor") != std::string::npos);
  }

  TEST_CASE("missing corpus is a runtime error") {
    const auto dir = scratch("eval_missing");
    const auto genome = dir / "g.json";
    std::ofstream(genome) << serialize(Genome{2, {{0, OpKind::tanh}}});
    CHECK(run_cli({"eval", "--genome", genome.string(), "--corpus", (dir / "nowhere").string()}).code == 1);
  }
}

TEST_SUITE("cli report") {
  TEST_CASE("summary and out-of-range round") {
    const auto dir = scratch("report");
    std::ofstream(dir / "r.csv") << "round,rank,net_index,genome,weight\n"
                                 << "1,1,3,\"{\"\"version\"\":1,\"\"levels\"\":2,\"\"nodes\"\":[{\"\"ancestor\"\":0,\"\"op\"\":\"\"relu\"\"}]}\",0.75\n"
                                 << "1,2,0,\"{\"\"version\"\":1,\"\"levels\"\":2,\"\"nodes\"\":[{\"\"ancestor\"\":0,\"\"op\"\":\"\"tanh\"\"}]}\",0.25\n";
    const auto summary = run_cli({"report", "--report", (dir / "r.csv").string()});
    REQUIRE_MESSAGE(summary.code == 0, summary.err);
    const auto lines = lines_of(summary.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[1] == "1,2,1,0.75,0.25,3");
    const auto bad = run_cli({"report", "--report", (dir / "r.csv").string(), "--round", "9"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("round 9 out of range; valid rounds are 1..1") != std::string::npos);
  }
}

TEST_SUITE("cli config") {
  TEST_CASE("config file fills flags and explicit flags win") {
    const auto dir = scratch("config");
    std::ofstream(dir / "run.cfg") << "# generator settings\nlevels = 2\ncount = 4\nseed = 3\n";
    const auto from_file = run_cli({"generate", "--config", (dir / "run.cfg").string(), "--out", "-"});
    REQUIRE_MESSAGE(from_file.code == 0, from_file.err);
    CHECK(lines_of(from_file.out).size() == 4);
    const auto overridden =
        run_cli({"generate", "--config", (dir / "run.cfg").string(), "--levels", "3", "--out", "-"});
    REQUIRE(overridden.code == 0);
    for (const auto& l : lines_of(overridden.out)) CHECK(parse_genome(l).levels == 3);

    std::ofstream(dir / "bad.cfg") << "levels 2\n";
    CHECK(run_cli({"generate", "--config", (dir / "bad.cfg").string(), "--count", "1"}).code == 2);
    CHECK(run_cli({"generate", "--config", (dir / "absent.cfg").string(), "--count", "1"}).code == 2);
  }

  TEST_CASE("expand_config keeps explicit flags after file settings") {
    const auto dir = scratch("expand");
    std::ofstream(dir / "a.cfg") << "seed = 7\n";
    const auto args = cli::expand_config({"wenas", "generate", "--config=" + (dir / "a.cfg").string(), "--seed", "8"});
    const std::vector<std::string> expected{"wenas", "generate", "--seed=7", "--seed", "8"};
    CHECK(args == expected);
  }

  TEST_CASE("thread count from the environment") {
    const auto one = scratch("threads_1"), env = scratch("threads_env");
    REQUIRE(run_cli(toy_search_args(one)).code == 0);
    auto args = toy_search_args(env);
    const auto flag = std::find(args.begin(), args.end(), "--threads");
    args.erase(flag, flag + 2);
    ::setenv("WENAS_THREADS", "2", 1);
    const auto r = run_cli(args);
    ::setenv("WENAS_THREADS", "many", 1);
    const auto bad = run_cli(args);
    ::unsetenv("WENAS_THREADS");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    // Thread count is not part of the run config, so the files match byte for byte.
    const auto rel = [](std::string text, const fs::path& dir) {
      const std::string needle = dir.string();
      for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle)) text.replace(pos, needle.size(), "DIR");
      return text;
    };
    CHECK(rel(slurp(one / "genome.json"), one) == rel(slurp(env / "genome.json"), env));
    CHECK(bad.code == 2);
  }
}
