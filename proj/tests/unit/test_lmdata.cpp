#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "wenas/error.hpp"
#include "wenas/lmdata.hpp"

using namespace wenas;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("wenas_lmdata_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::vector<std::int32_t> iota_stream(std::size_t n) {
  std::vector<std::int32_t> s(n);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

}  // namespace

TEST_SUITE("vocab") {
  TEST_CASE("first-occurrence order with specials") {
    const auto c = tokenize_text("a b a\n");
    CHECK(c.vocab.size() == 4);
    CHECK(c.vocab.token(0) == "<unk>");
    CHECK(c.vocab.token(1) == "<eos>");
    CHECK(c.ids == std::vector<std::int32_t>{2, 3, 2, 1});
  }

  TEST_CASE("unseen tokens map to unk with a fixed vocab") {
    const auto train = tokenize_text("a b\n");
    const auto valid = tokenize_text("b z\n", &train.vocab);
    CHECK(valid.ids == std::vector<std::int32_t>{3, Vocab::kUnk, Vocab::kEos});
    CHECK(valid.vocab.size() == train.vocab.size());
  }

  TEST_CASE("character mode") {
    const auto c = tokenize_text("ab a\n", nullptr, Tokenization::character);
    // a, b, space, a, <eos>
    CHECK(c.ids.size() == 5);
    CHECK(detokenize(c.ids, c.vocab, Tokenization::character) == "ab a\n");
  }

  TEST_CASE("detokenize normalizes whitespace") {
    const std::string text = "the  cat\tsat\n\non it\n";
    const auto c = tokenize_text(text);
    CHECK(detokenize(c.ids, c.vocab) == "the cat sat\n\non it\n");
    const auto again = tokenize_text(detokenize(c.ids, c.vocab));
    CHECK(again.ids == c.ids);
  }
}

TEST_SUITE("corpus files") {
  TEST_CASE("directory splits share the train vocabulary") {
    const auto dir = scratch_dir("splits");
    write(dir / "train.txt", "x y z\nx y\n");
    write(dir / "valid.txt", "y w\n");
    const auto s = load_corpus_dir(dir);
    CHECK(s.train.size() == 7);
    CHECK(s.valid == std::vector<std::int32_t>{s.vocab.id("y"), Vocab::kUnk, Vocab::kEos});
    CHECK(s.test.empty());
    const auto again = load_corpus_dir(dir);
    CHECK(again.train == s.train);
  }

  TEST_CASE("errors") {
    const auto dir = scratch_dir("errors");
    CHECK_THROWS_AS(load_corpus(dir / "missing.txt"), std::runtime_error);
    write(dir / "empty.txt", "  \n");
    // A blank line still yields an <eos>; only a file with no lines is empty.
    write(dir / "void.txt", "");
    CHECK_THROWS_AS(load_corpus(dir / "void.txt"), ConfigError);
  }
}

TEST_SUITE("batching") {
  TEST_CASE("contiguous segments") {
    const auto bc = batchify(iota_stream(10), 2);
    CHECK(bc.steps == 5);
    CHECK(bc.at(1, 0) == 5);
    CHECK(batchify(iota_stream(11), 2).data.size() == 10);
  }

  TEST_CASE("hand-tiled windows") {
    const auto windows = bptt_windows(batchify(iota_stream(10), 2), 2);
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].inputs == std::vector<std::int32_t>{0, 1, 5, 6});
    CHECK(windows[0].targets == std::vector<std::int32_t>{1, 2, 6, 7});
    CHECK(windows[1].inputs == std::vector<std::int32_t>{2, 3, 7, 8});
    CHECK(windows[1].targets == std::vector<std::int32_t>{3, 4, 8, 9});
    CHECK(windows[0].targets_step_major() == std::vector<std::int32_t>{1, 6, 2, 7});
    CHECK(windows[0].inputs_at(1) == std::vector<std::int32_t>{1, 6});
  }

  TEST_CASE("final short window") {
    const auto windows = bptt_windows(batchify(iota_stream(24), 2), 5);
    REQUIRE(windows.size() == 3);
    CHECK(windows.back().length == 1);
  }

  TEST_CASE("too short") {
    CHECK_THROWS_AS(bptt_windows(batchify(iota_stream(10), 2), 5), ConfigError);
    CHECK_THROWS_AS(batchify(iota_stream(1), 2), ConfigError);
  }

  TEST_CASE("every kept token after the first of a segment is a target exactly once") {
    for (std::size_t n : {97u, 200u, 513u}) {
      for (std::size_t batch : {1u, 3u, 7u}) {
        for (std::size_t bptt : {1u, 4u, 9u}) {
          const auto bc = batchify(iota_stream(n), batch);
          if (bc.steps < bptt + 1) continue;
          std::map<std::int32_t, int> seen;
          for (const auto& w : bptt_windows(bc, bptt)) {
            for (auto t : w.targets) ++seen[t];
          }
          CHECK(seen.size() == batch * (bc.steps - 1));
          for (std::size_t r = 0; r < batch; ++r) {
            for (std::size_t s = 1; s < bc.steps; ++s) CHECK(seen[bc.at(r, s)] == 1);
          }
        }
      }
    }
  }
}

TEST_SUITE("perplexity") {
  TEST_CASE("definition") {
    CHECK(perplexity(0.0, 10) == 1.0);
    CHECK(perplexity(5 * std::log(10.0), 5) == doctest::Approx(10.0));
    CHECK_THROWS_AS(perplexity(1.0, 0), ConfigError);
  }

  TEST_CASE("unigram baseline is at most V on its own training data") {
    const auto c = tokenize_text("a a a b c a b\nd a\n");
    const double ppl = unigram_perplexity(c.ids, c.ids, c.vocab.size(), 0.0);
    CHECK(ppl <= static_cast<double>(c.vocab.size()));
    // Uniform data gives exactly V.
    const std::vector<std::int32_t> uniform{0, 1, 2, 3};
    CHECK(unigram_perplexity(uniform, uniform, 4, 0.0) == doctest::Approx(4.0));
  }
}
