#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "wenas/random.hpp"

namespace wenas::testing {

/// Order-3 Markov chain over 16 symbols written as words "s00".."s15",
/// 32 per line. The next symbol copies a per-symbol successor of the
/// previous token, or of the token three back, or is uniform noise.
inline std::string markov3_text(std::size_t bytes, std::uint64_t seed, std::uint64_t table_seed = 99) {
  constexpr int kSymbols = 16;
  Rng table_rng(table_seed);
  std::array<int, kSymbols> next_of_last{};
  std::array<int, kSymbols> next_of_third{};
  for (int s = 0; s < kSymbols; ++s) {
    next_of_last[s] = static_cast<int>(table_rng() % kSymbols);
    next_of_third[s] = static_cast<int>(table_rng() % kSymbols);
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any(0, kSymbols - 1);
  std::array<int, 3> ctx{any(rng), any(rng), any(rng)};  // ctx[2] is the latest
  std::string text;
  std::size_t on_line = 0;
  while (text.size() < bytes) {
    const double u = coin(rng);
    const int next = u < 0.5 ? next_of_last[ctx[2]] : u < 0.8 ? next_of_third[ctx[0]] : any(rng);
    ctx = {ctx[1], ctx[2], next};
    char word[8];
    std::snprintf(word, sizeof word, "s%02d", next);
    if (on_line > 0) text += ' ';
    text += word;
    if (++on_line == 32) {
      text += '\n';
      on_line = 0;
    }
  }
  if (on_line > 0) text += '\n';
  return text;
}

/// Writes train/valid/test splits of the chain into `dir`.
inline void write_markov3_corpus(const std::filesystem::path& dir, std::size_t train_bytes, std::size_t eval_bytes,
                                 std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const char* names[] = {"train.txt", "valid.txt", "test.txt"};
  for (int i = 0; i < 3; ++i) {
    std::ofstream out(dir / names[i], std::ios::binary);
    out << markov3_text(i == 0 ? train_bytes : eval_bytes, child_seed(seed, static_cast<std::uint64_t>(i)));
  }
}

}  // namespace wenas::testing
