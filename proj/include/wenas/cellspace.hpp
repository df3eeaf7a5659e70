#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wenas/autodiff/ops.hpp"
#include "wenas/random.hpp"

namespace wenas {

/// Node activation of a recurrent cell.
using OpKind = ad::Activation;

inline constexpr std::array<OpKind, 4> kAllOps{OpKind::tanh, OpKind::relu, OpKind::sigmoid, OpKind::identity};

std::string_view to_string(OpKind op);
/// Throws ConfigError("unknown op ...") for anything outside kAllOps.
OpKind parse_op(std::string_view text);

/// Intermediate node i computes op(W_i * s_ancestor), ancestor < i.
struct NodeGene {
  std::uint32_t ancestor = 0;
  OpKind op = OpKind::tanh;

  friend bool operator==(const NodeGene&, const NodeGene&) = default;
  friend auto operator<=>(const NodeGene& a, const NodeGene& b) {
    if (auto c = a.ancestor <=> b.ancestor; c != 0) return c;
    return static_cast<int>(a.op) <=> static_cast<int>(b.op);
  }
};

/// A recurrent cell: `levels` nodes in total, node 0 being the fixed
/// input-blending node and genes[i-1] describing node i.
struct Genome {
  std::uint32_t levels = 2;
  std::vector<NodeGene> genes;

  /// Lexicographic over (ancestor, op index); used for tie-breaking.
  friend auto operator<=>(const Genome&, const Genome&) = default;
  friend bool operator==(const Genome&, const Genome&) = default;
};

/// Every ancestor-bound and length violation; empty for a valid genome.
std::vector<std::string> validate(const Genome& g);
/// Throws ConfigError listing all violations.
void require_valid(const Genome& g);

Genome random_genome(std::uint32_t levels, Rng& rng);

/// T genomes. With `dedupe` the pool is pairwise distinct (rejection
/// resampling); without it the draw matches the plain generation loop.
std::vector<Genome> random_pool(std::size_t count, std::uint32_t levels, Rng& rng, bool dedupe = true);

/// prod_{l=1}^{L-1} (4 l). Throws ConfigError if it does not fit 64 bits.
std::uint64_t search_space_size(std::uint32_t levels);

/// Every genome with `levels` nodes in lexicographic order.
std::vector<Genome> enumerate_genomes(std::uint32_t levels);

/// Canonical single-line JSON:
/// {"version":1,"levels":L,"nodes":[{"ancestor":a,"op":"name"},...]}
std::string serialize(const Genome& g);
/// Parses and validates. Unknown top-level keys other than "run_config"
/// are rejected. Throws ParseError.
Genome parse_genome(std::string_view text);

/// Human-readable "[('relu', 0), ('tanh', 1)]" form.
std::string describe(const Genome& g);

}  // namespace wenas
