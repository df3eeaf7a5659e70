#include "wenas/cellspace.hpp"

#include <limits>
#include <json.hpp>
#include <set>

#include "wenas/error.hpp"

namespace wenas {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::tanh: return "tanh";
    case OpKind::relu: return "relu";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::identity: return "identity";
  }
  return "?";
}

OpKind parse_op(std::string_view text) {
  for (OpKind op : kAllOps) {
    if (to_string(op) == text) return op;
  }
  throw ConfigError("unknown op '" + std::string(text) + "'");
}

std::vector<std::string> validate(const Genome& g) {
  std::vector<std::string> violations;
  if (g.levels < 2) violations.push_back("levels " + std::to_string(g.levels) + " < 2");
  const std::size_t expected = g.levels >= 1 ? g.levels - 1 : 0;
  if (g.genes.size() != expected) {
    violations.push_back("gene count " + std::to_string(g.genes.size()) + " != levels - 1 = " +
                         std::to_string(expected));
  }
  for (std::size_t i = 0; i < g.genes.size(); ++i) {
    const std::size_t level = i + 1;
    if (g.genes[i].ancestor >= level) {
      violations.push_back("ancestor " + std::to_string(g.genes[i].ancestor) + " >= level " + std::to_string(level));
    }
    if (static_cast<unsigned>(g.genes[i].op) >= kAllOps.size()) {
      violations.push_back("unknown op at level " + std::to_string(level));
    }
  }
  return violations;
}

void require_valid(const Genome& g) {
  const auto violations = validate(g);
  if (violations.empty()) return;
  std::string msg = "invalid genome:";
  for (const auto& v : violations) msg += " " + v + ";";
  msg.pop_back();
  throw ConfigError(msg);
}

Genome random_genome(std::uint32_t levels, Rng& rng) {
  if (levels < 2) throw ConfigError("genome needs at least 2 levels, got " + std::to_string(levels));
  Genome g;
  g.levels = levels;
  g.genes.reserve(levels - 1);
  std::uniform_int_distribution<int> pick_op(0, static_cast<int>(kAllOps.size()) - 1);
  for (std::uint32_t level = 1; level < levels; ++level) {
    std::uniform_int_distribution<std::uint32_t> pick_ancestor(0, level - 1);
    NodeGene gene;
    gene.ancestor = pick_ancestor(rng);
    gene.op = kAllOps[static_cast<std::size_t>(pick_op(rng))];
    g.genes.push_back(gene);
  }
  return g;
}

std::vector<Genome> random_pool(std::size_t count, std::uint32_t levels, Rng& rng, bool dedupe) {
  if (levels < 2) throw ConfigError("genome needs at least 2 levels, got " + std::to_string(levels));
  if (dedupe) {
    // An overflowing space is certainly larger than any requested pool.
    std::uint64_t space = std::numeric_limits<std::uint64_t>::max();
    try {
      space = search_space_size(levels);
    } catch (const ConfigError&) {
    }
    if (count > space) {
      throw ConfigError("cannot draw " + std::to_string(count) + " distinct genomes from a space of " +
                        std::to_string(space) + " (levels " + std::to_string(levels) + ")");
    }
  }
  std::vector<Genome> pool;
  pool.reserve(count);
  std::set<Genome> seen;
  while (pool.size() < count) {
    Genome g = random_genome(levels, rng);
    if (dedupe && !seen.insert(g).second) continue;
    pool.push_back(std::move(g));
  }
  return pool;
}

std::uint64_t search_space_size(std::uint32_t levels) {
  if (levels < 2) throw ConfigError("genome needs at least 2 levels, got " + std::to_string(levels));
  std::uint64_t total = 1;
  for (std::uint64_t l = 1; l < levels; ++l) {
    const std::uint64_t choices = 4 * l;
    if (total > std::numeric_limits<std::uint64_t>::max() / choices) {
      throw ConfigError("search space for " + std::to_string(levels) + " levels overflows 64 bits");
    }
    total *= choices;
  }
  return total;
}

std::vector<Genome> enumerate_genomes(std::uint32_t levels) {
  const std::uint64_t total = search_space_size(levels);
  std::vector<Genome> out;
  out.reserve(total);
  Genome g;
  g.levels = levels;
  g.genes.assign(levels - 1, NodeGene{});
  // Odometer over (ancestor, op) per level, last level fastest.
  while (true) {
    out.push_back(g);
    std::size_t i = g.genes.size();
    while (i-- > 0) {
      NodeGene& gene = g.genes[i];
      const auto op_index = static_cast<std::size_t>(gene.op);
      if (op_index + 1 < kAllOps.size()) {
        gene.op = kAllOps[op_index + 1];
        break;
      }
      gene.op = kAllOps[0];
      if (gene.ancestor + 1 <= i) {
        ++gene.ancestor;
        break;
      }
      gene.ancestor = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

std::string serialize(const Genome& g) {
  ordered_json j;
  j["version"] = 1;
  j["levels"] = g.levels;
  ordered_json nodes = ordered_json::array();
  for (const auto& gene : g.genes) {
    ordered_json n;
    n["ancestor"] = gene.ancestor;
    n["op"] = std::string(to_string(gene.op));
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  return j.dump();
}

namespace {

constexpr std::size_t kNoPosition = ParseError::npos;

std::uint32_t read_index(const ordered_json& v, const std::string& where) {
  if (!v.is_number_unsigned()) throw ParseError(where + ": expected a nonnegative integer", kNoPosition);
  const auto x = v.get<std::uint64_t>();
  if (x > std::numeric_limits<std::uint32_t>::max()) throw ParseError(where + ": value out of range", kNoPosition);
  return static_cast<std::uint32_t>(x);
}

}  // namespace

Genome parse_genome(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text.begin(), text.end());
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string("malformed genome JSON: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw ParseError("genome must be a JSON object", 0);
  for (const auto& [key, _] : j.items()) {
    if (key != "version" && key != "levels" && key != "nodes" && key != "run_config") {
      throw ParseError("unexpected key '" + key + "'", kNoPosition);
    }
  }
  if (!j.contains("version") || read_index(j["version"], "version") != 1) {
    throw ParseError("unsupported or missing genome version (expected 1)", kNoPosition);
  }
  if (!j.contains("levels")) throw ParseError("missing key 'levels'", kNoPosition);
  if (!j.contains("nodes") || !j["nodes"].is_array()) throw ParseError("missing array 'nodes'", kNoPosition);

  Genome g;
  g.levels = read_index(j["levels"], "levels");
  const auto& nodes = j["nodes"];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const auto& n = nodes[i];
    if (!n.is_object() || !n.contains("ancestor") || !n.contains("op") || n.size() != 2) {
      throw ParseError(where + ": expected {\"ancestor\":..,\"op\":..}", kNoPosition);
    }
    if (!n["op"].is_string()) throw ParseError(where + ".op: expected a string", kNoPosition);
    NodeGene gene;
    gene.ancestor = read_index(n["ancestor"], where + ".ancestor");
    try {
      gene.op = parse_op(n["op"].get<std::string>());
    } catch (const ConfigError& e) {
      throw ParseError(where + ".op: " + e.what(), kNoPosition);
    }
    g.genes.push_back(gene);
  }
  if (auto violations = validate(g); !violations.empty()) {
    std::string msg = "genome fails validation:";
    for (const auto& v : violations) msg += " " + v + ";";
    msg.pop_back();
    throw ParseError(msg, kNoPosition);
  }
  return g;
}

std::string describe(const Genome& g) {
  std::string out = "[";
  for (std::size_t i = 0; i < g.genes.size(); ++i) {
    if (i) out += ", ";
    out += "('" + std::string(to_string(g.genes[i].op)) + "', " + std::to_string(g.genes[i].ancestor) + ")";
  }
  return out + "]";
}

}  // namespace wenas
