#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wenas/cellspace.hpp"
#include "wenas/cli.hpp"
#include "wenas/error.hpp"
#include "wenas/lmdata.hpp"
#include "wenas/search.hpp"

namespace py = pybind11;
using namespace wenas;

namespace {

std::vector<std::int32_t> token_ids(const std::string& text) { return tokenize_text(text).ids; }

py::tuple run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "wenas");
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = cli::run(std::move(args), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

std::string search_text(const std::string& text, const SearchConfig& cfg) {
  cfg.validate();
  const auto corpus = tokenize_text(text);
  py::gil_scoped_release release;
  return report_json(run_search<float>(cfg, corpus.ids, corpus.vocab.size()));
}

}  // namespace

PYBIND11_MODULE(wenas, m) {
  m.doc() = "Recurrent cell search with weighted networks";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<NodeGene>(m, "NodeGene")
      .def(py::init([](std::uint32_t ancestor, const std::string& op) { return NodeGene{ancestor, parse_op(op)}; }),
           py::arg("ancestor"), py::arg("op"))
      .def_readwrite("ancestor", &NodeGene::ancestor)
      .def_property(
          "op", [](const NodeGene& g) { return std::string(to_string(g.op)); },
          [](NodeGene& g, const std::string& op) { g.op = parse_op(op); })
      .def("__eq__", [](const NodeGene& a, const NodeGene& b) { return a == b; });

  py::class_<Genome>(m, "Genome")
      .def(py::init([](std::uint32_t levels, std::vector<NodeGene> genes) { return Genome{levels, std::move(genes)}; }),
           py::arg("levels"), py::arg("genes"))
      .def_readwrite("levels", &Genome::levels)
      .def_readwrite("genes", &Genome::genes)
      .def("validate", [](const Genome& g) { return validate(g); })
      .def("to_json", [](const Genome& g) { return serialize(g); })
      .def_static("from_json", [](const std::string& text) { return parse_genome(text); })
      .def("__eq__", [](const Genome& a, const Genome& b) { return a == b; })
      .def("__hash__", [](const Genome& g) { return py::hash(py::str(serialize(g))); })
      .def("__repr__", [](const Genome& g) { return describe(g); });

  m.def("random_genome", [](std::uint32_t levels, std::uint64_t seed) {
    Rng rng(seed);
    return random_genome(levels, rng);
  }, py::arg("levels"), py::arg("seed"));
  m.def("random_pool", [](std::size_t count, std::uint32_t levels, std::uint64_t seed, bool dedupe) {
    Rng rng(seed);
    return random_pool(count, levels, rng, dedupe);
  }, py::arg("count"), py::arg("levels"), py::arg("seed"), py::arg("dedupe") = true);
  m.def("search_space_size", &search_space_size, py::arg("levels"));
  m.def("enumerate_genomes", &enumerate_genomes, py::arg("levels"));

  m.def("tokenize", &token_ids, py::arg("text"), "Word-level token ids with <unk>=0 and <eos>=1");
  m.def("perplexity", &perplexity, py::arg("total_loss"), py::arg("tokens"));

  py::class_<SearchConfig>(m, "SearchConfig")
      .def(py::init<>())
      .def_readwrite("total_networks", &SearchConfig::total_networks)
      .def_readwrite("net_batch", &SearchConfig::net_batch)
      .def_readwrite("seed_size", &SearchConfig::seed_size)
      .def_readwrite("epochs_per_round", &SearchConfig::epochs_per_round)
      .def_readwrite("seed", &SearchConfig::seed)
      .def_readwrite("batch_size", &SearchConfig::batch_size)
      .def_readwrite("bptt", &SearchConfig::bptt)
      .def_readwrite("dry_run", &SearchConfig::dry_run)
      .def_property(
          "levels", [](const SearchConfig& c) { return c.model.levels; },
          [](SearchConfig& c, std::uint32_t v) { c.model.levels = v; })
      .def_property(
          "hidden_dim", [](const SearchConfig& c) { return c.model.hidden_dim; },
          [](SearchConfig& c, std::size_t v) { c.model.hidden_dim = c.model.embedding_dim = v; });

  m.def("search", &search_text, py::arg("text"), py::arg("config"),
        "Runs a search over a word corpus and returns the JSON report");
  m.def("run_cli", &run_cli, py::arg("args"), "Runs the command-line tool in-process; returns (code, stdout, stderr)");
}
