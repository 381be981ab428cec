#include <memory>
#include <optional>
#include <string>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ftg/chart.hpp"
#include "ftg/grammar.hpp"
#include "ftg/hpsg.hpp"
#include "ftg/render.hpp"
#include "ftg/text.hpp"

namespace py = pybind11;
using namespace ftg;

namespace {

using GrammarPtr = std::shared_ptr<Grammar>;

SortId sort_of(const Grammar& g, const std::string& name) {
  auto id = g.lattice.find(name);
  if (!id) throw py::key_error("unknown sort '" + name + "'");
  return *id;
}

// JSON text of the unified structure, or None on failure.
std::optional<std::string> unify_terms(const Grammar& g, const std::string& a, const std::string& b, bool rules,
                                       bool avm) {
  TermTemplate ta = parse_term(a, g.lattice, "<term 1>");
  TermTemplate tb = parse_term(b, g.lattice, "<term 2>");
  TermStore store(g.lattice);
  if (rules) store.engine().install_rules(g.rules);
  TagFrame frame;
  auto na = instantiate(store, ta, frame);
  if (!na) return std::nullopt;
  TagFrame other;
  auto nb = instantiate(store, tb, other);
  if (!nb || !store.unify(*na, *nb)) return std::nullopt;
  return avm ? render_avm(store, *na) : export_json(store, *na);
}

nlohmann::ordered_json result_json(const ParseResult& r) {
  nlohmann::ordered_json parses = nlohmann::ordered_json::array();
  nlohmann::ordered_json avms = nlohmann::ordered_json::array();
  for (NodeRef p : r.parses) {
    parses.push_back(to_json(*r.store, p));
    avms.push_back(render_avm(*r.store, p));
  }
  return {{"mode", to_string(r.mode)},
          {"tokens", r.tokens},
          {"parse_count", r.complete_parses},
          {"parses", parses},
          {"avm", avms},
          {"metrics", r.metrics.to_json()}};
}

ParseOptions options(const std::string& mode, std::size_t max_parses, std::function<void(std::string)> trace) {
  ParseOptions o;
  auto m = parse_mode(mode);
  if (!m) throw py::value_error("mode must be 'direct' or 'gat'");
  o.mode = *m;
  o.max_parses = max_parses;
  if (trace) {
    o.trace = [trace](std::string_view line) {
      py::gil_scoped_acquire gil;
      trace(std::string(line));
    };
  }
  return o;
}

std::string parse_sentence(const GrammarPtr& g, const std::string& sentence, const std::string& mode,
                           std::size_t max_parses, std::function<void(std::string)> trace) {
  ParseOptions o = options(mode, max_parses, std::move(trace));
  const auto tokens = tokenize(sentence);
  py::gil_scoped_release nogil;
  return result_json(parse(tokens, *g, o)).dump();
}

std::string compare_sentence(const GrammarPtr& g, const std::string& sentence, std::size_t max_parses) {
  ParseOptions o = options("direct", max_parses, nullptr);
  const auto tokens = tokenize(sentence);
  py::gil_scoped_release nogil;
  ModeComparison c = compare_modes(tokens, *g, o);
  nlohmann::ordered_json out{{"tokens", tokens},
                             {"equal_parse_sets", c.equal_parse_sets},
                             {"direct", result_json(c.direct)},
                             {"gat", result_json(c.gat)}};
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_ftg, m) {
  m.doc() = "Typed feature structure grammar engine";

  static py::exception<GrammarError> grammar_error(m, "GrammarError", PyExc_ValueError);
  static py::exception<UnknownWord> unknown_word(m, "UnknownWord", PyExc_KeyError);
  py::register_exception<FiringBudgetExceeded>(m, "FiringBudgetExceeded", PyExc_RuntimeError);
  py::register_exception<EdgeBudgetExceeded>(m, "EdgeBudgetExceeded", PyExc_RuntimeError);
  py::register_exception<NodeBudgetExceeded>(m, "NodeBudgetExceeded", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const GrammarError& e) {
      grammar_error(e.render().c_str());
    } catch (const UnknownWord& e) {
      PyErr_SetObject(unknown_word.ptr(), py::make_tuple(e.what(), e.token(), e.position()).ptr());
    }
  });

  py::class_<Grammar, GrammarPtr>(m, "Grammar")
      .def_property_readonly("sort_count", [](const Grammar& g) { return g.lattice.size(); })
      .def_property_readonly("rule_names",
                             [](const Grammar& g) {
                               std::vector<std::string> out;
                               for (const auto& r : g.rules) out.push_back(r->name);
                               return out;
                             })
      .def_property_readonly("lexeme_count", &Grammar::lexeme_count)
      .def_property_readonly("schema_names",
                             [](const Grammar& g) {
                               std::vector<std::string> out;
                               for (const auto& s : g.schemata) out.push_back(s.name);
                               return out;
                             })
      .def_property_readonly("warnings",
                             [](const Grammar& g) {
                               std::vector<std::string> out;
                               for (const auto& w : g.warnings) out.push_back(w.message);
                               return out;
                             })
      .def("has_sort", [](const Grammar& g, const std::string& s) { return g.lattice.find(s).has_value(); })
      .def(
          "glb",
          [](const Grammar& g, const std::string& a, const std::string& b) -> std::optional<std::string> {
            SortId m = g.lattice.glb(sort_of(g, a), sort_of(g, b));
            if (m == SortLattice::bottom) return std::nullopt;
            return g.lattice.name(m);
          },
          py::arg("a"), py::arg("b"))
      .def(
          "leq", [](const Grammar& g, const std::string& a, const std::string& b) {
            return g.lattice.leq(sort_of(g, a), sort_of(g, b));
          },
          py::arg("a"), py::arg("b"))
      .def("_unify", &unify_terms, py::arg("a"), py::arg("b"), py::arg("rules") = true, py::arg("avm") = false)
      .def("_parse", &parse_sentence, py::arg("sentence"), py::arg("mode") = "direct", py::arg("max_parses") = 16,
           py::arg("trace") = nullptr)
      .def("_compare", &compare_sentence, py::arg("sentence"), py::arg("max_parses") = 16);

  m.def(
      "load_grammar",
      [](const std::string& text, const std::string& name) {
        return std::make_shared<Grammar>(load_grammar(text, name));
      },
      py::arg("text"), py::arg("name") = "<grammar>");
  m.def("load_grammar_file",
        [](const std::string& path) { return std::make_shared<Grammar>(load_grammar_file(path)); },
        py::arg("path"));
  // Non-owning: the sample grammar is a process-lifetime static.
  m.def("sample_grammar", [] { return GrammarPtr(const_cast<Grammar*>(&sample_grammar()), [](Grammar*) {}); });
  m.def("sample_grammar_source", [] { return std::string(sample_grammar_source()); });
  m.def("tokenize", &tokenize, py::arg("sentence"));
  m.def("normalize_word", &normalize_word, py::arg("word"));
}
