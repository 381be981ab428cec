#include "ftg/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "ftg/chart.hpp"
#include "ftg/grammar.hpp"
#include "ftg/hpsg.hpp"
#include "ftg/render.hpp"
#include "ftg/text.hpp"

namespace ftg {

namespace {

using json = nlohmann::ordered_json;

bool use_color(bool tty) {
  const char* env = std::getenv("FTG_COLOR");
  const std::string mode = env ? env : "auto";
  if (mode == "never") return false;
  if (mode == "always") return true;
  return tty;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool color;
};

std::optional<Grammar> load(const std::string& path, const Context& ctx) {
  try {
    Grammar g = load_grammar_file(path);
    for (const auto& w : g.warnings) ctx.err << format_diagnostic(w, path, "", ctx.color);
    return g;
  } catch (const GrammarError& e) {
    ctx.err << e.render(ctx.color);
    return std::nullopt;
  }
}

int cmd_check(const std::string& path, const Context& ctx) {
  auto g = load(path, ctx);
  if (!g) return exit_input_error;
  ctx.out << path << ": " << g->lattice.size() << " sorts, " << g->rules.size() << " rules, " << g->lexeme_count()
          << " lexemes, " << g->schemata.size() << " schemata\n";
  return exit_ok;
}

int cmd_glb(const std::string& path, const std::string& a, const std::string& b, const Context& ctx) {
  auto g = load(path, ctx);
  if (!g) return exit_input_error;
  auto sa = g->lattice.find(a);
  auto sb = g->lattice.find(b);
  for (const auto& [name, id] : {std::pair{a, sa}, std::pair{b, sb}}) {
    if (!id) {
      ctx.err << "error: unknown sort '" << name << "'\n";
      return exit_input_error;
    }
  }
  SortId r = g->lattice.glb(*sa, *sb);
  ctx.out << g->lattice.name(r) << '\n';
  return r == SortLattice::bottom ? exit_no_result : exit_ok;
}

struct UnifyOptions {
  std::string grammar;
  std::string left;
  std::string right;
  bool json = false;
  bool pretty = false;
  bool trace = false;
};

int cmd_unify(const UnifyOptions& o, const Context& ctx) {
  auto g = load(o.grammar, ctx);
  if (!g) return exit_input_error;
  TermTemplate left;
  TermTemplate right;
  try {
    left = parse_term(o.left, g->lattice, "<term 1>");
    right = parse_term(o.right, g->lattice, "<term 2>");
  } catch (const GrammarError& e) {
    ctx.err << e.render(ctx.color);
    return exit_input_error;
  }
  TermStore store(g->lattice);
  store.engine().install_rules(g->rules);
  std::ostream& trace_out = o.json ? ctx.err : ctx.out;
  if (o.trace) store.engine().set_trace([&](std::string_view line) { trace_out << line << '\n'; });
  std::optional<NodeRef> a;
  bool ok = false;
  try {
    a = instantiate(store, left);
    auto b = a ? instantiate(store, right) : std::nullopt;
    ok = b && store.unify(*a, *b);
  } catch (const FiringBudgetExceeded& e) {
    ctx.err << "error: " << e.what() << '\n';
    return exit_input_error;
  }
  if (!ok) {
    ctx.out << (o.json ? "null" : "FAIL") << '\n';
    return exit_no_result;
  }
  if (o.json)
    ctx.out << export_json(store, *a) << '\n';
  else
    ctx.out << render_avm(store, *a, o.pretty) << '\n';
  return exit_ok;
}

struct ParseCommand {
  std::string grammar;
  std::string sentence;
  std::string file;
  std::string mode = "direct";
  bool compare = false;
  bool json = false;
  bool metrics = false;
  bool trace = false;
  bool pretty = false;
  std::size_t max_parses = 16;
  std::size_t jobs = 1;
};

struct Sentence {
  std::string text;
  bool expect_reject = false;
};

struct SentenceOutput {
  std::string text;    // human-readable block (includes trace lines)
  std::string errors;  // diagnostics and, under --json, trace lines
  json doc;
  int status = exit_ok;  // per-sentence: ok, no_result or input_error
};

json parses_json(const ParseResult& r) {
  json parses = json::array();
  for (NodeRef root : r.parses) parses.push_back(to_json(*r.store, root));
  return parses;
}

void write_parses(std::ostream& os, const ParseResult& r, bool pretty) {
  os << "parses: " << r.complete_parses;
  if (r.complete_parses > r.parses.size()) os << " (showing " << r.parses.size() << ")";
  os << '\n';
  for (std::size_t i = 0; i < r.parses.size(); ++i)
    os << '[' << i + 1 << "] " << render_avm(*r.store, r.parses[i], pretty) << '\n';
}

const std::vector<std::pair<const char*, std::uint64_t ParseMetrics::*>> metric_fields = {
    {"edges_created", &ParseMetrics::edges_created},
    {"combinations_attempted", &ParseMetrics::combinations_attempted},
    {"unification_failures", &ParseMetrics::unification_failures},
    {"constraints_fired", &ParseMetrics::constraints_fired},
    {"suspensions_created", &ParseMetrics::suspensions_created},
    {"posthoc_rejections", &ParseMetrics::posthoc_rejections},
};

void write_metrics(std::ostream& os, const ParseMetrics& m) {
  for (const auto& [name, field] : metric_fields) os << "  " << std::left << std::setw(24) << name << m.*field << '\n';
  os << "  " << std::left << std::setw(24) << "min_failure_span" << m.min_failure_span << '\n';
  os << "  " << std::left << std::setw(24) << "min_rejection_span" << m.min_rejection_span << '\n';
}

void write_comparison(std::ostream& os, const ParseMetrics& d, const ParseMetrics& g) {
  os << std::left << std::setw(24) << "metric" << std::right << std::setw(10) << "direct" << std::setw(10) << "gat"
     << '\n';
  for (const auto& [name, field] : metric_fields)
    os << std::left << std::setw(24) << name << std::right << std::setw(10) << d.*field << std::setw(10) << g.*field
       << '\n';
  os << std::left << std::setw(24) << "min_failure_span" << std::right << std::setw(10) << d.min_failure_span
     << std::setw(10) << g.min_failure_span << '\n';
  os << std::left << std::setw(24) << "min_rejection_span" << std::right << std::setw(10) << d.min_rejection_span
     << std::setw(10) << g.min_rejection_span << '\n';
}

SentenceOutput run_sentence(const Grammar& g, const Sentence& s, const ParseCommand& cmd) {
  SentenceOutput res;
  std::ostringstream text;
  std::ostringstream trace;
  const std::vector<std::string> tokens = tokenize(s.text);
  res.doc["sentence"] = s.text;
  res.doc["tokens"] = tokens;
  if (!cmd.file.empty()) res.doc["expected"] = s.expect_reject ? "reject" : "accept";
  text << "sentence: " << s.text << (s.expect_reject ? "  (expected: reject)" : "") << '\n';

  ParseOptions po;
  po.mode = *parse_mode(cmd.mode);
  po.max_parses = cmd.max_parses;
  if (cmd.trace) po.trace = [&](std::string_view line) { trace << line << '\n'; };

  bool parsed = false;
  try {
    if (cmd.compare) {
      ModeComparison mc = compare_modes(tokens, g, po);
      parsed = mc.direct.complete_parses > 0 && mc.equal_parse_sets;
      res.doc["equal_parse_sets"] = mc.equal_parse_sets;
      for (const ParseResult* r : {&mc.direct, &mc.gat}) {
        res.doc[std::string(to_string(r->mode))] = {
            {"parse_count", r->complete_parses}, {"parses", parses_json(*r)}, {"metrics", r->metrics.to_json()}};
      }
      write_comparison(text, mc.direct.metrics, mc.gat.metrics);
      text << "parse sets equal: " << (mc.equal_parse_sets ? "true" : "false") << '\n';
      write_parses(text, mc.direct, cmd.pretty);
    } else {
      ParseResult r = parse(tokens, g, po);
      parsed = r.complete_parses > 0;
      res.doc["mode"] = to_string(r.mode);
      res.doc["parse_count"] = r.complete_parses;
      res.doc["parses"] = parses_json(r);
      if (cmd.metrics) res.doc["metrics"] = r.metrics.to_json();
      write_parses(text, r, cmd.pretty);
      if (cmd.metrics) {
        text << "metrics (" << to_string(r.mode) << "):\n";
        write_metrics(text, r.metrics);
      }
    }
  } catch (const std::exception& e) {
    // UnknownWord, empty sentence, firing or edge budget.
    res.errors = "error: " + std::string(e.what()) + " in \"" + s.text + "\"\n";
    res.doc["error"] = e.what();
    res.status = exit_input_error;
  }
  if (res.status != exit_input_error) {
    const bool as_expected = parsed != s.expect_reject;
    res.status = as_expected ? exit_ok : exit_no_result;
  }
  if (cmd.json) {
    res.errors = trace.str() + res.errors;
    res.text.clear();
  } else {
    res.text = trace.str() + text.str();
  }
  return res;
}

std::optional<std::vector<Sentence>> read_sentences(const std::string& path, const Context& ctx) {
  std::ifstream in(path);
  if (!in) {
    ctx.err << path << ": error: cannot read file: " << std::strerror(errno) << '\n';
    return std::nullopt;
  }
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    Sentence s;
    if (line[first] == '*') {
      s.expect_reject = true;
      first = line.find_first_not_of(" \t\r", first + 1);
      if (first == std::string::npos) continue;
    }
    auto last = line.find_last_not_of(" \t\r");
    s.text = line.substr(first, last - first + 1);
    out.push_back(std::move(s));
  }
  return out;
}

int cmd_parse(const ParseCommand& cmd, const Context& ctx) {
  auto g = load(cmd.grammar, ctx);
  if (!g) return exit_input_error;
  std::vector<Sentence> sentences;
  if (!cmd.file.empty()) {
    auto read = read_sentences(cmd.file, ctx);
    if (!read) return exit_input_error;
    sentences = std::move(*read);
  } else {
    sentences.push_back({cmd.sentence, false});
  }

  std::vector<SentenceOutput> results(sentences.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(cmd.jobs, sentences.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < sentences.size();) results[i] = run_sentence(*g, sentences[i], cmd);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  int status = exit_ok;
  json docs = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    ctx.err << r.errors;
    if (cmd.json) {
      docs.push_back(r.doc);
    } else {
      if (i) ctx.out << '\n';
      ctx.out << r.text;
    }
    status = std::max(status, r.status);
  }
  if (cmd.json) ctx.out << (cmd.file.empty() ? docs.front() : docs).dump() << '\n';
  return status;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool err_is_tty) {
  const Context ctx{out, err, use_color(err_is_tty)};
  CLI::App app{"Typed feature structure grammar engine", "ftg"};
  app.require_subcommand(1);

  std::string check_path;
  auto* check = app.add_subcommand("check", "Load a grammar and report diagnostics");
  check->add_option("grammar", check_path, "Grammar file")->required();

  std::string glb_path, glb_a, glb_b;
  auto* glb = app.add_subcommand("glb", "Greatest lower bound of two sorts");
  glb->add_option("grammar", glb_path, "Grammar file")->required();
  glb->add_option("sort1", glb_a, "First sort")->required();
  glb->add_option("sort2", glb_b, "Second sort")->required();

  UnifyOptions uo;
  auto* unify = app.add_subcommand("unify", "Unify two terms under the grammar's constraints");
  unify->add_option("grammar", uo.grammar, "Grammar file")->required();
  unify->add_option("term1", uo.left, "First term")->required();
  unify->add_option("term2", uo.right, "Second term")->required();
  unify->add_flag("--json", uo.json, "Print the result as JSON");
  unify->add_flag("--pretty", uo.pretty, "Indent the AVM output");
  unify->add_flag("--trace", uo.trace, "Print constraint events");

  ParseCommand pc;
  auto* parse_cmd = app.add_subcommand("parse", "Parse a sentence or a sentence file");
  parse_cmd->add_option("grammar", pc.grammar, "Grammar file")->required();
  auto* sentence_opt = parse_cmd->add_option("sentence", pc.sentence, "Sentence to parse");
  auto* file_opt = parse_cmd->add_option("--file", pc.file, "One sentence per line; '*' marks expected rejections");
  sentence_opt->excludes(file_opt);
  parse_cmd->add_option("--mode", pc.mode, "Evaluation mode")->check(CLI::IsMember({"direct", "gat"}));
  parse_cmd->add_flag("--compare", pc.compare, "Run both modes and compare");
  parse_cmd->add_flag("--json", pc.json, "JSON output only on stdout");
  parse_cmd->add_flag("--metrics", pc.metrics, "Report parser metrics");
  parse_cmd->add_flag("--trace", pc.trace, "Print constraint events");
  parse_cmd->add_flag("--pretty", pc.pretty, "Indent the AVM output");
  parse_cmd->add_option("--max-parses", pc.max_parses, "Maximum parses reported")->check(CLI::PositiveNumber);
  parse_cmd->add_option("--jobs", pc.jobs, "Parallel sentences with --file")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (parse_cmd->parsed() && sentence_opt->count() == 0 && file_opt->count() == 0)
      throw CLI::RequiredError("sentence or --file");
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return exit_ok;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_usage;
  }

  if (check->parsed()) return cmd_check(check_path, ctx);
  if (glb->parsed()) return cmd_glb(glb_path, glb_a, glb_b, ctx);
  if (unify->parsed()) return cmd_unify(uo, ctx);
  return cmd_parse(pc, ctx);
}

}  // namespace ftg
