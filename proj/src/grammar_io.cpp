#include "ftg/grammar.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ftg/text.hpp"

namespace ftg {

namespace {

// --- lexer -------------------------------------------------------------------

enum class Tok {
  ident,
  tag,
  string,
  subsort,    // <|
  partition,  // :=
  rule,       // ::
  restrict,   // :<
  colon,
  arrow,  // =>
  eq,
  lparen,
  rparen,
  lbrack,
  rbrack,
  lbrace,
  rbrace,
  comma,
  semi,
  bar,
  dot,  // path separator
  end,  // statement terminator
  eof,
  bad,
};

struct Token {
  Tok kind;
  std::string text;
  SourceLoc loc;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::ident:
    case Tok::tag:
      return "'" + t.text + "'";
    case Tok::string:
      return "string \"" + t.text + "\"";
    case Tok::end:
      return "end of statement '.'";
    case Tok::eof:
      return "end of input";
    default:
      return "'" + t.text + "'";
  }
}

bool ident_start(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '-' || c >= 0x80; }

class Lexer {
 public:
  Lexer(std::string_view src, std::vector<Diagnostic>& diags) : src_(src), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::eof, "", here()});
        return out;
      }
      Token t = lex_one();
      if (t.kind != Tok::bad) out.push_back(std::move(t));
    }
  }

 private:
  SourceLoc here() const { return {line_, static_cast<std::uint32_t>(pos_ - line_start_ + 1)}; }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      line_start_ = pos_ + 1;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  Token lex_one() {
    SourceLoc loc = here();
    const char c = peek();
    auto punct = [&](Tok kind, std::size_t len) {
      Token t{kind, std::string(src_.substr(pos_, len)), loc};
      pos_ += len;
      return t;
    };
    switch (c) {
      case '<':
        if (peek(1) == '|') return punct(Tok::subsort, 2);
        break;
      case ':':
        if (peek(1) == '=') return punct(Tok::partition, 2);
        if (peek(1) == ':') return punct(Tok::rule, 2);
        if (peek(1) == '<') return punct(Tok::restrict, 2);
        return punct(Tok::colon, 1);
      case '=':
        if (peek(1) == '>') return punct(Tok::arrow, 2);
        return punct(Tok::eq, 1);
      case '(':
        return punct(Tok::lparen, 1);
      case ')':
        return punct(Tok::rparen, 1);
      case '[':
        return punct(Tok::lbrack, 1);
      case ']':
        return punct(Tok::rbrack, 1);
      case '{':
        return punct(Tok::lbrace, 1);
      case '}':
        return punct(Tok::rbrace, 1);
      case ',':
        return punct(Tok::comma, 1);
      case ';':
        return punct(Tok::semi, 1);
      case '|':
        return punct(Tok::bar, 1);
      case '.': {
        const char n = peek(1);
        if (n == '\0' || n == '%' || std::isspace(static_cast<unsigned char>(n))) return punct(Tok::end, 1);
        return punct(Tok::dot, 1);
      }
      case '"':
        return lex_string(loc);
      case '#':
        if (std::isdigit(static_cast<unsigned char>(peek(1)))) {
          std::size_t len = 1;
          while (std::isdigit(static_cast<unsigned char>(peek(len)))) ++len;
          return punct(Tok::tag, len);
        }
        break;
      default:
        if (ident_start(static_cast<unsigned char>(c))) {
          std::size_t len = 0;
          while (pos_ + len < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_ + len]))) ++len;
          const bool tag = std::isupper(static_cast<unsigned char>(c));
          return punct(tag ? Tok::tag : Tok::ident, len);
        }
    }
    diags_.push_back({Diagnostic::Severity::error, loc, std::string("unexpected character '") + c + "'"});
    ++pos_;
    return {Tok::bad, "", loc};
  }

  Token lex_string(SourceLoc loc) {
    std::string text;
    ++pos_;
    while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) ++pos_;
      text += src_[pos_++];
    }
    if (pos_ >= src_.size() || src_[pos_] != '"') {
      diags_.push_back({Diagnostic::Severity::error, loc, "unterminated string literal"});
      return {Tok::bad, "", loc};
    }
    ++pos_;
    return {Tok::string, std::move(text), loc};
  }

  std::string_view src_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  std::uint32_t line_ = 1;
};

// --- parser ------------------------------------------------------------------

struct SyntaxError {
  SourceLoc loc;
  std::string message;
};

struct LatticeDecl {
  enum class Kind { subsort, partition, approp, closed } kind;
  std::string sort;
  std::vector<std::string> names;  // parent / children / feature-bound pairs
  SourceLoc loc;
};

struct LexItem {
  std::string surface;
  TermTemplate term;
  SourceLoc loc;
};

struct RawGrammar {
  std::vector<LatticeDecl> lattice;
  std::vector<SortRule> rules;
  std::vector<LexItem> lexicon;
  std::vector<Schema> schemata;
  std::optional<TermTemplate> start;
  std::map<std::string, SourceLoc, std::less<>> first_mention;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic>& diags) : toks_(std::move(tokens)), diags_(diags) {}

  RawGrammar grammar() {
    RawGrammar g;
    while (peek().kind != Tok::eof) {
      try {
        statement(g);
      } catch (const SyntaxError& e) {
        diags_.push_back({Diagnostic::Severity::error, e.loc, e.message});
        while (peek().kind != Tok::end && peek().kind != Tok::eof) ++pos_;
        if (peek().kind == Tok::end) ++pos_;
      }
    }
    return g;
  }

  std::optional<TermTemplate> single_term() {
    try {
      TermTemplate t = term();
      if (peek().kind == Tok::end) ++pos_;
      if (peek().kind != Tok::eof) fail("expected end of input, found " + describe(peek()));
      return t;
    } catch (const SyntaxError& e) {
      diags_.push_back({Diagnostic::Severity::error, e.loc, e.message});
      return std::nullopt;
    }
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& message) const { throw SyntaxError{peek().loc, message}; }

  Token expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what + ", found " + describe(peek()));
    return toks_[pos_++];
  }

  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    ++pos_;
    return true;
  }

  Token sort_name(RawGrammar& g) {
    Token t = expect(Tok::ident, "a sort name");
    g.first_mention.try_emplace(t.text, t.loc);
    return t;
  }

  void statement(RawGrammar& g) {
    const Token& head = peek();
    if (head.kind == Tok::rule) return rule(g);
    if (head.kind != Tok::ident) fail("expected a statement, found " + describe(head));
    const Tok next = peek(1).kind;
    if (next == Tok::subsort) {
      Token child = sort_name(g);
      ++pos_;
      Token parent = sort_name(g);
      expect(Tok::end, "'.'");
      g.lattice.push_back({LatticeDecl::Kind::subsort, child.text, {parent.text}, child.loc});
      return;
    }
    if (next == Tok::partition) {
      Token parent = sort_name(g);
      ++pos_;
      expect(Tok::lbrace, "'{'");
      std::vector<std::string> children;
      if (peek().kind != Tok::rbrace) {
        do children.push_back(sort_name(g).text);
        while (accept(Tok::semi));
      }
      expect(Tok::rbrace, "';' or '}'");
      expect(Tok::end, "'.'");
      g.lattice.push_back({LatticeDecl::Kind::partition, parent.text, std::move(children), parent.loc});
      return;
    }
    if (head.text == "approp") return approp(g);
    if (head.text == "closed") return closed(g);
    if (head.text == "word") return word(g);
    if (head.text == "schema") return schema(g);
    if (head.text == "start") {
      SourceLoc loc = head.loc;
      ++pos_;
      TermTemplate t = term();
      expect(Tok::end, "'.'");
      if (g.start) throw SyntaxError{loc, "duplicate start declaration"};
      g.start = std::move(t);
      return;
    }
    fail("expected '<|' or ':=' after " + describe(head));
  }

  void approp(RawGrammar& g) {
    ++pos_;
    Token sort = sort_name(g);
    expect(Tok::lparen, "'('");
    LatticeDecl decl{LatticeDecl::Kind::approp, sort.text, {}, sort.loc};
    do {
      decl.names.push_back(expect(Tok::ident, "a feature name").text);
      expect(Tok::arrow, "'=>'");
      decl.names.push_back(sort_name(g).text);
    } while (accept(Tok::comma));
    expect(Tok::rparen, "',' or ')'");
    expect(Tok::end, "'.'");
    g.lattice.push_back(std::move(decl));
  }

  std::vector<std::string> feature_list() {
    expect(Tok::lbrack, "'['");
    std::vector<std::string> out;
    if (peek().kind != Tok::rbrack) {
      do out.push_back(expect(Tok::ident, "a feature name").text);
      while (accept(Tok::comma));
    }
    expect(Tok::rbrack, "',' or ']'");
    return out;
  }

  void closed(RawGrammar& g) {
    ++pos_;
    Token sort = sort_name(g);
    auto allowed = std::make_shared<const std::vector<std::string>>(feature_list());
    expect(Tok::end, "'.'");
    SortRule r;
    r.guard_name = sort.text;
    r.var = "C";
    r.loc = sort.loc;
    r.body.push_back(ClosedFeatures{PathExpr{"C", {}, sort.loc}, std::move(allowed)});
    g.lattice.push_back({LatticeDecl::Kind::closed, sort.text, {}, sort.loc});
    g.rules.push_back(std::move(r));
  }

  void word(RawGrammar& g) {
    ++pos_;
    Token surface = expect(Tok::string, "a quoted surface form");
    expect(Tok::colon, "':'");
    TermTemplate t = term();
    expect(Tok::end, "'.'");
    g.lexicon.push_back({surface.text, std::move(t), surface.loc});
  }

  void schema(RawGrammar& g) {
    ++pos_;
    Token name = expect(Tok::ident, "a schema name");
    expect(Tok::colon, "':'");
    Schema s{name.text, term(), {}, name.loc};
    const Token& kw = peek();
    if (kw.kind != Tok::ident || kw.text != "dtrs") fail("expected 'dtrs', found " + describe(kw));
    ++pos_;
    expect(Tok::lbrack, "'['");
    if (peek().kind != Tok::rbrack) {
      do {
        std::vector<std::string> path{expect(Tok::ident, "a feature path").text};
        while (accept(Tok::dot)) path.push_back(expect(Tok::ident, "a feature name").text);
        s.daughters.push_back(std::move(path));
      } while (accept(Tok::comma));
    }
    expect(Tok::rbrack, "',' or ']'");
    expect(Tok::end, "'.'");
    if (s.daughters.empty()) throw SyntaxError{name.loc, "schema '" + name.text + "' needs at least one daughter"};
    g.schemata.push_back(std::move(s));
  }

  void rule(RawGrammar& g) {
    ++pos_;
    SortRule r;
    r.var = expect(Tok::tag, "a rule variable").text;
    expect(Tok::colon, "':'");
    Token guard = sort_name(g);
    r.guard_name = guard.text;
    r.loc = guard.loc;
    if (accept(Tok::lparen)) {
      // Guard features become equations on the rule variable.
      do {
        Token f = expect(Tok::ident, "a feature name");
        expect(Tok::arrow, "'=>'");
        r.body.push_back(PathEq{PathExpr{r.var, {f.text}, f.loc}, term()});
      } while (accept(Tok::comma));
      expect(Tok::rparen, "',' or ')'");
    }
    expect(Tok::bar, "'|'");
    const bool wrapped = accept(Tok::lparen);
    do r.body.push_back(goal(g, r));
    while (accept(Tok::comma));
    if (wrapped) expect(Tok::rparen, "',' or ')'");
    expect(Tok::end, "'.'");
    g.rules.push_back(std::move(r));
  }

  PathExpr path() {
    Token root = expect(Tok::tag, "a tag");
    PathExpr p{root.text, {}, root.loc};
    while (accept(Tok::dot)) p.features.push_back(expect(Tok::ident, "a feature name").text);
    return p;
  }

  Goal goal(RawGrammar& g, const SortRule& r) {
    const Token& head = peek();
    if (head.kind == Tok::ident && head.text == "lmember") {
      ++pos_;
      expect(Tok::lparen, "'('");
      const Token& fs = peek();
      if (fs.kind != Tok::ident || fs.text != "features") fail("expected 'features', found " + describe(fs));
      ++pos_;
      expect(Tok::lparen, "'('");
      PathExpr p = path();
      expect(Tok::rparen, "')'");
      expect(Tok::comma, "','");
      auto allowed = std::make_shared<const std::vector<std::string>>(feature_list());
      expect(Tok::rparen, "')'");
      if (p.is_bare_tag() && p.root == r.var)
        g.lattice.push_back({LatticeDecl::Kind::closed, r.guard_name, {}, p.loc});
      return ClosedFeatures{std::move(p), std::move(allowed)};
    }
    PathExpr lhs = path();
    if (accept(Tok::restrict)) {
      Token s = sort_name(g);
      return SortRestrict{std::move(lhs), s.text, SortLattice::top};
    }
    expect(Tok::eq, "'=' or ':<'");
    const Token& rhs = peek();
    if (rhs.kind == Tok::ident && rhs.text == "append" && peek(1).kind == Tok::lparen) {
      pos_ += 2;
      PathExpr a = path();
      expect(Tok::comma, "','");
      PathExpr b = path();
      expect(Tok::rparen, "')'");
      return AppendCall{std::move(lhs), std::move(a), std::move(b)};
    }
    if (rhs.kind == Tok::tag && peek(1).kind != Tok::colon) return PathEq{std::move(lhs), path()};
    return PathEq{std::move(lhs), term()};
  }

  TermTemplate term() {
    if (peek().kind == Tok::tag) {
      Token tag = toks_[pos_++];
      if (!accept(Tok::colon)) return TermTemplate{tag.text, "top", SortLattice::top, {}, tag.loc};
      TermTemplate t = untagged();
      t.tag = tag.text;
      return t;
    }
    return untagged();
  }

  TermTemplate untagged() {
    const Token& head = peek();
    if (head.kind == Tok::lbrack) return list();
    if (head.kind != Tok::ident) fail("expected a term, found " + describe(head));
    TermTemplate t{"", head.text, SortLattice::top, {}, head.loc};
    ++pos_;
    if (accept(Tok::lparen)) {
      do {
        std::string f = expect(Tok::ident, "a feature name").text;
        expect(Tok::arrow, "'=>'");
        t.features.emplace_back(std::move(f), term());
      } while (accept(Tok::comma));
      expect(Tok::rparen, "',' or ')'");
    }
    return t;
  }

  TermTemplate list() {
    SourceLoc loc = peek().loc;
    ++pos_;
    std::vector<TermTemplate> items;
    TermTemplate tail{"", "elist", SortLattice::elist, {}, loc};
    if (peek().kind != Tok::rbrack) {
      do items.push_back(term());
      while (accept(Tok::comma));
      if (accept(Tok::bar)) tail = term();
    }
    expect(Tok::rbrack, "',', '|' or ']'");
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
      TermTemplate cell{"", "nelist", SortLattice::nelist, {}, it->loc};
      cell.features.emplace_back("first", std::move(*it));
      cell.features.emplace_back("rest", std::move(tail));
      tail = std::move(cell);
    }
    return tail;
  }

  std::vector<Token> toks_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
};

// --- validation --------------------------------------------------------------

void error(std::vector<Diagnostic>& diags, SourceLoc loc, std::string message) {
  diags.push_back({Diagnostic::Severity::error, loc, std::move(message)});
}

void resolve(TermTemplate& t, const SortLattice& lattice, std::vector<Diagnostic>& diags) {
  for (auto& [name, loc] : resolve_sorts(t, lattice)) error(diags, loc, "unknown sort '" + name + "'");
}

void warn_single_use(const TermTemplate& t, std::vector<Diagnostic>& warnings) {
  for (auto& [tag, loc] : single_use_tags(t))
    warnings.push_back({Diagnostic::Severity::warning, loc, "tag '" + tag + "' is used only once"});
}

void count_template_tags(const TermTemplate& t, std::map<std::string, std::pair<int, SourceLoc>>& counts) {
  if (!t.tag.empty()) {
    auto& e = counts.try_emplace(t.tag, 0, t.loc).first->second;
    ++e.first;
  }
  for (const auto& [f, child] : t.features) count_template_tags(child, counts);
}

void warn_single_use(const SortRule& r, std::vector<Diagnostic>& warnings) {
  std::map<std::string, std::pair<int, SourceLoc>> counts;
  counts[r.var] = {1, r.loc};
  auto see = [&](const PathExpr& p) {
    auto& e = counts.try_emplace(p.root, 0, p.loc).first->second;
    ++e.first;
  };
  for (const Goal& goal : r.body) {
    if (const auto* eq = std::get_if<PathEq>(&goal)) {
      see(eq->lhs);
      if (const auto* p = std::get_if<PathExpr>(&eq->rhs))
        see(*p);
      else
        count_template_tags(std::get<TermTemplate>(eq->rhs), counts);
    } else if (const auto* sr = std::get_if<SortRestrict>(&goal)) {
      see(sr->path);
    } else if (const auto* ap = std::get_if<AppendCall>(&goal)) {
      see(ap->result);
      see(ap->first);
      see(ap->second);
    } else {
      see(std::get<ClosedFeatures>(goal).path);
    }
  }
  for (const auto& [tag, e] : counts)
    if (e.first == 1) warnings.push_back({Diagnostic::Severity::warning, e.second, "tag '" + tag + "' is used only once"});
}

// Follows a daughter path through the mother template, jumping from bare tag
// occurrences to their defining occurrence.
bool path_in_template(const TermTemplate& root, const std::vector<std::string>& path) {
  std::map<std::string, const TermTemplate*, std::less<>> defs;
  std::function<void(const TermTemplate&)> collect = [&](const TermTemplate& t) {
    if (!t.tag.empty() && !t.is_bare_tag()) defs.try_emplace(t.tag, &t);
    for (const auto& [f, child] : t.features) collect(child);
  };
  collect(root);
  const TermTemplate* cur = &root;
  for (const auto& f : path) {
    if (cur->is_bare_tag()) {
      auto it = defs.find(cur->tag);
      if (it == defs.end()) return false;
      cur = it->second;
    }
    auto it = std::find_if(cur->features.begin(), cur->features.end(), [&](const auto& e) { return e.first == f; });
    if (it == cur->features.end()) return false;
    cur = &it->second;
  }
  return true;
}

std::string join_path(const std::vector<std::string>& path) {
  std::string out;
  for (const auto& f : path) out += (out.empty() ? "" : ".") + f;
  return out;
}

SourceLoc mention(const RawGrammar& raw, const std::string& sort) {
  auto it = raw.first_mention.find(sort);
  return it == raw.first_mention.end() ? SourceLoc{} : it->second;
}

void build_lattice(const RawGrammar& raw, SortLattice& lattice, std::vector<Diagnostic>& diags) {
  for (const auto& d : raw.lattice) {
    try {
      switch (d.kind) {
        case LatticeDecl::Kind::subsort:
          lattice.declare_subsort(d.sort, d.names.front());
          break;
        case LatticeDecl::Kind::partition:
          lattice.declare_partition(d.sort, d.names);
          break;
        case LatticeDecl::Kind::approp:
          for (std::size_t i = 0; i + 1 < d.names.size(); i += 2) lattice.declare_appropriate(d.sort, d.names[i], d.names[i + 1]);
          break;
        case LatticeDecl::Kind::closed:
          lattice.declare_closed(d.sort);
          break;
      }
    } catch (const LatticeError& e) {
      error(diags, d.loc, e.what());
    }
  }
  for (const auto& ld : lattice.finalize()) {
    SourceLoc loc = ld.sorts.empty() ? SourceLoc{} : mention(raw, ld.sorts.front());
    error(diags, loc, ld.message);
  }
}

}  // namespace

std::size_t Grammar::lexeme_count() const {
  std::size_t n = 0;
  for (const auto& [word, entries] : lexicon) n += entries.size();
  return n;
}

const std::vector<TermTemplate>* Grammar::lookup(std::string_view normalized_word) const {
  auto it = lexicon.find(normalized_word);
  return it == lexicon.end() ? nullptr : &it->second;
}

Grammar load_grammar(std::string_view text, std::string_view file_name) {
  std::vector<Diagnostic> diags;
  RawGrammar raw = Parser(Lexer(text, diags).run(), diags).grammar();

  Grammar g;
  build_lattice(raw, g.lattice, diags);
  if (!g.lattice.finalized()) throw GrammarError(std::move(diags), std::string(file_name), std::string(text));

  std::map<std::string, int> per_guard;
  for (auto& r : raw.rules) {
    if (auto id = g.lattice.find(r.guard_name))
      r.guard = *id;
    else
      error(diags, r.loc, "unknown sort '" + r.guard_name + "'");
    r.name = r.guard_name + "/" + std::to_string(++per_guard[r.guard_name]);
    for (Goal& goal : r.body) {
      if (auto* eq = std::get_if<PathEq>(&goal)) {
        if (auto* t = std::get_if<TermTemplate>(&eq->rhs)) resolve(*t, g.lattice, diags);
      } else if (auto* sr = std::get_if<SortRestrict>(&goal)) {
        if (auto id = g.lattice.find(sr->sort_name))
          sr->sort = *id;
        else
          error(diags, sr->path.loc, "unknown sort '" + sr->sort_name + "'");
      }
    }
    if (auto bad = find_unbound_tag(r)) error(diags, bad->second, "tag '" + bad->first + "' is read before it is bound");
    warn_single_use(r, g.warnings);
    g.rules.push_back(std::make_shared<const SortRule>(std::move(r)));
  }

  for (auto& item : raw.lexicon) {
    resolve(item.term, g.lattice, diags);
    warn_single_use(item.term, g.warnings);
    std::string key = normalize_word(item.surface);
    if (key.empty()) error(diags, item.loc, "empty surface form");
    g.lexicon[key].push_back(std::move(item.term));
  }

  std::set<std::string, std::less<>> schema_names;
  for (auto& s : raw.schemata) {
    resolve(s.mother, g.lattice, diags);
    warn_single_use(s.mother, g.warnings);
    if (!schema_names.insert(s.name).second) error(diags, s.loc, "duplicate schema '" + s.name + "'");
    for (const auto& p : s.daughters)
      if (!path_in_template(s.mother, p))
        error(diags, s.loc, "daughter path '" + join_path(p) + "' does not occur in the mother of schema '" + s.name + "'");
    g.schemata.push_back(std::move(s));
  }

  if (raw.start) {
    resolve(*raw.start, g.lattice, diags);
    g.start = std::move(raw.start);
  }

  const bool failed = std::any_of(diags.begin(), diags.end(),
                                  [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::error; });
  if (failed) throw GrammarError(std::move(diags), std::string(file_name), std::string(text));
  return g;
}

Grammar load_grammar_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw GrammarError({{Diagnostic::Severity::error, {}, "cannot read file: " + std::string(std::strerror(errno))}},
                       path.string(), "");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_grammar(buf.str(), path.string());
}

TermTemplate parse_term(std::string_view text, const SortLattice& lattice, std::string_view file_name) {
  std::vector<Diagnostic> diags;
  auto t = Parser(Lexer(text, diags).run(), diags).single_term();
  if (t) resolve(*t, lattice, diags);
  if (!diags.empty() || !t) throw GrammarError(std::move(diags), std::string(file_name), std::string(text));
  return std::move(*t);
}

}  // namespace ftg
