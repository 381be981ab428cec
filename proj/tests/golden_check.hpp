#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace golden {

using Tokens = std::vector<std::string>;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string strip_comments(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '%' && !quoted) {
        line.resize(i);
        break;
      }
    }
    out += line + "\n";
  }
  return out;
}

inline Tokens tokenize(const std::string& text) {
  static const std::regex tok(R"(<\||:=|::|:<|=>|[A-Za-z0-9_][A-Za-z0-9_-]*|"[^"]*"|\S)");
  Tokens out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), tok); it != std::sregex_iterator(); ++it)
    out.push_back(it->str());
  return out;
}

// A statement ends at a dot followed by whitespace or end of input; path
// dots are always followed by a feature name.
inline std::vector<Tokens> statements(const std::string& source) {
  const std::string text = strip_comments(source);
  std::vector<Tokens> out;
  std::size_t from = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '.' || (i + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[i + 1])))) continue;
    Tokens t = tokenize(text.substr(from, i + 1 - from));
    if (!t.empty()) out.push_back(std::move(t));
    from = i + 1;
  }
  return out;
}

// The spelling normalizations documented in the sample grammar header.
inline Tokens normalize(const Tokens& in) {
  static const std::map<std::string, std::string> rename{
      {"dtr", "dtrs"}, {"syntagme", "phrase"}, {"subst", "substantive"}};
  Tokens t;
  for (const auto& s : in) {
    auto r = rename.find(s);
    t.push_back(r == rename.end() ? s : r->second);
  }
  Tokens out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.push_back(t[i]);
    const bool dot_next = i + 2 < t.size() && t[i + 1] == ".";
    if (dot_next && t[i] == "head-dtr" && t[i + 2] == "loc") {
      out.insert(out.end(), {".", "synsem"});
    } else if (dot_next && t[i] == "cat" && (t[i + 2] == "subj" || t[i + 2] == "comps")) {
      out.insert(out.end(), {".", "valence"});
    }
  }
  return out;
}

inline std::string join(const Tokens& t) {
  std::string out;
  for (const auto& s : t) out += (out.empty() ? "" : " ") + s;
  return out;
}

struct Report {
  std::size_t reference_statements = 0;
  std::vector<std::string> missing;  // normalized reference statements absent from the grammar
};

inline Report compare(const std::string& reference_source, const std::string& grammar_source) {
  const auto shipped = statements(grammar_source);
  Report r;
  for (const Tokens& ref : statements(reference_source)) {
    ++r.reference_statements;
    const Tokens want = normalize(ref);
    if (std::find(shipped.begin(), shipped.end(), want) == shipped.end()) r.missing.push_back(join(want));
  }
  return r;
}

}  // namespace golden
