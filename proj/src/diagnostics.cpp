#include "ftg/diagnostics.hpp"

#include <sstream>

namespace ftg {

namespace {

std::string_view source_line(std::string_view source, std::uint32_t line) {
  std::size_t start = 0;
  for (std::uint32_t i = 1; i < line; ++i) {
    std::size_t nl = source.find('\n', start);
    if (nl == std::string_view::npos) return {};
    start = nl + 1;
  }
  std::size_t end = source.find('\n', start);
  return source.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
}

std::string first_message(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Diagnostic::Severity::error) return d.message;
  return diags.empty() ? "grammar error" : diags.front().message;
}

}  // namespace

std::string format_diagnostic(const Diagnostic& d, std::string_view file, std::string_view source, bool color) {
  std::ostringstream out;
  const bool error = d.severity == Diagnostic::Severity::error;
  if (color) out << "\033[1m";
  out << file;
  if (d.loc.line != 0) out << ':' << d.loc.line << ':' << d.loc.column;
  out << ": ";
  if (color) out << (error ? "\033[31m" : "\033[35m");
  out << (error ? "error" : "warning") << ": ";
  if (color) out << "\033[0m";
  out << d.message << '\n';
  if (d.loc.line != 0 && !source.empty()) {
    std::string_view text = source_line(source, d.loc.line);
    out << "  " << text << "\n  ";
    // Keep tabs so the caret lines up with the echoed line.
    for (std::uint32_t i = 1; i < d.loc.column && i - 1 < text.size(); ++i) out << (text[i - 1] == '\t' ? '\t' : ' ');
    if (color) out << "\033[32m";
    out << '^';
    if (color) out << "\033[0m";
    out << '\n';
  }
  return out.str();
}

GrammarError::GrammarError(std::vector<Diagnostic> diagnostics, std::string file, std::string source)
    : std::runtime_error(file + ": " + first_message(diagnostics)),
      diagnostics_(std::move(diagnostics)),
      file_(std::move(file)),
      source_(std::move(source)) {}

std::string GrammarError::render(bool color) const {
  std::string out;
  for (const auto& d : diagnostics_) out += format_diagnostic(d, file_, source_, color);
  return out;
}

}  // namespace ftg
