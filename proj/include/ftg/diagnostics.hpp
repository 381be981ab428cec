#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ftg {

/// 1-based line/column into a grammar or term source; zero means "unknown".
struct SourceLoc {
  std::uint32_t line = 0;
  std::uint32_t column = 0;

  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

struct Diagnostic {
  enum class Severity { warning, error };

  Severity severity = Severity::error;
  SourceLoc loc;
  std::string message;
};

/// Formats `file:line:col: error: message`, followed by the offending source
/// line and a caret when `source` is available.
std::string format_diagnostic(const Diagnostic& d, std::string_view file, std::string_view source,
                              bool color = false);

/// Thrown when grammar or term text cannot be loaded. Carries every
/// diagnostic found, not just the first one.
class GrammarError : public std::runtime_error {
 public:
  GrammarError(std::vector<Diagnostic> diagnostics, std::string file, std::string source);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }
  const std::string& file() const noexcept { return file_; }

  /// All diagnostics rendered with source excerpts.
  std::string render(bool color = false) const;

 private:
  std::vector<Diagnostic> diagnostics_;
  std::string file_;
  std::string source_;
};

}  // namespace ftg
