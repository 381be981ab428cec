#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ftg {

/// NFC normalization followed by Unicode case folding. Invalid UTF-8 is
/// replaced with U+FFFD.
std::string normalize_word(std::string_view word);

/// Normalizes and splits on Unicode white space. Blank input yields no tokens.
std::vector<std::string> tokenize(std::string_view sentence);

}  // namespace ftg
