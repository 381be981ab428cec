#include "ftg/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <stdexcept>

namespace ftg {

namespace {

icu::UnicodeString nfc(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error(std::string("ICU NFC unavailable: ") + u_errorName(status));
  icu::UnicodeString out = norm->normalize(s, status);
  if (U_FAILURE(status)) throw std::runtime_error(std::string("NFC normalization failed: ") + u_errorName(status));
  return out;
}

// Folding can denormalize (e.g. U+0130), so normalize on both sides.
icu::UnicodeString fold(std::string_view text) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s = nfc(s);
  s.foldCase();
  return nfc(s);
}

}  // namespace

std::string normalize_word(std::string_view word) {
  std::string out;
  fold(word).toUTF8String(out);
  return out;
}

std::vector<std::string> tokenize(std::string_view sentence) {
  icu::UnicodeString s = fold(sentence);
  std::vector<std::string> tokens;
  int32_t start = -1;
  for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1)) {
    const bool space = u_isUWhiteSpace(s.char32At(i));
    if (space && start >= 0) {
      tokens.emplace_back();
      s.tempSubStringBetween(start, i).toUTF8String(tokens.back());
      start = -1;
    } else if (!space && start < 0) {
      start = i;
    }
  }
  if (start >= 0) {
    tokens.emplace_back();
    s.tempSubString(start).toUTF8String(tokens.back());
  }
  return tokens;
}

}  // namespace ftg
