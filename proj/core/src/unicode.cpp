#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "textgcn/corpus.hpp"

namespace textgcn {

namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr)
    throw std::runtime_error("ICU NFC normalizer unavailable");
  return *n;
}

}  // namespace

std::string normalize_nfc(std::string_view utf8) {
  // fromUTF8 substitutes U+FFFD for ill-formed sequences.
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString dst = nfc().normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalize failed");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString norm = nfc().normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalize failed");

  std::vector<std::string> tokens;
  icu::UnicodeString current;
  const int32_t len = norm.length();
  for (int32_t i = 0; i < len;) {
    const UChar32 c = norm.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      if (!current.isEmpty()) {
        std::string t;
        current.toUTF8String(t);
        tokens.push_back(std::move(t));
        current.remove();
      }
    } else {
      current.append(c);
    }
  }
  if (!current.isEmpty()) {
    std::string t;
    current.toUTF8String(t);
    tokens.push_back(std::move(t));
  }
  return tokens;
}

}  // namespace textgcn
