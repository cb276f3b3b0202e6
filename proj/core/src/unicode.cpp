#include "edmark/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>

#include <stdexcept>

namespace edmark::uni {

namespace {

const icu::Normalizer2& normalizer(const char* name) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n =
      icu::Normalizer2::getInstance(nullptr, name, UNORM2_COMPOSE, status);
  if (U_FAILURE(status) || n == nullptr)
    throw std::runtime_error("ICU normalizer unavailable");
  return *n;
}

const icu::Normalizer2& nfkc_normalizer() {
  static const icu::Normalizer2& n = normalizer("nfkc");
  return n;
}

const icu::Normalizer2& nfd_normalizer() {
  UErrorCode status = U_ZERO_ERROR;
  static const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status) || n == nullptr)
    throw std::runtime_error("ICU NFD normalizer unavailable");
  return *n;
}

const icu::Normalizer2& nfc_normalizer() {
  UErrorCode status = U_ZERO_ERROR;
  static const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr)
    throw std::runtime_error("ICU NFC normalizer unavailable");
  return *n;
}

icu::UnicodeString from_utf32(std::u32string_view s) {
  return icu::UnicodeString::fromUTF32(
      reinterpret_cast<const UChar32*>(s.data()), static_cast<int32_t>(s.size()));
}

std::u32string to_u32(const icu::UnicodeString& us) {
  std::u32string out(static_cast<std::size_t>(us.countChar32()), U'\0');
  UErrorCode status = U_ZERO_ERROR;
  us.toUTF32(reinterpret_cast<UChar32*>(out.data()),
             static_cast<int32_t>(out.size()), status);
  if (U_FAILURE(status)) throw std::runtime_error("UTF-32 conversion failed");
  return out;
}

}  // namespace

std::u32string to_utf32(std::string_view utf8) {
  return to_u32(icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size()))));
}

std::string to_utf8(std::u32string_view utf32) {
  std::string out;
  from_utf32(utf32).toUTF8String(out);
  return out;
}

std::string nfkc(std::string_view utf8) {
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString norm = nfkc_normalizer().normalize(in, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFKC normalization failed");
  std::string out;
  norm.toUTF8String(out);
  return out;
}

std::u32string nfd(std::u32string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString norm = nfd_normalizer().normalize(from_utf32(s), status);
  if (U_FAILURE(status)) throw std::runtime_error("NFD normalization failed");
  return to_u32(norm);
}

std::u32string nfc(std::u32string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString norm = nfc_normalizer().normalize(from_utf32(s), status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  return to_u32(norm);
}

bool is_whitespace(char32_t c) {
  return u_isUWhiteSpace(static_cast<UChar32>(c));
}

bool is_greek_letter(char32_t c) {
  UErrorCode status = U_ZERO_ERROR;
  UScriptCode script = uscript_getScript(static_cast<UChar32>(c), &status);
  return U_SUCCESS(status) && script == USCRIPT_GREEK &&
         u_isalpha(static_cast<UChar32>(c));
}

bool is_combining_mark(char32_t c) {
  int8_t type = u_charType(static_cast<UChar32>(c));
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
         type == U_ENCLOSING_MARK;
}

std::vector<std::string> codepoint_units(std::string_view utf8) {
  std::vector<std::string> out;
  std::u32string cps = to_utf32(utf8);
  out.reserve(cps.size());
  for (char32_t c : cps) out.push_back(to_utf8(std::u32string_view(&c, 1)));
  return out;
}

}  // namespace edmark::uni
