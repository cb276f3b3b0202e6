#pragma once

#include <string>
#include <string_view>
#include <vector>

// Thin wrappers over ICU for the normalization and character queries the
// toolkit needs. All public APIs take and return UTF-8; UTF-32 variants are
// exposed for code that iterates characters.
namespace edmark::uni {

std::u32string to_utf32(std::string_view utf8);
std::string to_utf8(std::u32string_view utf32);

std::string nfkc(std::string_view utf8);
std::u32string nfd(std::u32string_view s);
std::u32string nfc(std::u32string_view s);

bool is_whitespace(char32_t c);
bool is_greek_letter(char32_t c);
bool is_combining_mark(char32_t c);

// One UTF-8 string per codepoint; the unit sequence used for character-level
// edit distances.
std::vector<std::string> codepoint_units(std::string_view utf8);

}  // namespace edmark::uni
