#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace viramem::utf8 {

/// Decodes UTF-8; invalid sequences become U+FFFD.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

/// Unicode letter categories (L*) for Latin, Greek, Cyrillic, Armenian,
/// Hebrew, Arabic, Devanagari, Thai, Hangul, kana and CJK ideographs.
bool is_letter(char32_t cp);

/// Python-style `str.isspace()` codepoints.
bool is_space(char32_t cp);

/// Simple one-to-one case mappings for Latin-1, Latin Extended-A, Greek and
/// Cyrillic. Other codepoints map to themselves.
char32_t to_lower(char32_t cp);
char32_t to_upper(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);

std::string to_lower(std::string_view text);

/// Number of codepoints.
std::size_t length(std::string_view text);

/// Splits on runs of `is_space` codepoints, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace viramem::utf8
