#pragma once

#include <string>
#include <string_view>

namespace xlskd::utf8 {

// Decodes UTF-8 into Unicode scalar values. Malformed sequences decode to
// U+FFFD one byte at a time, so decoding never fails.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

bool is_whitespace(char32_t cp);
bool is_punctuation(char32_t cp);
// CJK ideographs and kana; each becomes its own token.
bool is_cjk(char32_t cp);
// Simple one-to-one case folding for Latin, Greek and Cyrillic blocks.
char32_t to_lower(char32_t cp);

}  // namespace xlskd::utf8
