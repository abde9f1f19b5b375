#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gswmt::utf8 {

// Decode UTF-8 into code points. Stray bytes that do not form a valid
// sequence are taken as Latin-1 so decode/encode round-trips on the byte
// level never throw.
std::u32string decode(std::string_view s);

std::string encode(const std::u32string& cps);
std::string encode(char32_t cp);

// Case mapping for ASCII, Latin-1 and the paired range of Latin Extended-A.
// Covers German and Swiss German orthography (ä ö ü and friends).
char32_t to_lower(char32_t cp);
char32_t to_upper(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);

// Length in code points.
std::size_t length(std::string_view s);

std::string lowercased(std::string_view s);

}  // namespace gswmt::utf8
