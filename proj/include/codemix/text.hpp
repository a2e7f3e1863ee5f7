#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace codemix {

/// Splits on runs of spaces and tabs. Empty fields are never produced.
std::vector<std::string_view> split_fields(std::string_view line);

/// Splits on every occurrence of `sep`; keeps empty fields.
std::vector<std::string_view> split_exact(std::string_view line, char sep);

std::string ascii_lower(std::string_view s);

/// Simple (one-to-one) lowercase mapping over UTF-8 text. Covers ASCII,
/// Latin-1, Latin Extended-A, Greek and Cyrillic; other code points and
/// malformed bytes pass through unchanged.
std::string fold_case(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Shortest decimal that parses back to the identical double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Strict base-10 parse of the whole string. Returns false on any junk.
bool parse_u64(std::string_view text, unsigned long long& out);

}  // namespace codemix
