#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pig::csv {

// Locale-independent shortest round-trip formatting.
std::string format_double(double v);

// RFC-4180 style quoting: fields containing a comma, quote or newline are quoted.
std::string quote(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

// Parses a whole document; quoted fields may contain separators and doubled quotes.
std::vector<std::vector<std::string>> parse(std::string_view text);

} // namespace pig::csv
