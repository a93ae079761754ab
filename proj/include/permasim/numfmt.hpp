#pragma once

// Locale-independent number formatting and parsing.

#include <cstdint>
#include <string>
#include <string_view>

namespace permasim {

/// Shortest decimal that reads back to exactly `v`.
std::string format_double(double v);

/// Whole-string parses; throw std::invalid_argument naming the text.
double parse_double(std::string_view text);
std::uint64_t parse_u64(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace permasim
