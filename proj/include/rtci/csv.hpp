#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rtci::csv {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Strict full-string parse; throws ParseError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);

/// Splits one CSV record. Double-quoted fields may contain commas and "".
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field only when it needs it.
std::string quote(std::string_view field);

/// Comma-joins fields, quoting those that need it.
std::string join(const std::vector<std::string>& fields);

}  // namespace rtci::csv
