#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace viewshift::csv {

/// Quotes a field when it contains a comma, quote, or newline.
std::string escape(std::string_view field);

/// Joins fields into one CSV record (no trailing newline).
std::string join(const std::vector<std::string>& fields);

/// Parses RFC 4180 text into records. Empty trailing lines are skipped.
std::vector<std::vector<std::string>> parse(std::string_view text);

}  // namespace viewshift::csv
