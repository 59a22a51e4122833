#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lexiscope::csv {

using Row = std::vector<std::string>;

struct Record {
    std::size_t line;  // 1-based line number where the record starts
    Row fields;
};

/// RFC 4180 reader: quoted fields may contain commas, quotes ("") and newlines.
/// Blank lines are skipped. Throws parse_error on an unterminated quote.
std::vector<Record> parse(std::string_view text);

/// Parses and checks the header row against `expected` exactly. Returns the data rows
/// after verifying every row has the header's width.
std::vector<Record> parse_with_header(std::string_view text, const std::vector<std::string>& expected);

std::string escape(std::string_view field);

std::string format_row(const Row& row);

}  // namespace lexiscope::csv
