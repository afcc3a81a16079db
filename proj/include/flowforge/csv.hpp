#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace flowforge::csv {

using Row = std::vector<std::string>;

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string escape(std::string_view field);

/// One CRLF-free line; fields joined with commas.
std::string format_row(const Row& row);

/// RFC 4180 parser: quoted fields may contain commas, doubled quotes and
/// line breaks. Accepts LF or CRLF record ends. Throws FormatError on an
/// unterminated quote.
std::vector<Row> parse(std::string_view text);

std::vector<Row> read_file(const std::filesystem::path& path);

/// Shortest "%.*g" rendering with the given significant digits.
std::string format_number(double value, int significant_digits = 9);

/// Strict numeric parse of a whole cell; returns false on junk or non-finite.
bool parse_number(std::string_view cell, double& out);

}  // namespace flowforge::csv
