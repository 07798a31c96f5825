#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cvs::csv {

// Shortest round-trip decimal, '.' separator, independent of the locale.
std::string format(double v);
std::string format(std::uint64_t v);
std::string format(std::optional<double> v);

// RFC 4180 field quoting.
std::string quote(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Splits one RFC 4180 record (no embedded newlines).
std::vector<std::string> split_row(std::string_view line);

double parse_double(std::string_view field);

}  // namespace cvs::csv
