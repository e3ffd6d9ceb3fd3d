#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace deforcge::csv {

// Plain comma-separated text: no quoting, fields are trimmed, blank lines
// are skipped. Lines starting with '#' are returned separately so callers
// can interpret them as metadata.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // source line of each row
  std::vector<std::string> comments;      // '#' lines, without the '#'
};

std::vector<std::string> split_line(std::string_view line);
Table parse(std::string_view text, std::string_view source = "<memory>");
Table read(const std::filesystem::path& path);

// Parses a double, throwing MalformedRecord with `context` on failure.
double parse_double(std::string_view field, std::string_view context);
int parse_int(std::string_view field, std::string_view context);

// Shortest representation that round-trips exactly.
std::string format_double(double value);

// Column lookup helper; throws MalformedRecord if `name` is absent.
std::size_t column(const Table& table, std::string_view name, std::string_view source);

std::string read_text(const std::filesystem::path& path);
// Writes via a temporary file and rename so readers never see partial output.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace deforcge::csv
