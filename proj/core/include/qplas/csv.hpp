#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qplas::csv {

// Shortest decimal text that parses back to the identical double.
std::string format_number(double value);

double parse_number(std::string_view text, const std::string& source, std::size_t line);
long long parse_integer(std::string_view text, const std::string& source, std::size_t line);

struct Table {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;  // 1-based file line of each row

    // Throws ParseError (line 1) when the header lacks `name`.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;
};

// Comma-separated, no quoting. Blank lines are skipped; every row must have
// as many fields as the header.
Table parse(std::string_view text, std::string source);
Table read(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace qplas::csv
