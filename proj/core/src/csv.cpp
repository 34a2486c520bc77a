#include "qplas/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "qplas/errors.hpp"

namespace qplas::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        out.emplace_back(trim(field));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

double parse_number(std::string_view text, const std::string& source, std::size_t line) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty()) {
        throw ParseError(source, line, "not a number: '" + std::string(text) + "'");
    }
    return value;
}

long long parse_integer(std::string_view text, const std::string& source, std::size_t line) {
    text = trim(text);
    long long value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty()) {
        throw ParseError(source, line, "not an integer: '" + std::string(text) + "'");
    }
    return value;
}

std::size_t Table::column(std::string_view name) const {
    if (auto idx = find_column(name)) return *idx;
    throw ParseError(source, 1, "missing column '" + std::string(name) + "'");
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

Table parse(std::string_view text, std::string source) {
    Table table;
    table.source = std::move(source);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;

        std::string_view line = trim(raw);
        if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
        if (line.empty()) continue;

        auto fields = split_fields(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ParseError(table.source, line_no,
                             "expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
        table.lines.push_back(line_no);
    }
    if (!have_header) throw ParseError(table.source, 1, "empty file (no header)");
    return table;
}

Table read(const std::filesystem::path& path) {
    return parse(read_text_file(path), path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace qplas::csv
