#include "planchette/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace planchette {

std::string format_double(double v)
{
    if (v == 0.0) return "0";  // folds -0
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(std::string_view line, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

int CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> CsvTable::numbers(std::string_view name) const
{
    const int col = column(name);
    if (col < 0) throw std::invalid_argument("missing CSV column '" + std::string(name) + "'");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const std::string& cell = row.at(static_cast<std::size_t>(col));
        double v = 0.0;
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
            throw std::invalid_argument("bad number '" + cell + "' in column '" + std::string(name) + "'");
        out.push_back(v);
    }
    return out;
}

CsvTable parse_csv(std::string_view text)
{
    CsvTable table;
    bool first = true;
    for (const auto& raw : split(text, '\n')) {
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (first) {
            table.header = split(line, ',');
            first = false;
        } else {
            table.rows.push_back(split(line, ','));
        }
    }
    return table;
}

}  // namespace planchette
