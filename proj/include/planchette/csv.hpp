// Small text helpers shared by the file writers.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace planchette {

/// Shortest representation that round-trips to the same double.
std::string format_double(double v);

std::vector<std::string> split(std::string_view line, char sep);

/// Rows of a CSV document with a header line; no quoting support.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column, or -1.
    int column(std::string_view name) const;
    /// Values of a numeric column; std::invalid_argument if the column is
    /// missing or a cell does not parse.
    std::vector<double> numbers(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

}  // namespace planchette
