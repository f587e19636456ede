#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cvarqd {

/// Shortest round-trip decimal form of v.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

/// Plain comma-separated reader: no quoting, first line is the header.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

}  // namespace cvarqd
