#include "cvarqd/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cvarqd {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("cannot format double");
    return std::string(buf.data(), end);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw std::out_of_range("no CSV column named " + name);
}

double CsvTable::number(std::size_t row, const std::string& name) const {
    const std::string& field = rows.at(row).at(column(name));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw std::invalid_argument("not a number in column " + name + ": '" + field + "'");
    }
    return v;
}

CsvTable read_csv(std::istream& is) {
    CsvTable table;
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("empty CSV");
    table.header = split(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != table.header.size()) throw std::invalid_argument("CSV row has wrong field count");
        table.rows.push_back(std::move(fields));
    }
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_csv(in);
}

}  // namespace cvarqd
