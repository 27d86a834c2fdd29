#include "odmdcpd/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace odmdcpd {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t k = 0;
        while (k < cell.size() && cell[k] == ' ') ++k;
        cells.push_back(cell.substr(k));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

int CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");

    CsvTable table;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto cells = split_line(line);
        if (row == 1) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size())
            throw DataError(path + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(table.header.size()));
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty()) throw DataError(path + ": missing header row");
    return table;
}

std::vector<long long> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::vector<long long> labels;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        errno = 0;
        char* end = nullptr;
        const long long v = std::strtoll(line.c_str(), &end, 10);
        if (errno != 0 || end == line.c_str() || *end != '\0')
            throw DataError(path + ": row " + std::to_string(row) + ": bad label '" + line + "'");
        labels.push_back(v);
    }
    return labels;
}

void write_labels(const std::string& path, const std::vector<long long>& labels) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (long long v : labels) out << v << "\n";
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (errno != 0 || end == cell.c_str() || *end != '\0')
        throw DataError("row " + std::to_string(row) + ": bad number '" + cell + "' in column " +
                        column);
    return v;
}

double parse_timestamp(const std::string& cell, std::size_t row) {
    // Numeric index first; fall back to ISO-8601.
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (errno == 0 && end != cell.c_str() && *end == '\0') return v;

    std::tm tm{};
    const char* rest = ::strptime(cell.c_str(), "%Y-%m-%dT%H:%M:%S", &tm);
    if (rest == nullptr) rest = ::strptime(cell.c_str(), "%Y-%m-%d %H:%M:%S", &tm);
    if (rest == nullptr) rest = ::strptime(cell.c_str(), "%Y-%m-%d", &tm);
    if (rest == nullptr)
        throw DataError("row " + std::to_string(row) + ": bad timestamp '" + cell + "'");
    double frac = 0.0;
    if (*rest == '.') {
        char* fend = nullptr;
        frac = std::strtod(rest, &fend);
        rest = fend;
    }
    return static_cast<double>(timegm(&tm)) + frac;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i)
            out << r[i] << (i + 1 < r.size() ? "," : "");
        out << "\n";
    }
}

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace odmdcpd
