#pragma once

#include <string>
#include <vector>

#include "odmdcpd/errors.hpp"

namespace odmdcpd {

/// Header row plus raw string cells; numeric parsing happens at column
/// extraction so errors can carry the row number.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

/// One change-point index per line, no header.
std::vector<long long> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<long long>& labels);

/// Parses an ISO-8601 timestamp (YYYY-MM-DD[THH:MM:SS[.fff]][Z]) or a plain
/// number into a double (epoch seconds / index).
double parse_timestamp(const std::string& cell, std::size_t row);

double parse_number(const std::string& cell, std::size_t row, const std::string& column);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double v);

}  // namespace odmdcpd
