// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#include "scalereg/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "scalereg/errors.hpp"

namespace scalereg {

namespace {

std::vector<std::string> split_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_cell(const std::string& cell, const std::string& origin, std::size_t row,
                  std::size_t col) {
    if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();  // missing
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
        throw ParseError(origin + ": non-numeric cell '" + cell + "' at row " +
                             std::to_string(row) + ", column " + std::to_string(col),
                         row, col);
    return value;
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
        throw DomainError("column '" + name + "' not found in CSV header");
    return static_cast<std::size_t>(it - columns.begin());
}

bool CsvTable::has_column(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

CsvTable read_csv_stream(std::istream& in, const std::string& origin) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(origin + ": missing header row", 1, 0);
    table.columns = split_line(std::move(line));
    if (table.columns.size() == 1 && table.columns[0].empty())
        throw ParseError(origin + ": empty header row", 1, 0);

    std::size_t row_number = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const std::vector<std::string> cells = split_line(std::move(line));
        if (cells.size() != table.columns.size())
            throw ParseError(origin + ": row " + std::to_string(row_number) + " has " +
                                 std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(table.columns.size()),
                             row_number, 0);
        std::vector<double> parsed(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            parsed[c] = parse_cell(cells[c], origin, row_number, c + 1);
        table.rows.push_back(std::move(parsed));
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open CSV file: " + path);
    return read_csv_stream(in, path);
}

void write_csv(std::ostream& os, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    for (std::size_t c = 0; c < columns.size(); ++c)
        os << (c ? "," : "") << columns[c];
    os << "\n";
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
            os << (c ? "," : "") << buf;
        }
        os << "\n";
    }
}

}  // namespace scalereg
