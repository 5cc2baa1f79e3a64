// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scalereg {

/// Strict numeric CSV: comma separated, required header row, '.' decimal
/// separator, UTF-8, no quoting. Empty cells mark missing values (stored as
/// NaN); any other non-numeric cell is a parse error with its location.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    /// 0-based column index; throws DomainError naming the column if absent.
    std::size_t column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable read_csv_stream(std::istream& in, const std::string& origin);

/// Writes numbers with 17 significant digits so re-ingestion round-trips.
void write_csv(std::ostream& os, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

}  // namespace scalereg
