#pragma once
#include "cuspsim/lattice.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cuspsim {

/**
 Column-oriented numeric table with `# key: value` metadata lines.

 On disk: UTF-8, ',' delimiter, metadata lines first, then one header row
 of column names, then rows of 17-significant-digit decimals. Reading the
 file back reproduces every double bit-for-bit.
 */
struct CsvTable {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data; ///< data[c][row]

    std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
    void add_column(std::string name, std::vector<double> values);
    bool has_column(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const;
    /// Empty string when absent.
    std::string meta(const std::string& key) const;
    /// Series of column `name` against column "t".
    RealSeries series(const std::string& name) const;
};

/// 17 significant digits, shortest form that round-trips.
std::string format_double(double v);

std::string to_csv_string(const CsvTable& table);
CsvTable parse_csv_string(const std::string& text);

/// Writes to a sibling temporary file and renames it into place.
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

} // namespace cuspsim
