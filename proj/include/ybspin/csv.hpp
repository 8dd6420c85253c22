#pragma once

#include <map>
#include <string>
#include <vector>

namespace ybspin {

/// 9 significant digits, scientific — the fixed on-disk float format.
std::string format_float(double v);

/// Header row plus string cells; numeric cells go through format_float.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
    std::string to_string() const;
    void write(const std::string& path) const;

    int column_index(const std::string& name) const; // -1 when absent
    /// Index of a required column; throws naming the column when missing.
    int require_column(const std::string& name, const std::string& context) const;
    double number(std::size_t row, int col) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin = "<string>");

} // namespace ybspin
