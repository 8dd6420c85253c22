#include "ybspin/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ybspin {

std::string format_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.8e", v);
    return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size()) {
        throw std::invalid_argument("CsvTable: row width does not match header");
    }
    rows.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out << columns[i] << (i + 1 < columns.size() ? "," : "");
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << row[i] << (i + 1 < row.size() ? "," : "");
        }
        out << '\n';
    }
    return out.str();
}

void CsvTable::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << to_string();
    if (!out) throw std::runtime_error(path + ": write failed");
}

int CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
}

int CsvTable::require_column(const std::string& name, const std::string& context) const {
    const int idx = column_index(name);
    if (idx < 0) {
        throw std::runtime_error(context + ": missing required column '" + name + "'");
    }
    return idx;
}

double CsvTable::number(std::size_t row, int col) const {
    const std::string& cell = rows.at(row).at(static_cast<std::size_t>(col));
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("row " + std::to_string(row + 2) + ": cell '" + cell +
                                 "' is not a number");
    }
    if (used != cell.size()) {
        throw std::runtime_error("row " + std::to_string(row + 2) + ": cell '" + cell +
                                 "' is not a number");
    }
    return v;
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.push_back("");
        if (header) {
            table.columns = std::move(cells);
            header = false;
        } else {
            if (cells.size() != table.columns.size()) {
                throw std::runtime_error(origin + ": row has " + std::to_string(cells.size()) +
                                         " cells, header has " + std::to_string(table.columns.size()));
            }
            table.rows.push_back(std::move(cells));
        }
    }
    if (header) throw std::runtime_error(origin + ": empty CSV (header row is mandatory)");
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

} // namespace ybspin
