#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace lgw {

using Cell = std::variant<double, std::int64_t, bool, std::string>;

/// Rows in replicate (or grid) order under a fixed column list.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
    std::size_t column(const std::string& name) const;
};

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(const std::string& name);

/// Doubles use 17 significant digits, so identical tables give identical bytes.
std::string format_cell(const Cell& c);

void write_csv(std::ostream& out, const Table& t);
void write_json(std::ostream& out, const Table& t);
void emit_report(const Table& t, const std::string& path, ReportFormat format);

} // namespace lgw
