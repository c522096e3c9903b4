#include "lgw/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "lgw/error.hpp"

namespace lgw {

void Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size())
        throw DimensionMismatch("Table: row has " + std::to_string(row.size()) + " cells, expected " +
                                std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name)
            return i;
    throw InvalidInput("Table: no column '" + name + "'");
}

ReportFormat parse_report_format(const std::string& name)
{
    if (name == "csv")
        return ReportFormat::Csv;
    if (name == "json")
        return ReportFormat::Json;
    throw InvalidInput("unknown report format '" + name + "' (expected csv or json)");
}

std::string format_cell(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) {
        if (std::isnan(*d))
            return "nan";
        if (std::isinf(*d))
            return *d > 0 ? "inf" : "-inf";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        return buf;
    }
    if (const auto* i = std::get_if<std::int64_t>(&c))
        return std::to_string(*i);
    if (const auto* b = std::get_if<bool>(&c))
        return *b ? "true" : "false";
    return std::get<std::string>(c);
}

void write_csv(std::ostream& out, const Table& t)
{
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_cell(row[i]);
        out << '\n';
    }
}

void write_json(std::ostream& out, const Table& t)
{
    // Doubles are written through format_cell so CSV and JSON agree digit for digit.
    out << "[";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out << (r ? ",\n " : "\n ") << "{";
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            out << (i ? ", " : "") << nlohmann::json(t.columns[i]).dump() << ": ";
            const Cell& c = t.rows[r][i];
            if (const auto* d = std::get_if<double>(&c); d && !std::isfinite(*d))
                out << "null";
            else if (std::holds_alternative<std::string>(c))
                out << nlohmann::json(std::get<std::string>(c)).dump();
            else
                out << format_cell(c);
        }
        out << "}";
    }
    out << (t.rows.empty() ? "]\n" : "\n]\n");
}

void emit_report(const Table& t, const std::string& path, ReportFormat format)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path);
    if (format == ReportFormat::Csv)
        write_csv(out, t);
    else
        write_json(out, t);
    if (!out)
        throw Error("write failed for " + path);
}

} // namespace lgw
