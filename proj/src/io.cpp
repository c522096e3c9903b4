#include "lgw/io.hpp"

#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>
#include <vector>

namespace lgw::io {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, std::size_t line_no)
{
    token = trim(token);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(token) + "'");
    return value;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open " + path);
    return in;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    return out;
}

} // namespace

MatrixXd parse_matrix_csv(std::istream& in, bool require_header)
{
    static const std::regex header_re(R"(#\s*n\s*=\s*(\d+)\s+m\s*=\s*(\d+)\s*)");
    long want_rows = -1;
    long want_cols = -1;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty())
            continue;
        if (body.front() == '#') {
            std::smatch match;
            const std::string text(body);
            if (want_rows < 0 && rows.empty() && std::regex_match(text, match, header_re)) {
                want_rows = std::stol(match[1]);
                want_cols = std::stol(match[2]);
            }
            continue;
        }
        std::vector<double> values;
        std::size_t start = 0;
        for (;;) {
            const auto comma = body.find(',', start);
            values.push_back(parse_number(body.substr(start, comma - start), line_no));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        rows.push_back(std::move(values));
    }

    if (require_header && want_rows < 0)
        throw ParseError("missing '# n=<n> m=<M>' header");
    if (rows.empty())
        throw ParseError("no data rows");
    const std::size_t cols = rows.front().size();
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].size() != cols)
            throw DimensionMismatch("row " + std::to_string(i + 1) + " has " +
                                    std::to_string(rows[i].size()) + " entries, expected " +
                                    std::to_string(cols));
    if (want_rows >= 0 && (static_cast<long>(rows.size()) != want_rows ||
                           static_cast<long>(cols) != want_cols))
        throw DimensionMismatch("header declares " + std::to_string(want_rows) + "x" +
                                std::to_string(want_cols) + " but body is " +
                                std::to_string(rows.size()) + "x" + std::to_string(cols));

    MatrixXd a(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j)
            a(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return a;
}

MatrixXd read_matrix_csv(const std::string& path, bool require_header)
{
    auto in = open_input(path);
    return parse_matrix_csv(in, require_header);
}

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& out, const MatrixXd& a)
{
    out << "# n=" << a.rows() << " m=" << a.cols() << '\n';
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            if (j)
                out << ',';
            out << format_double(a(i, j));
        }
        out << '\n';
    }
}

void write_matrix_csv(const std::string& path, const MatrixXd& a)
{
    auto out = open_output(path);
    write_matrix_csv(out, a);
}

Dictionary read_dictionary(const std::string& path) { return Dictionary(read_matrix_csv(path, true)); }

void write_dictionary(const std::string& path, const Dictionary& dict)
{
    write_matrix_csv(path, dict.points());
}

VectorXd parse_vector(std::istream& in)
{
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        std::string cleaned(body);
        for (char& c : cleaned)
            if (c == ',' || c == '\t' || c == ';')
                c = ' ';
        std::istringstream tokens(cleaned);
        std::string tok;
        while (tokens >> tok)
            values.push_back(parse_number(tok, line_no));
    }
    if (values.empty())
        throw ParseError("no numbers found");
    return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

VectorXd read_vector(const std::string& path)
{
    auto in = open_input(path);
    return parse_vector(in);
}

} // namespace lgw::io
