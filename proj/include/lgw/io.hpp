#pragma once

#include <iosfwd>
#include <string>

#include "lgw/core.hpp"

namespace lgw::io {

/// Dense matrix in the dictionary CSV layout: an optional header line
/// `# n=<rows> m=<cols>` followed by comma-separated rows. When the header
/// is present (or `require_header` is set) the body must match it exactly.
MatrixXd parse_matrix_csv(std::istream& in, bool require_header = false);
MatrixXd read_matrix_csv(const std::string& path, bool require_header = false);

void write_matrix_csv(std::ostream& out, const MatrixXd& a);
void write_matrix_csv(const std::string& path, const MatrixXd& a);

/// Dictionary file: header mandatory, columns are the points.
Dictionary read_dictionary(const std::string& path);
void write_dictionary(const std::string& path, const Dictionary& dict);

/// A flat list of numbers separated by commas, whitespace or newlines.
/// Lines starting with '#' are skipped.
VectorXd parse_vector(std::istream& in);
VectorXd read_vector(const std::string& path);

/// Shortest decimal form that round-trips the double.
std::string format_double(double v);

} // namespace lgw::io
