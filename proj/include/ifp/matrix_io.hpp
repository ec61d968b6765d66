#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Core>

namespace ifp {

// Reads a whitespace-separated matrix: one row per line, entries separated by
// blanks. Blank lines are ignored; ragged rows are rejected.
Eigen::MatrixXd read_matrix(const std::string& path);
Eigen::MatrixXd parse_matrix(std::istream& in, const std::string& origin = "<stream>");

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace ifp
