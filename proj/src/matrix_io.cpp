#include "ifp/matrix_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "ifp/errors.hpp"

namespace ifp {

Eigen::MatrixXd parse_matrix(std::istream& in, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double value;
    while (ls >> value) row.push_back(value);
    if (!ls.eof()) throw ConfigError(origin + ": malformed matrix entry in line '" + line + "'");
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(origin + ": ragged matrix rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(origin + ": empty matrix");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file '" + path + "'");
  return parse_matrix(in, path);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace ifp
