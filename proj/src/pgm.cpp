#include "wnms/pgm.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wnms {

void emit_pgm(const Matrix& values, const std::string& path) {
  if (values.size() == 0) throw std::invalid_argument("emit_pgm: empty matrix");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_pgm: cannot open " + path);
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  out << "P5\n" << values.cols() << " " << values.rows() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(values.cols()));
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      double pixel = 128.0;
      if (hi > lo) pixel = std::lround((values(i, j) - lo) / (hi - lo) * 255.0);
      row[static_cast<std::size_t>(j)] = static_cast<unsigned char>(pixel);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error("emit_pgm: write failed for " + path);
}

Matrix load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_pgm: cannot open " + path);
  std::string magic;
  long cols = 0, rows = 0, maxval = 0;
  in >> magic >> cols >> rows >> maxval;
  if (!in || magic != "P5" || cols < 1 || rows < 1 || maxval != 255) {
    throw std::runtime_error("load_pgm: unsupported header in " + path);
  }
  in.get();  // single whitespace after the header
  Matrix out(rows, cols);
  std::vector<unsigned char> row(static_cast<std::size_t>(cols));
  for (long i = 0; i < rows; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw std::runtime_error("load_pgm: truncated raster in " + path);
    for (long j = 0; j < cols; ++j) out(i, j) = static_cast<double>(row[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace wnms
