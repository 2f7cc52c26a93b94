#include "locus/tabular.hpp"

#include <cmath>

#include "locus/errors.hpp"

namespace locus {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != rows * cols) {
    throw ValidationError("Matrix: value count does not match rows * cols");
  }
}

Matrix Matrix::take_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto src = row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

TabularData TabularData::take_rows(std::span<const std::size_t> idx) const {
  TabularData out;
  out.features = features.take_rows(idx);
  out.target.reserve(idx.size());
  for (std::size_t i : idx) out.target.push_back(target[i]);
  out.column_names = column_names;
  return out;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace locus
