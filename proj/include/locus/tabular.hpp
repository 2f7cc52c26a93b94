#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace locus {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> v);

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    return {values.data() + r * cols, cols};
  }

  /// New matrix holding the listed rows, in order.
  Matrix take_rows(std::span<const std::size_t> idx) const;
};

/// A numeric regression table: features plus a target column.
struct TabularData {
  Matrix features;
  std::vector<double> target;
  std::vector<std::string> column_names;  // feature names in header order

  std::size_t size() const { return features.rows; }
  std::size_t dim() const { return features.cols; }

  TabularData take_rows(std::span<const std::size_t> idx) const;
};

/// Euclidean distance between equal-length vectors.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace locus
