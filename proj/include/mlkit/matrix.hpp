#pragma once

#include <cassert>
#include <cmath>
#include <limits>
#include <vector>

namespace mlkit {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Dense row-major matrix of doubles. Just enough for probability tables,
// cost matrices and performance grids; heavy linear algebra uses Eigen
// inside the learner implementations.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double at(int r, int c) const {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  bool empty() const { return data.empty(); }

  std::vector<double> row(int r) const {
    std::vector<double> out(cols);
    for (int c = 0; c < cols; ++c) out[c] = at(r, c);
    return out;
  }

  std::vector<double> col(int c) const {
    std::vector<double> out(rows);
    for (int r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
  }
};

}  // namespace mlkit
