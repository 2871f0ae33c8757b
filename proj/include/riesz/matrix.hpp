#pragma once

#include <cstddef>
#include <vector>

namespace riesz {

/// Dense row-major matrix.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;
  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
};

}  // namespace riesz
