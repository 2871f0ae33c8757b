#pragma once

#include <vector>

namespace riesz {

struct TridiagEigen {
  std::vector<double> values;            // ascending
  std::vector<double> first_components;  // first entry of each unit eigenvector
};

/// Eigen-decomposition of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal by implicit QL with Wilkinson shifts. Only the
/// first row of the eigenvector matrix is accumulated.
TridiagEigen tridiag_eigen(std::vector<double> diag, std::vector<double> offdiag);

}  // namespace riesz
