#include "riesz/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "riesz/errors.hpp"

namespace riesz {

TridiagEigen tridiag_eigen(std::vector<double> d, std::vector<double> offdiag) {
  const int n = static_cast<int>(d.size());
  if (n == 0) throw ArgumentError("tridiag_eigen: empty matrix");
  if (static_cast<int>(offdiag.size()) != n - 1) throw ArgumentError("tridiag_eigen: off-diagonal length must be n-1");

  // e[i] couples i and i+1; e[n-1] is scratch.
  std::vector<double> e(n, 0.0);
  std::copy(offdiag.begin(), offdiag.end(), e.begin());
  std::vector<double> z(n, 0.0);
  z[0] = 1.0;

  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxIter = 60;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter > kMaxIter) throw ConvergenceError("tridiag_eigen: QL iteration did not converge", 0.0, 0.0);
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  TridiagEigen out;
  out.values.resize(n);
  out.first_components.resize(n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = d[order[j]];
    out.first_components[j] = z[order[j]];
  }
  return out;
}

}  // namespace riesz
