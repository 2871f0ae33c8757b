#pragma once

// Lower bounds for the vector Riesz transform norm ||R||_{p->p} at finite
// truncation, the per-system bounds they are compared against, and the
// numerical constant chase behind 6 (p* - 1).

#include <cstdint>
#include <string>
#include <vector>

#include "riesz/spectral.hpp"

namespace riesz {

enum class NormMethod { Boyd, Ascent };

struct NormOptions {
  int max_iter = 500;
  double rel_tol = 1e-8;  // Boyd stops when the ratio moves less than this
  int restarts = 20;      // ascent only
  std::uint64_t seed = 1;
  double grid_tol = 1e-3;        // converge_norm tolerance used to size the grid
  std::size_t max_grid = 4096;   // cap on the number of grid nodes
};

struct NormEstimate {
  double p = 0.0;
  std::string system;
  int d = 0;
  int N = 0;
  NormMethod method = NormMethod::Boyd;
  /// Ratio of the best f re-evaluated on a grid with twice the nodes per axis.
  double lower_bound = 0.0;
  /// Same f on the grid the optimization ran on.
  double grid_ratio = 0.0;
  double paper_bound = 0.0;
  int iterations = 0;
  bool converged = false;
  int nodes_per_axis = 0;
  int degenerate_starts = 0;
  /// Boyd: ||R f||_p / ||f||_p after each step, starting value first.
  std::vector<double> history;
  /// Best f found, as CoeffFn data over {0..N}^d.
  std::vector<double> best_coeffs;
};

/// Coefficients run over the Pi-range: index 0 is left out when Pi removes
/// the ground state. Throws EstimationError when every start is degenerate.
NormEstimate pnorm_lower_bound(const ProductSystem& sys, double p, int N, NormMethod method,
                               const NormOptions& opt = {});

/// ||R f||_p / ||f||_p on the given grid, for any f.
double riesz_ratio(const CoeffFn& f, double p, const GridPtr& grid);

/// The bound the per-system theorem gives: 24 (1 + sqrt K) (p* - 1).
double paper_norm_bound(const ProductSystem& sys, double p);
/// 2 (p* - 1), the dimension-free bound known for the Ornstein-Uhlenbeck case.
double arcozzi_bound(double p);

struct BoundCell {
  Family family;
  int d = 0;
  int N = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
  NormEstimate boyd;
  NormEstimate ascent;
  double lower_bound = 0.0;  // larger of the two
  double paper_bound = 0.0;
  double arcozzi = 0.0;      // 0 unless the system is Ornstein-Uhlenbeck
  bool ok = false;
  std::string error;         // set when estimation itself failed
};

struct DimensionSpread {
  Family family;
  double p = 0.0;
  std::vector<double> lower_bounds;  // in d order
  double spread = 0.0;               // max - min
};

struct BoundSuiteReport {
  std::vector<BoundCell> cells;
  std::vector<DimensionSpread> spread;
  bool all_ok() const;
  /// Throws EstimationError naming each violating cell and its seed.
  void require() const;
};

struct BoundSuiteConfig {
  std::vector<Family> systems;
  std::vector<double> p_grid{1.25, 1.5, 2.0, 3.0, 6.0};
  std::vector<int> d_grid{1, 2, 3};
  int N = 10;
  /// N is lowered per d until (N + 1)^d fits.
  std::size_t max_coeffs = 64;
  std::uint64_t seed = 1;
  int workers = 1;
  /// Smaller budgets than the single-estimate defaults so that the full
  /// 105-cell grid fits in a few minutes on one core.
  NormOptions options{.max_iter = 100, .restarts = 6};
};

int suite_N(int N, int d, std::size_t max_coeffs);

BoundSuiteReport bound_suite(const BoundSuiteConfig& cfg);

struct ConstantsRow {
  double p = 0.0;
  double q = 0.0;
  double gamma = 0.0;
  double polarization = 0.0;  // (1 + gamma) / (2 gamma) ((p/q)^{1/p} + (q/p)^{1/q})
  double closed_form = 0.0;   // (8 + q (q - 1)) / 2 (q - 1)^{1/q - 1} (p - 1)
  double relaxed = 0.0;       // (q + 3) (q - 1)^{1/q - 1} (p* - 1)
  double target = 0.0;        // 6 (p* - 1)
  bool ok = false;            // polarization = closed_form <= relaxed <= target
};

struct ConstantsReport {
  double H_at_1 = 0.0;
  double argmax = 0.0;
  double sup_H = 0.0;
  double interval_bound = 0.0;  // (22/5) (7/20)^{-2/7}
  bool argmax_in_interval = false;
  bool sup_below_6 = false;
  std::vector<ConstantsRow> rows;
  bool rows_ok = false;
};

/// H(s) = (s + 4) s^{-s/(s+1)}.
double H_constant(double s);
ConstantsRow polarization_row(double p);
/// Dense grid on (0, 1] refined by Brent's method; rows on a log-grid of p in [2, 1e3].
ConstantsReport constants_report(int grid_points = 2000, int p_points = 200);

}  // namespace riesz
