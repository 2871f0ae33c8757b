#pragma once

// Truncated spectral representations over product systems and the operators
// built from them: Pi, powers of L, the Poisson semigroups P_t and Q_t^i,
// delta_i, the Riesz transforms and the frame {c_k^i delta_i phi_k}.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "riesz/matrix.hpp"
#include "riesz/orthosys.hpp"
#include "riesz/quadgrid.hpp"

namespace riesz {

using MultiIndex = std::vector<int>;

class ProductSystem {
 public:
  explicit ProductSystem(std::vector<AxisSystem> axes);
  ProductSystem(const Family& family, int d);

  int dim() const { return static_cast<int>(axes_.size()); }
  const AxisSystem& axis(int i) const { return axes_[i]; }
  const std::vector<AxisSystem>& axes() const { return axes_; }

  double lambda(std::span<const int> k) const;
  /// Bottom of the spectrum, sum of lambda_0 over axes.
  double Lambda0() const;
  /// Sum of the axis constants a_i.
  double A() const;
  /// Max over axes of the listed per-axis constant.
  double K() const;
  bool theorem_range() const;
  /// Pi removes the ground state exactly when Lambda0 vanishes.
  bool pi_removes_ground() const;
  /// r(x) = sum r_i(x_i).
  double r(std::span<const double> x) const;
  /// 24 (1 + sqrt K) (p* - 1).
  double norm_bound(double p) const;
  std::string describe() const;

 private:
  std::vector<AxisSystem> axes_;
};

double pstar(double p);

/// Dense coefficient tensor over {0..N}^d, last axis fastest.
class CoeffFn {
 public:
  CoeffFn(ProductSystem sys, int N);

  const ProductSystem& system() const { return sys_; }
  int dim() const { return sys_.dim(); }
  int N() const { return N_; }
  std::size_t size() const { return data_.size(); }

  std::size_t flat(std::span<const int> k) const;
  MultiIndex multi(std::size_t flat) const;

  double get(std::span<const int> k) const { return data_[flat(k)]; }
  void set(std::span<const int> k, double v) { data_[flat(k)] = v; }
  double get(std::initializer_list<int> k) const { return get(std::span<const int>(k.begin(), k.size())); }
  void set(std::initializer_list<int> k, double v) { set(std::span<const int>(k.begin(), k.size()), v); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double norm2() const;
  void for_each_nonzero(const std::function<void(const MultiIndex&, double)>& fn) const;

  static CoeffFn basis(ProductSystem sys, int N, std::span<const int> k);

 protected:
  ProductSystem sys_;
  int N_;
  std::vector<double> data_;
};

/// Coefficients against the orthonormal frame u_k = c_k^i delta_i phi_k of
/// axis i; entries with k_i = 0 are structurally zero.
class ImageFrameFn : public CoeffFn {
 public:
  ImageFrameFn(ProductSystem sys, int axis, int N);
  int axis() const { return axis_; }
  void set(std::span<const int> k, double v);
  void set(std::initializer_list<int> k, double v) { set(std::span<const int>(k.begin(), k.size()), v); }

 private:
  int axis_;
};

/// Which function of the axis basis a matrix samples.
enum class AxisBasis { Phi, DPhi, Ladder, DLadder, Frame, DFrame };

/// rows = nodes, cols = indices 0..N.
Matrix axis_matrix(const AxisSystem& sys, AxisBasis kind, std::span<const double> nodes, int N);

/// Values of sum_k c_k prod_i M_i(., k_i) on the tensor of row indices.
std::vector<double> tensor_apply(std::span<const double> coeffs, int N, const std::vector<const Matrix*>& mats);
/// Transpose of tensor_apply.
std::vector<double> tensor_apply_transpose(std::span<const double> values, int N,
                                           const std::vector<const Matrix*>& mats);

// Analysis and synthesis.
CoeffFn project(const GridFn& f, const ProductSystem& sys, int N);
CoeffFn project(const GridFn::PointFn& f, const ProductSystem& sys, int N);
GridFn synthesize(const CoeffFn& f, const GridPtr& grid);
/// Partial derivative along axis j.
GridFn synthesize_partial(const CoeffFn& f, int j, const GridPtr& grid);
ImageFrameFn analyze_image(const GridFn& g, const ProductSystem& sys, int axis, int N);
ImageFrameFn analyze_image(const GridFn::PointFn& g, const ProductSystem& sys, int axis, int N);
GridFn synth_image(const ImageFrameFn& g, const GridPtr& grid);
GridFn synth_image_partial(const ImageFrameFn& g, int j, const GridPtr& grid);
/// Grid with 2N + 2 Gauss nodes per axis, enough for exact analysis.
GridPtr analysis_grid(const ProductSystem& sys, int N);

// Pointwise evaluation.
double eval_point(const CoeffFn& f, std::span<const double> x);
double eval_partial_point(const CoeffFn& f, int j, std::span<const double> x);
double eval_delta_point(const CoeffFn& f, int i, std::span<const double> x);
double eval_image_point(const ImageFrameFn& g, std::span<const double> x);
double eval_image_partial_point(const ImageFrameFn& g, int j, std::span<const double> x);

// Spectral multipliers.
CoeffFn apply_Pi(const CoeffFn& f);
CoeffFn apply_L_power(const CoeffFn& f, double s);
CoeffFn apply_Pt(const CoeffFn& f, double t);
CoeffFn dt_Pt(const CoeffFn& f, double t);
ImageFrameFn apply_Qt(const ImageFrameFn& g, double t);
ImageFrameFn dt_Qt(const ImageFrameFn& g, double t);

// delta_i and its principal part p_i d/dx_i.
GridFn apply_delta(const CoeffFn& f, int i, const GridPtr& grid);
GridFn apply_frakd(const CoeffFn& f, int i, const GridPtr& grid);

/// Frame coefficients of R_i f: sqrt((lambda_{k_i} - a_i) / lambda_k) (Pi f)_k.
ImageFrameFn riesz_coeffs(const CoeffFn& f, int i);
GridFn riesz(const CoeffFn& f, int i, const GridPtr& grid);
/// (R_1 f, ..., R_d f) as a d-component grid function.
GridFn riesz_vector(const CoeffFn& f, const GridPtr& grid);

// Assumption predicates.

/// Points spread over the domain: the bulk uniformly, the rest log-uniformly
/// toward finite endpoints (down to 1e-10 from the edge).
std::vector<std::vector<double>> domain_samples(const ProductSystem& sys, std::size_t n, std::uint64_t seed);

struct PredicateCheck {
  bool holds = true;
  /// Smallest slack seen: min v_i for A1, min (K r (1 + tol) - sum q_i^2) for A2.
  double worst_margin = 0.0;
  std::vector<double> worst_point;
  /// A2 only: sup of sum q_i^2 / r over points with r > 0.
  double sup_ratio = 0.0;
  std::size_t samples = 0;
};

/// v_i(x_i) >= 0 for every axis at every point.
PredicateCheck check_A1(const ProductSystem& sys, const std::vector<std::vector<double>>& points);
/// sum q_i(x_i)^2 <= K r(x) (1 + rel_tol) at every point.
PredicateCheck check_A2(const ProductSystem& sys, const std::vector<std::vector<double>>& points, double K,
                        double rel_tol = 1e-12);

}  // namespace riesz
