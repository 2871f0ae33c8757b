#pragma once

// One-dimensional orthonormal systems: Hermite, Laguerre and Jacobi
// polynomials under their probability measures, and the Hermite, Laguerre
// (Hermite and convolution type) and Jacobi function systems on Lebesgue-type
// measures. Each axis carries delta = p d/dx + q, the additive constant a,
// its eigenvalues, and the ladder action of delta on the basis.

#include <span>
#include <string>
#include <vector>

namespace riesz {

enum class FamilyTag {
  HermitePoly,
  LaguerrePoly,
  JacobiPoly,
  HermiteFunc,
  LaguerreFuncH,
  LaguerreFuncConv,
  JacobiFunc,
};

inline constexpr FamilyTag kAllFamilies[] = {
    FamilyTag::HermitePoly,   FamilyTag::LaguerrePoly,     FamilyTag::JacobiPoly,
    FamilyTag::HermiteFunc,   FamilyTag::LaguerreFuncH,    FamilyTag::LaguerreFuncConv,
    FamilyTag::JacobiFunc,
};

struct Family {
  FamilyTag tag = FamilyTag::HermitePoly;
  double alpha = 0.0;
  double beta = 0.0;

  bool has_alpha() const;
  bool has_beta() const;
  /// Parameters inside the range where the dimension-free bound is asserted.
  bool in_theorem_range() const;
  /// CLI name, e.g. "jacobi-poly".
  std::string name() const;
  /// Name plus parameters, e.g. "jacobi-poly(a=0.5,b=-0.5)".
  std::string describe() const;

  static Family parse(const std::string& name, double alpha = 0.0, double beta = 0.0);

  friend bool operator==(const Family&, const Family&) = default;
};

enum class MeasureKind { WeightedPolynomialMeasure, LebesgueLike };

/// Function multiplying the shifted eigenfunction in a ladder image.
enum class Multiplier { One, SqrtX, SqrtOneMinusX2, X };

double multiplier_value(Multiplier m, double x);
double multiplier_derivative(Multiplier m, double x);

/// delta phi_k = coefficient * multiplier(x) * phi^{target}_{target_index}(x).
struct LadderResult {
  double coefficient = 0.0;
  Family target_family;
  int target_index = 0;
  Multiplier multiplier = Multiplier::One;
};

/// Jacobi-matrix coefficients of the orthonormal polynomials of a measure.
struct Recurrence {
  std::vector<double> diag;
  std::vector<double> offdiag;
};

class AxisSystem {
 public:
  static constexpr int kMaxDegree = 4096;
  /// Requests closer than this to a finite endpoint are rejected.
  static constexpr double kEdgeGuard = 1e-12;

  explicit AxisSystem(Family family);

  const Family& family() const { return family_; }
  FamilyTag tag() const { return family_.tag; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double a() const { return a_; }
  MeasureKind measure_kind() const;
  bool theorem_range() const { return family_.in_theorem_range(); }
  /// Constant K of the bound sum q_i^2 <= K r as stated for this family.
  double listed_K() const;

  bool contains(double x) const;
  void check_domain(double x) const;

  double lambda(int k) const;
  double phi(int k, double x) const;
  /// out[k] = phi_k(x) for k < out.size().
  void phi_upto(double x, std::span<double> out) const;
  double dphi(int k, double x) const;
  void dphi_upto(double x, std::span<double> out) const;

  LadderResult ladder(int k) const;
  AxisSystem ladder_target() const;
  /// (delta phi_k)(x) assembled from the ladder formula.
  double ladder_eval(int k, double x) const;
  void ladder_upto(double x, std::span<double> out) const;
  /// d/dx of (delta phi_k)(x).
  void ladder_derivative_upto(double x, std::span<double> out) const;
  /// Squared L2 norm of delta phi_k, lambda_k - a.
  double ladder_norm_sq(int k) const { return lambda(k) - a_; }

  // Coefficient fields of delta = p d/dx + q and the weight w.
  double p(double x) const;
  double dp(double x) const;
  double d2p(double x) const;
  double q(double x) const;
  double dq(double x) const;
  /// w'/w and its derivative.
  double logw_prime(double x) const;
  double logw_second(double x) const;

  /// Commutator [delta, delta*] in closed form.
  double v(double x) const;
  /// Same quantity from p(2q' - (p w'/w)' - p'').
  double v_from_coefficients(double x) const;
  /// Per-axis potential r_i in closed form.
  double r(double x) const;
  /// Same quantity from a + q^2 - p q' - p' q - p q w'/w.
  double r_from_coefficients(double x) const;

  /// Jacobi matrix of the polynomial measure underlying the family: the
  /// measure itself for polynomial families, and for function families the
  /// auxiliary measure in the variable aux = to_aux(x).
  Recurrence recurrence_coeffs(int n) const;
  double to_aux(double x) const;
  double from_aux(double t) const;

 private:
  double rec_diag(int k) const;
  double rec_offdiag(int k) const;  // couples k-1 and k, k >= 1
  double log_envelope(double x) const;
  bool alternating_sign() const;
  double ladder_coefficient(int k) const;

  Family family_;
  double lower_;
  double upper_;
  double a_;
};

}  // namespace riesz
