#pragma once

// The Nazarov-Treil Bellman function B(zeta, eta) = beta_p(|zeta|, |eta|) / 2,
// its derivatives, the mollified B_kappa = B * psi_kappa with the error term
// E_kappa, and pointwise checks of the size, gradient and Hessian properties.

#include <cstdint>
#include <utility>
#include <span>
#include <vector>

#include "riesz/matrix.hpp"

namespace riesz {

struct BellmanParams {
  /// p < 2 is replaced by its dual exponent, so that always 1 < q <= 2 <= p.
  explicit BellmanParams(double p, int m1 = 1, int m2 = 1, double kappa = 0.0);

  double p;
  double q;
  double gamma;  // q (q - 1) / 8
  int m1;
  int m2;
  double kappa;
  bool swapped;  // the caller's p was below 2

  int dim() const { return m1 + m2; }
};

/// Which formula of beta_p applies: 1 where s1^p <= s2^q, 2 otherwise.
int beta_branch(const BellmanParams& bp, double s1, double s2);

double beta(const BellmanParams& bp, double s1, double s2);

struct BetaDerivs {
  double value = 0.0;
  double d1 = 0.0, d2 = 0.0;
  double d11 = 0.0, d12 = 0.0, d22 = 0.0;
  int branch = 1;
};

/// Closed-form partial derivatives of beta_p in the interior of a branch.
BetaDerivs beta_derivs(const BellmanParams& bp, double s1, double s2);

/// A point xi = (zeta, eta) of R^{m1} x R^{m2}, stored as one vector.
struct BellmanPoint {
  std::vector<double> zeta;
  std::vector<double> eta;
  std::vector<double> flat() const;
  static BellmanPoint split(const BellmanParams& bp, std::span<const double> xi);
};

double bellman_B(const BellmanParams& bp, const BellmanPoint& pt);
std::vector<double> grad_B(const BellmanParams& bp, const BellmanPoint& pt);

/// Relative distance of pt to {zeta = 0} u {eta = 0} u {|zeta|^p = |eta|^q}.
double singular_distance(const BellmanParams& bp, const BellmanPoint& pt);
inline constexpr double kSingularExclusion = 1e-4;

/// Hessian from the radial chain rule. Throws SingularRegionError closer
/// than kSingularExclusion to the singular set.
Matrix hess_B(const BellmanParams& bp, const BellmanPoint& pt);

// Central-difference versions, step 1e-5 (1 + |xi|), for cross-checks.
std::vector<double> grad_B_fd(const BellmanParams& bp, const BellmanPoint& pt);
Matrix hess_B_fd(const BellmanParams& bp, const BellmanPoint& pt);

/// Quadrature for psi(x) = c_m exp(-1 / (1 - |x|^2)) on the unit ball of R^m:
/// Gauss-Legendre in the radius times a rule on the sphere (two points, a
/// uniform circle, or Gauss-Legendre in z times a uniform circle). The rule is
/// symmetric under each coordinate reflection; the weights include psi and
/// sum to one.
class Mollifier {
 public:
  Mollifier(int m, int n_radial = kDefaultRadial, int n_angular = kDefaultAngular);
  int dim() const { return m_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> node(std::size_t j) const { return {nodes_.data() + j * m_, static_cast<std::size_t>(m_)}; }
  double weight(std::size_t j) const { return weights_[j]; }
  /// Normalizing constant c_m, from a 64-point radial rule.
  double c_m() const { return c_m_; }
  /// |c_m * (mass of this rule) - 1|, before the weights were rescaled.
  double mass_error() const { return mass_error_; }

  /// Shared rule for dimension m at the default resolution.
  static const Mollifier& standard(int m);
  static constexpr int kDefaultRadial = 24;
  static constexpr int kDefaultAngular = 12;
  static constexpr int kMaxDim = 3;

 private:
  int m_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  double c_m_;
  double mass_error_;
};

// Mollified quantities. kappa = 0 reduces to the plain function; kappa > 0
// needs m1 + m2 <= 3.
double mollified_B(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule = nullptr);
std::vector<double> mollified_grad_B(const BellmanParams& bp, const BellmanPoint& pt,
                                     const Mollifier* rule = nullptr);
/// Average of the a.e. Hessian of B against psi_kappa.
Matrix mollified_hess_B(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule = nullptr);
/// E_kappa(xi) = -int <grad B(xi - kappa s), s> psi(s) ds.
double E_kappa(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule = nullptr);

/// beta_kappa(s1, s2) = 2 B_kappa at zeta = s1 e_1, eta = s2 e_1.
double beta_kappa(const BellmanParams& bp, double s1, double s2, const Mollifier* rule = nullptr);
/// Partial derivatives of beta_kappa in s1 and s2.
std::pair<double, double> beta_kappa_grad(const BellmanParams& bp, double s1, double s2,
                                          const Mollifier* rule = nullptr);

struct MarginReport {
  double margin = 0.0;      // worst slack; >= 0 when the inequality holds
  double sampled = 0.0;     // worst slack over the random directions
  double exact = 0.0;       // minimum over the radial/tangential decomposition
  std::vector<double> worst_direction;
};

/// <Hess B omega, omega> - gamma |omega_1| |omega_2| over unit omega: the
/// minimum over `trials` random directions and, for kappa = 0, the exact
/// minimum over the two-parameter reduction.
MarginReport check_hess_lower(const BellmanParams& bp, const BellmanPoint& pt, int trials, std::uint64_t seed);

/// <grad B_kappa(xi), xi> + kappa E_kappa(xi) - gamma |zeta| |eta|.
double check_grad_radial(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule = nullptr);

/// |E_kappa(xi)| / (|zeta|^{p-1} + |eta| + |eta|^{q-1} + kappa^{q-1}).
double E_growth_ratio(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule = nullptr);

}  // namespace riesz
