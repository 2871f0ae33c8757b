#pragma once

// The flow u(x, t) = (P_t Pi f, Q_t^1 g_1, ..., Q_t^d g_d), the |.|_* norm,
// and checks of the bilinear formula, the bilinear embedding and the
// pointwise differential inequality behind it.

#include <vector>

#include "riesz/bellman.hpp"
#include "riesz/quadgrid.hpp"
#include "riesz/spectral.hpp"

namespace riesz {

/// f, g and the exponent, fixed; everything else is derived from them.
class FlowState {
 public:
  /// g[i] must be an image function of axis i over f's system. x_nodes = 0
  /// picks max(32, 3 (N + 1)) Gauss nodes per axis for x-integrals.
  FlowState(CoeffFn f, std::vector<ImageFrameFn> g, double p, int x_nodes = 0);

  const ProductSystem& system() const { return f_.system(); }
  int dim() const { return f_.dim(); }
  const CoeffFn& f() const { return f_; }
  const CoeffFn& pi_f() const { return pif_; }
  const std::vector<ImageFrameFn>& g() const { return g_; }
  double p() const { return p_; }
  const GridPtr& grid() const { return grid_; }

  /// Smallest sqrt(lambda) carried by Pi f (resp. by any g_i); 0 when empty.
  double decay_f() const { return decay_f_; }
  double decay_g() const { return decay_g_; }
  /// sum lambda_k c_k^2 over Pi f and over all g_i.
  double energy_f() const { return energy_f_; }
  double energy_g() const { return energy_g_; }

  /// r and p_i at the grid nodes.
  const std::vector<double>& r_nodes() const { return r_nodes_; }
  const std::vector<double>& p_nodes(int i) const { return p_nodes_[i]; }

 private:
  CoeffFn f_;
  CoeffFn pif_;
  std::vector<ImageFrameFn> g_;
  double p_;
  GridPtr grid_;
  double decay_f_ = 0.0, decay_g_ = 0.0;
  double energy_f_ = 0.0, energy_g_ = 0.0;
  std::vector<double> r_nodes_;
  std::vector<std::vector<double>> p_nodes_;
};

enum class Flow { F, G };

/// The three squared summands of |.|_*^2 at the grid nodes of the state.
struct StarParts {
  GridFn potential;  // r |.|^2
  GridFn time;       // |d_t .|^2
  GridFn space;      // sum_i |p_i d_i .|^2, from the ladder action minus q_i
};

StarParts star_parts(const FlowState& state, Flow which, double t);
/// sqrt(r |.|^2 + |d_t .|^2 + sum_i |p_i d_i .|^2) nodewise.
GridFn star_norm(const FlowState& state, Flow which, double t);
/// int |.|_*^2 dmu = 2 sum lambda_k c_k^2 e^{-2 t sqrt(lambda_k)} for F; for G
/// the same sum minus int v_i |G_i|^2, so an upper bound when v_i >= 0.
double star_energy(const FlowState& state, Flow which, double t);

/// Rule on (0, inf) for the weight t dt, resolving e^{-s t} for s in
/// [s_min, s_max]: Gauss-Legendre panels doubling in width up to 60 / s_min.
QuadRule t_rule(double s_min, double s_max, int per_panel = 20);

struct Form1Result {
  double lhs = 0.0;          // <R_i f, g> by quadrature
  double rhs = 0.0;          // -4 int <delta_i P_t Pi f, d_t Q_t^i g> t dt, closed-form t-integrals
  double rhs_numeric = 0.0;  // same with the t-rule
  /// max |lhs - rhs|, |lhs - rhs_numeric| over ||Pi f||_2 ||g||_2.
  double relerr = 0.0;
  /// max over coefficient pairs of the t-rule's relative error on (sqrt l_k + sqrt l_n)^-2.
  double t_rule_err = 0.0;
};

/// Both sides of the bilinear formula for axis i. g is taken through its frame
/// coefficients; returns zeros when Pi f vanishes.
Form1Result form1_check(const CoeffFn& f, int i, const ImageFrameFn& g);
/// g given pointwise; it is analyzed against the frame of axis i at f's truncation.
Form1Result form1_check(const CoeffFn& f, int i, const GridFn::PointFn& g);

struct EmbeddingOptions {
  double t_tol = 1e-9;     // relative, adaptive Gauss-Kronrod in t
  double norm_tol = 1e-3;  // relative, for the L^p norms
};

struct EmbeddingResult {
  double lhs = 0.0;         // int int |F|_* |G|_* dmu t dt
  double t_error = 0.0;     // error estimate of the t-quadrature on [0, T]
  double T = 0.0;
  double tail_bound = 0.0;  // bound on the part beyond T
  bool tail_certified = false;  // the G bound used v_i >= 0
  double norm_f = 0.0;      // ||Pi f||_p
  double norm_g = 0.0;      // ||(sum g_i^2)^{1/2}||_q
  double bound = 0.0;       // 6 (p* - 1) norm_f norm_g
  double ratio = 0.0;       // lhs / bound, 0 when Pi f or g vanishes
  /// False when a norm missed norm_tol at the node cap. |g|^q has kinks at the
  /// zeros of g, so for q < 2 Gauss rules converge slowly; the finest value is
  /// used and norm_rel_change records the last relative change.
  bool norms_converged = true;
  double norm_rel_change = 0.0;
};

double embedding_lhs(const FlowState& state, const EmbeddingOptions& opt = {});
EmbeddingResult embedding_check(const FlowState& state, const EmbeddingOptions& opt = {});

struct DiffIneqPoint {
  std::vector<double> x;
  double t = 0.0;
  bool singular = false;         // u too close to the singular set of B; skipped
  double formula = 0.0;          // three-term chain-rule expression
  double fd = 0.0;               // (d_t^2 - tilde L) b by finite differences
  double identity_relerr = 0.0;  // |fd - formula| over the size of the FD terms
  double rhs = 0.0;              // gamma |F|_* |G|_*  (minus kappa r E_kappa)
  double margin = 0.0;           // (formula - rhs) / (|formula| + |rhs|)
  double v_term = 0.0;           // sum v_i (d B / d G_i) G_i
};

struct DiffIneqReport {
  std::vector<DiffIneqPoint> points;
  double worst_identity_relerr = 0.0;
  double worst_margin = 0.0;
  double min_v_term = 0.0;
  std::size_t flagged = 0;
  std::size_t evaluated = 0;
};

/// Every x in xs paired with every t in ts. d <= 2; kappa > 0 only for d = 1,
/// with the standard mollifier.
DiffIneqReport diff_ineq_check(const FlowState& state, const std::vector<std::vector<double>>& xs,
                               const std::vector<double>& ts, double kappa = 0.0);

/// Singular-set exclusion for the unmollified check.
inline constexpr double kFlowSingularExclusion = 1e-3;

}  // namespace riesz
