#include "riesz/quadgrid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riesz/errors.hpp"
#include "riesz/tridiag.hpp"

namespace riesz {

namespace {

// Orthonormal p_n(t) and p_n'(t) from the Jacobi matrix, jointly rescaled.
void eval_pn(const Recurrence& rec, int n, double t, double& pn, double& dpn) {
  double p0 = 0.0, p1 = 1.0, d0 = 0.0, d1 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double bk = k > 0 ? rec.offdiag[k - 1] : 0.0;
    const double bk1 = rec.offdiag[k];
    const double p2 = ((t - rec.diag[k]) * p1 - bk * p0) / bk1;
    const double d2 = ((t - rec.diag[k]) * d1 + p1 - bk * d0) / bk1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
    const double big = std::max(std::abs(p1), std::abs(d1));
    if (big > 1e150) {
      p0 /= big;
      p1 /= big;
      d0 /= big;
      d1 /= big;
    }
  }
  pn = p1;
  dpn = d1;
}

}  // namespace

QuadRule golub_welsch(const Recurrence& rec) {
  const auto eig = tridiag_eigen(rec.diag, rec.offdiag);
  QuadRule r;
  r.nodes = eig.values;
  r.weights.resize(eig.values.size());
  for (std::size_t j = 0; j < eig.values.size(); ++j) r.weights[j] = eig.first_components[j] * eig.first_components[j];
  return r;
}

QuadRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ArgumentError("gauss_legendre: n must be >= 1");
  QuadRule r = gauss_rule(AxisSystem(Family{FamilyTag::JacobiPoly, 0.0, 0.0}), n);
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  for (std::size_t j = 0; j < r.size(); ++j) {
    r.nodes[j] = c + h * r.nodes[j];
    r.weights[j] *= (b - a);
  }
  return r;
}

QuadRule gauss_rule(const AxisSystem& sys, int n) {
  if (n < 1) throw ArgumentError("gauss_rule: n must be >= 1");
  if (n > AxisSystem::kMaxDegree) throw ArgumentError("gauss_rule: n exceeds the configured maximum");
  const Recurrence rec = sys.recurrence_coeffs(n + 1);
  Recurrence head;
  head.diag.assign(rec.diag.begin(), rec.diag.begin() + n);
  head.offdiag.assign(rec.offdiag.begin(), rec.offdiag.begin() + (n - 1));
  const auto eig = tridiag_eigen(head.diag, head.offdiag);

  QuadRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    double t = eig.values[j];
    for (int it = 0; it < 3; ++it) {
      double pn, dpn;
      eval_pn(rec, n, t, pn, dpn);
      if (dpn == 0.0 || !std::isfinite(pn / dpn)) break;
      const double step = pn / dpn;
      t -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(t))) break;
    }
    r.nodes[j] = sys.from_aux(t);
  }
  std::sort(r.nodes.begin(), r.nodes.end());

  std::vector<double> buf(n);
  for (int j = 0; j < n; ++j) {
    sys.phi_upto(r.nodes[j], buf);
    double s = 0.0;
    for (double v : buf) s += v * v;
    r.weights[j] = 1.0 / s;
  }
  return r;
}

TensorGrid::TensorGrid(std::vector<QuadRule> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ArgumentError("TensorGrid: need at least one axis");
  const int d = dim();
  strides_.assign(d, 1);
  for (int i = d - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * axes_[i + 1].size();
  std::size_t total = strides_[0] * axes_[0].size();
  weights_.assign(total, 1.0);
  for (std::size_t j = 0; j < total; ++j)
    for (int i = 0; i < d; ++i) weights_[j] *= axes_[i].weights[index(j, i)];
}

std::vector<int> TensorGrid::shape() const {
  std::vector<int> s(dim());
  for (int i = 0; i < dim(); ++i) s[i] = static_cast<int>(axes_[i].size());
  return s;
}

void TensorGrid::point(std::size_t flat, std::span<double> x) const {
  for (int i = 0; i < dim(); ++i) x[i] = node(flat, i);
}

bool TensorGrid::same_as(const TensorGrid& other) const {
  if (this == &other) return true;
  if (dim() != other.dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (axes_[i].nodes != other.axes_[i].nodes || axes_[i].weights != other.axes_[i].weights) return false;
  return true;
}

GridPtr make_grid(const std::vector<AxisSystem>& axes, const std::vector<int>& n) {
  if (axes.size() != n.size()) throw ArgumentError("make_grid: one node count per axis required");
  std::vector<QuadRule> rules;
  rules.reserve(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) rules.push_back(gauss_rule(axes[i], n[i]));
  return std::make_shared<const TensorGrid>(std::move(rules));
}

GridPtr make_grid(const std::vector<AxisSystem>& axes, int n) {
  return make_grid(axes, std::vector<int>(axes.size(), n));
}

GridFn::GridFn(GridPtr grid, int components) : grid_(std::move(grid)), components_(components) {
  if (!grid_) throw ArgumentError("GridFn: null grid");
  if (components < 1) throw ArgumentError("GridFn: need at least one component");
  values_.assign(static_cast<std::size_t>(components) * grid_->size(), 0.0);
}

GridFn GridFn::sample(GridPtr grid, const PointFn& f) {
  GridFn g(std::move(grid));
  std::vector<double> x(g.grid()->dim());
  for (std::size_t j = 0; j < g.size(); ++j) {
    g.grid()->point(j, x);
    g.at(0, j) = f(x);
  }
  return g;
}

double GridFn::magnitude(std::size_t j) const {
  if (components_ == 1) return std::abs(at(0, j));
  double s = 0.0;
  for (int c = 0; c < components_; ++c) s += at(c, j) * at(c, j);
  return std::sqrt(s);
}

double lp_norm(const GridFn& g, double p) {
  if (!std::isfinite(p) || p <= 1.0) throw ArgumentError("lp_norm: p must be a finite number > 1");
  if (!g.grid()) throw ArgumentError("lp_norm: empty grid function");
  const TensorGrid& grid = *g.grid();
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double m = g.magnitude(j);
    if (m != 0.0) s += grid.weight(j) * std::pow(m, p);
  }
  return std::pow(s, 1.0 / p);
}

double inner(const GridFn& f, const GridFn& g) {
  if (!f.grid() || !g.grid() || !f.grid()->same_as(*g.grid()))
    throw ArgumentError("inner: grid functions live on different grids");
  if (f.components() != g.components()) throw ArgumentError("inner: component counts differ");
  const TensorGrid& grid = *f.grid();
  double s = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    auto a = f.component(c), b = g.component(c);
    for (std::size_t j = 0; j < a.size(); ++j) s += grid.weight(j) * a[j] * b[j];
  }
  return s;
}

NormResult converge_norm(const std::vector<AxisSystem>& axes, const GridEvaluator& g, double p, double tol,
                         const ConvergeOptions& opt) {
  if (!std::isfinite(p) || p <= 1.0) throw ArgumentError("converge_norm: p must be a finite number > 1");
  if (axes.empty()) throw ArgumentError("converge_norm: no axes");
  int n = std::max(1, opt.start_nodes);
  double prev = lp_norm(g(make_grid(axes, n)), p);
  double last = prev;
  int doublings = 0;
  for (;;) {
    const int next = 2 * n;
    std::size_t total = 1;
    for (std::size_t i = 0; i < axes.size(); ++i) total *= static_cast<std::size_t>(next);
    if (next > opt.max_nodes_per_axis || total > opt.max_grid_size) break;
    const double cur = lp_norm(g(make_grid(axes, next)), p);
    ++doublings;
    n = next;
    prev = last;
    last = cur;
    const double scale = std::max(std::abs(cur), std::abs(prev));
    const double rel = scale == 0.0 ? 0.0 : std::abs(cur - prev) / scale;
    if (rel < tol) return NormResult{cur, rel, n, doublings};
    if (!std::isfinite(cur)) break;
  }
  throw ConvergenceError("converge_norm: no convergence within the node cap", prev, last);
}

NormResult converge_norm(const std::vector<AxisSystem>& axes, const GridFn::PointFn& f, double p, double tol,
                         const ConvergeOptions& opt) {
  return converge_norm(
      axes, GridEvaluator([&f](const GridPtr& grid) { return GridFn::sample(grid, f); }), p, tol, opt);
}

}  // namespace riesz
