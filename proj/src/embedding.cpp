#include "riesz/embedding.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "riesz/errors.hpp"

namespace riesz {

namespace {

void check_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ArgumentError("flow: t must be a finite number > 0");
}

// Smallest sqrt(lambda) over nonzero coefficients and the sum of lambda c^2.
std::pair<double, double> spectral_extent(const CoeffFn& c) {
  double smin = std::numeric_limits<double>::infinity(), energy = 0.0;
  c.for_each_nonzero([&](const MultiIndex& k, double v) {
    const double lam = c.system().lambda(k);
    smin = std::min(smin, std::sqrt(std::max(lam, 0.0)));
    energy += lam * v * v;
  });
  return {std::isfinite(smin) ? smin : 0.0, energy};
}

GridFn grid_image(const std::vector<ImageFrameFn>& g, const GridPtr& grid) {
  GridFn out(grid, static_cast<int>(g.size()));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const GridFn c = synth_image(g[j], grid);
    std::copy(c.component(0).begin(), c.component(0).end(), out.component(static_cast<int>(j)).begin());
  }
  return out;
}

void accumulate_sq(std::vector<double>& acc, std::span<const double> v, const std::vector<double>* scale = nullptr) {
  for (std::size_t j = 0; j < acc.size(); ++j) {
    const double x = scale ? (*scale)[j] * v[j] : v[j];
    acc[j] += x * x;
  }
}

struct StarSq {
  std::vector<double> potential, time, space;
};

StarSq star_sq(const FlowState& st, Flow which, double t) {
  check_t(t);
  const std::size_t n = st.grid()->size();
  StarSq s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const auto& grid = st.grid();
  const int d = st.dim();
  if (which == Flow::F) {
    const CoeffFn Ft = apply_Pt(st.pi_f(), t);
    accumulate_sq(s.potential, synthesize(Ft, grid).component(0));
    accumulate_sq(s.time, synthesize(dt_Pt(st.pi_f(), t), grid).component(0));
    for (int i = 0; i < d; ++i) accumulate_sq(s.space, apply_frakd(Ft, i, grid).component(0));
  } else {
    for (const ImageFrameFn& gj : st.g()) {
      const ImageFrameFn Gt = apply_Qt(gj, t);
      accumulate_sq(s.potential, synth_image(Gt, grid).component(0));
      accumulate_sq(s.time, synth_image(dt_Qt(gj, t), grid).component(0));
      for (int i = 0; i < d; ++i) accumulate_sq(s.space, synth_image_partial(Gt, i, grid).component(0), &st.p_nodes(i));
    }
  }
  for (std::size_t j = 0; j < n; ++j) s.potential[j] *= st.r_nodes()[j];
  return s;
}

GridFn to_grid(const GridPtr& grid, const std::vector<double>& v) {
  GridFn out(grid);
  std::copy(v.begin(), v.end(), out.component(0).begin());
  return out;
}

}  // namespace

FlowState::FlowState(CoeffFn f, std::vector<ImageFrameFn> g, double p, int x_nodes)
    : f_(std::move(f)), pif_(apply_Pi(f_)), g_(std::move(g)), p_(p) {
  const int d = f_.dim();
  if (!std::isfinite(p) || p <= 1.0) throw ArgumentError("flow: p must be a finite number > 1");
  if (static_cast<int>(g_.size()) != d) throw ArgumentError("flow: need one image function per axis");
  int N = f_.N();
  for (int i = 0; i < d; ++i) {
    if (g_[i].axis() != i) throw ArgumentError("flow: g[" + std::to_string(i) + "] must be an image of axis " +
                                               std::to_string(i));
    if (g_[i].system().describe() != f_.system().describe())
      throw ArgumentError("flow: f and g live on different systems");
    N = std::max(N, g_[i].N());
  }
  if (x_nodes == 0) x_nodes = std::max(32, 3 * (N + 1));
  if (x_nodes < 2) throw ArgumentError("flow: need at least 2 nodes per axis");
  grid_ = make_grid(system().axes(), x_nodes);

  std::tie(decay_f_, energy_f_) = spectral_extent(pif_);
  decay_g_ = std::numeric_limits<double>::infinity();
  for (const auto& gi : g_) {
    const auto [s, e] = spectral_extent(gi);
    energy_g_ += e;
    if (e > 0.0) decay_g_ = std::min(decay_g_, s);
  }
  if (!std::isfinite(decay_g_)) decay_g_ = 0.0;

  const std::size_t n = grid_->size();
  r_nodes_.resize(n);
  p_nodes_.assign(d, std::vector<double>(n));
  std::vector<double> x(d);
  for (std::size_t j = 0; j < n; ++j) {
    grid_->point(j, x);
    r_nodes_[j] = system().r(x);
    for (int i = 0; i < d; ++i) p_nodes_[i][j] = system().axis(i).p(x[i]);
  }
}

StarParts star_parts(const FlowState& state, Flow which, double t) {
  StarSq s = star_sq(state, which, t);
  const auto& grid = state.grid();
  return {to_grid(grid, s.potential), to_grid(grid, s.time), to_grid(grid, s.space)};
}

GridFn star_norm(const FlowState& state, Flow which, double t) {
  StarSq s = star_sq(state, which, t);
  for (std::size_t j = 0; j < s.potential.size(); ++j) s.potential[j] = std::sqrt(s.potential[j] + s.time[j] + s.space[j]);
  return to_grid(state.grid(), s.potential);
}

double star_energy(const FlowState& state, Flow which, double t) {
  check_t(t);
  double e = 0.0;
  auto add = [&](const CoeffFn& c) {
    c.for_each_nonzero([&](const MultiIndex& k, double v) {
      const double lam = c.system().lambda(k);
      e += 2.0 * lam * v * v * std::exp(-2.0 * t * std::sqrt(std::max(lam, 0.0)));
    });
  };
  if (which == Flow::F) add(state.pi_f());
  else
    for (const auto& gi : state.g()) add(gi);
  return e;
}

QuadRule t_rule(double s_min, double s_max, int per_panel) {
  if (!(s_min > 0.0) || !(s_max >= s_min) || !std::isfinite(s_max))
    throw ArgumentError("t_rule: need 0 < s_min <= s_max < inf");
  if (per_panel < 2) throw ArgumentError("t_rule: need at least 2 nodes per panel");
  const double T = 60.0 / s_min;
  QuadRule out;
  double a = 0.0, w = 0.5 / s_max;
  while (a < T) {
    const QuadRule panel = gauss_legendre(per_panel, a, a + w);
    for (std::size_t j = 0; j < panel.size(); ++j) {
      out.nodes.push_back(panel.nodes[j]);
      out.weights.push_back(panel.weights[j] * panel.nodes[j]);
    }
    a += w;
    w *= 2.0;
  }
  return out;
}

namespace {

Form1Result form1_impl(const CoeffFn& f, int i, const ImageFrameFn& g, const GridFn& gv, const GridPtr& grid) {
  const ProductSystem& sys = f.system();
  Form1Result res;
  const CoeffFn pf = apply_Pi(f);
  if (pf.norm2() == 0.0) return res;
  const int N = g.N();
  res.lhs = inner(riesz(f, i, grid), gv);

  // Gram matrix <delta_i phi_k, u_n> by quadrature over the supports.
  std::vector<MultiIndex> ks, ns;
  std::vector<double> fk, gn;
  std::vector<GridFn> dk, un;
  pf.for_each_nonzero([&](const MultiIndex& k, double v) {
    ks.push_back(k);
    fk.push_back(v);
    dk.push_back(apply_delta(CoeffFn::basis(sys, f.N(), k), i, grid));
  });
  g.for_each_nonzero([&](const MultiIndex& n, double v) {
    ns.push_back(n);
    gn.push_back(v);
    ImageFrameFn b(sys, i, N);
    b.set(n, 1.0);
    un.push_back(synth_image(b, grid));
  });
  std::vector<double> gram(ks.size() * ns.size());
  double gmax = 0.0;
  for (std::size_t a = 0; a < ks.size(); ++a)
    for (std::size_t b = 0; b < ns.size(); ++b) {
      gram[a * ns.size() + b] = inner(dk[a], un[b]);
      gmax = std::max(gmax, std::abs(gram[a * ns.size() + b]));
    }

  double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
  for (const auto& k : ks) {
    const double s = std::sqrt(sys.lambda(k));
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  for (const auto& n : ns) {
    const double s = std::sqrt(sys.lambda(n));
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  if (!ns.empty()) {
    const QuadRule tr = t_rule(smin, 2.0 * smax);
    // <delta_i P_t Pi f, d_t Q_t g> = -sum f_k g_n G_kn sqrt(l_n) e^{-t (sqrt l_k + sqrt l_n)}
    for (std::size_t a = 0; a < ks.size(); ++a)
      for (std::size_t b = 0; b < ns.size(); ++b) {
        const double G = gram[a * ns.size() + b];
        if (std::abs(G) <= 1e-13 * gmax) continue;
        const double sk = std::sqrt(sys.lambda(ks[a])), sn = std::sqrt(sys.lambda(ns[b]));
        const double s = sk + sn;
        const double closed = 1.0 / (s * s);
        double numeric = 0.0;
        for (std::size_t j = 0; j < tr.size(); ++j) numeric += tr.weights[j] * std::exp(-s * tr.nodes[j]);
        res.t_rule_err = std::max(res.t_rule_err, std::abs(numeric - closed) / closed);
        const double c = 4.0 * fk[a] * gn[b] * G * sn;
        res.rhs += c * closed;
        res.rhs_numeric += c * numeric;
      }
  }
  const double scale = std::sqrt(pf.norm2()) * lp_norm(gv, 2.0);
  if (scale > 0.0)
    res.relerr = std::max(std::abs(res.lhs - res.rhs), std::abs(res.lhs - res.rhs_numeric)) / scale;
  return res;
}

void check_form1_axis(const ProductSystem& sys, int i) {
  if (i < 0 || i >= sys.dim()) throw ArgumentError("form1_check: axis out of range");
}

}  // namespace

Form1Result form1_check(const CoeffFn& f, int i, const ImageFrameFn& g) {
  check_form1_axis(f.system(), i);
  if (g.axis() != i) throw ArgumentError("form1_check: g must be an image function of axis i");
  if (g.system().describe() != f.system().describe()) throw ArgumentError("form1_check: f and g live on different systems");
  const GridPtr grid = analysis_grid(f.system(), std::max(f.N(), g.N()));
  return form1_impl(f, i, g, synth_image(g, grid), grid);
}

Form1Result form1_check(const CoeffFn& f, int i, const GridFn::PointFn& g) {
  check_form1_axis(f.system(), i);
  const GridPtr grid = analysis_grid(f.system(), f.N());
  const GridFn gv = GridFn::sample(grid, g);
  return form1_impl(f, i, analyze_image(gv, f.system(), i, f.N()), gv, grid);
}

namespace {

double flow_integrand(const FlowState& st, double t) {
  if (t <= 0.0) return 0.0;
  const StarSq F = star_sq(st, Flow::F, t), G = star_sq(st, Flow::G, t);
  const TensorGrid& grid = *st.grid();
  double s = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    s += grid.weight(j) * std::sqrt((F.potential[j] + F.time[j] + F.space[j]) * (G.potential[j] + G.time[j] + G.space[j]));
  return s * t;
}

struct TIntegral {
  double value = 0.0, error = 0.0, T = 0.0, tail = 0.0;
};

TIntegral integrate_t(const FlowState& st, double tol) {
  TIntegral out;
  if (st.energy_f() == 0.0 || st.energy_g() == 0.0) return out;
  const double s = st.decay_f() + st.decay_g();
  out.T = 40.0 / s;
  double l1 = 0.0;
  out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [&](double t) { return flow_integrand(st, t); }, 0.0, out.T, 15, tol, &out.error, &l1);
  if (out.error > 100.0 * tol * std::abs(out.value) && out.error > 1e-300)
    throw ConvergenceError("embedding: t-integral did not converge", out.value, out.error);
  // Cauchy-Schwarz in x with the exact energies, which decay like e^{-2 t s}.
  const double c = 2.0 * std::sqrt(st.energy_f() * st.energy_g());
  out.tail = c * std::exp(-s * out.T) * (out.T / s + 1.0 / (s * s));
  return out;
}

}  // namespace

double embedding_lhs(const FlowState& state, const EmbeddingOptions& opt) {
  return integrate_t(state, opt.t_tol).value;
}

EmbeddingResult embedding_check(const FlowState& state, const EmbeddingOptions& opt) {
  EmbeddingResult res;
  const TIntegral ti = integrate_t(state, opt.t_tol);
  res.lhs = ti.value;
  res.t_error = ti.error;
  res.T = ti.T;
  res.tail_bound = ti.tail;
  res.tail_certified = true;
  for (const auto& ax : state.system().axes()) res.tail_certified = res.tail_certified && ax.theorem_range();

  const auto& axes = state.system().axes();
  ConvergeOptions co;
  co.max_nodes_per_axis = AxisSystem::kMaxDegree;
  auto norm = [&](const GridEvaluator& ev, double r) {
    try {
      const NormResult nr = converge_norm(axes, ev, r, opt.norm_tol, co);
      res.norm_rel_change = std::max(res.norm_rel_change, nr.achieved_tol);
      return nr.value;
    } catch (const ConvergenceError& ex) {
      if (!std::isfinite(ex.last()) || !(ex.last() > 0.0)) throw;
      res.norms_converged = false;
      res.norm_rel_change = std::max(res.norm_rel_change, std::abs(ex.last() - ex.previous()) / ex.last());
      return ex.last();
    }
  };
  const CoeffFn& pf = state.pi_f();
  if (pf.norm2() > 0.0) res.norm_f = norm([&](const GridPtr& g) { return synthesize(pf, g); }, state.p());
  const double q = state.p() / (state.p() - 1.0);
  bool any_g = false;
  for (const auto& gi : state.g()) any_g = any_g || gi.norm2() > 0.0;
  if (any_g) res.norm_g = norm([&](const GridPtr& g) { return grid_image(state.g(), g); }, q);
  res.bound = 6.0 * (pstar(state.p()) - 1.0) * res.norm_f * res.norm_g;
  res.ratio = res.bound > 0.0 ? res.lhs / res.bound : 0.0;
  return res;
}

namespace {

// u, d_t u and frakd_i u at one point, ordered (F, G_1..G_d).
struct FlowPoint {
  std::vector<double> u;
  std::vector<std::vector<double>> du;  // du[0] = d_t u, du[i] = p_i d_i u
};

struct FlowAtT {
  CoeffFn F, dF;
  std::vector<ImageFrameFn> G, dG;
};

FlowAtT flow_at(const FlowState& st, double t) {
  FlowAtT out{apply_Pt(st.pi_f(), t), dt_Pt(st.pi_f(), t), {}, {}};
  for (const auto& gj : st.g()) {
    out.G.push_back(apply_Qt(gj, t));
    out.dG.push_back(dt_Qt(gj, t));
  }
  return out;
}

FlowPoint eval_flow(const FlowState& st, const FlowAtT& fl, std::span<const double> x) {
  const int d = st.dim();
  FlowPoint p;
  p.u.resize(d + 1);
  p.du.assign(d + 1, std::vector<double>(d + 1));
  p.u[0] = eval_point(fl.F, x);
  p.du[0][0] = eval_point(fl.dF, x);
  for (int j = 0; j < d; ++j) {
    p.u[j + 1] = eval_image_point(fl.G[j], x);
    p.du[0][j + 1] = eval_image_point(fl.dG[j], x);
  }
  for (int i = 0; i < d; ++i) {
    const double pi = st.system().axis(i).p(x[i]);
    p.du[i + 1][0] = pi * eval_partial_point(fl.F, i, x);
    for (int j = 0; j < d; ++j) p.du[i + 1][j + 1] = pi * eval_image_partial_point(fl.G[j], i, x);
  }
  return p;
}

// Bellman arguments: (F; G) for p >= 2, (G; F) below, where roles switch.
struct Arrangement {
  BellmanParams bp;
  bool swapped;
  BellmanPoint point(const std::vector<double>& v) const {
    if (!swapped) return {{v[0]}, std::vector<double>(v.begin() + 1, v.end())};
    return {std::vector<double>(v.begin() + 1, v.end()), {v[0]}};
  }
  // index of G_j in the flat Bellman vector
  int g_index(int j) const { return swapped ? j : 1 + j; }
};

// First and second central differences at steps h and h/2, extrapolated.
template <class Fn>
std::pair<double, double> richardson(Fn&& f, double f0, double h) {
  const double p1 = f(h), m1 = f(-h), p2 = f(0.5 * h), m2 = f(-0.5 * h);
  const double d1h = (p1 - m1) / (2.0 * h), d1h2 = (p2 - m2) / h;
  const double d2h = (p1 - 2.0 * f0 + m1) / (h * h), d2h2 = (p2 - 2.0 * f0 + m2) / (0.25 * h * h);
  return {(4.0 * d1h2 - d1h) / 3.0, (4.0 * d2h2 - d2h) / 3.0};
}

double sq_norm(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t j = from; j < to; ++j) s += v[j] * v[j];
  return s;
}

}  // namespace

DiffIneqReport diff_ineq_check(const FlowState& st, const std::vector<std::vector<double>>& xs,
                               const std::vector<double>& ts, double kappa) {
  const int d = st.dim();
  if (d > 2) throw UnsupportedError("diff_ineq_check: d <= 2 only (Bellman arguments in at most 3 dimensions)");
  if (kappa > 0.0 && d != 1) throw UnsupportedError("diff_ineq_check: the mollified variant needs d = 1");
  const bool low = st.p() < 2.0;
  const Arrangement ar{low ? BellmanParams(st.p(), d, 1, kappa) : BellmanParams(st.p(), 1, d, kappa), low};
  const BellmanParams& bp = ar.bp;
  const ProductSystem& sys = st.system();
  const bool degenerate = st.energy_g() == 0.0 && kappa == 0.0;

  auto flat = [&](const std::vector<double>& v) { return ar.point(v).flat(); };
  auto bval = [&](const std::vector<double>& v) { return mollified_B(bp, ar.point(v)); };

  DiffIneqReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  rep.min_v_term = std::numeric_limits<double>::infinity();
  for (double t : ts) {
    check_t(t);
    const double ht = std::min(1e-4 * (1.0 + t), 0.5 * t);
    const FlowAtT fl = flow_at(st, t);
    for (const auto& x : xs) {
      if (static_cast<int>(x.size()) != d) throw ArgumentError("diff_ineq_check: point dimension mismatch");
      DiffIneqPoint pt;
      pt.x = x;
      pt.t = t;
      const FlowPoint fp = eval_flow(st, fl, x);
      const BellmanPoint u = ar.point(fp.u);

      if (degenerate) {
        // only F moves; |F| = 0 is the one point where B is not C^2 along it
        double scale = std::abs(fp.u[0]);
        for (int i = 0; i <= d; ++i) scale += std::abs(fp.du[i][0]);
        pt.singular = std::abs(fp.u[0]) <= kFlowSingularExclusion * scale;
      } else if (kappa == 0.0) {
        pt.singular = singular_distance(bp, u) < kFlowSingularExclusion;
      } else {
        const Mollifier& rule = Mollifier::standard(bp.dim());
        const auto c = u.flat();
        std::vector<double> y(c.size());
        for (std::size_t j = 0; j < rule.size() && !pt.singular; ++j) {
          for (std::size_t a = 0; a < c.size(); ++a) y[a] = c[a] - kappa * rule.node(j)[a];
          pt.singular = singular_distance(bp, BellmanPoint::split(bp, y)) < kFlowSingularExclusion;
        }
      }
      if (pt.singular && kappa == 0.0) {
        ++rep.flagged;
        rep.points.push_back(pt);
        continue;
      }

      const double r = sys.r(x);
      if (degenerate) {
        // b = beta(|F|) / 2 along the F axis; the G terms all vanish
        const double sF = std::abs(fp.u[0]);
        const BetaDerivs bd = low ? beta_derivs(bp, 0.0, sF) : beta_derivs(bp, sF, 0.0);
        const double b1 = low ? bd.d2 : bd.d1, b11 = low ? bd.d22 : bd.d11;
        double dsq = 0.0;
        for (int i = 0; i <= d; ++i) dsq += fp.du[i][0] * fp.du[i][0];
        pt.formula = 0.5 * (r * b1 * sF + b11 * dsq);
      } else {
        // three-term formula
        const auto grad = mollified_grad_B(bp, u);
        const auto uf = u.flat();
        double radial = 0.0;
        for (std::size_t a = 0; a < uf.size(); ++a) radial += grad[a] * uf[a];
        double vterm = 0.0;
        for (int j = 0; j < d; ++j) {
          const int gi = ar.g_index(j);
          vterm += sys.axis(j).v(x[j]) * grad[gi] * uf[gi];
        }
        const Matrix H = mollified_hess_B(bp, u);
        double hterm = 0.0;
        for (int i = 0; i <= d; ++i) {
          const auto w = flat(fp.du[i]);
          for (int a = 0; a < bp.dim(); ++a)
            for (int b = 0; b < bp.dim(); ++b) hterm += H(a, b) * w[a] * w[b];
        }
        pt.formula = r * radial + vterm + hterm;
        pt.v_term = vterm;
      }

      const double Fs2 = r * fp.u[0] * fp.u[0] + [&] {
        double s = 0.0;
        for (int i = 0; i <= d; ++i) s += fp.du[i][0] * fp.du[i][0];
        return s;
      }();
      const double Gs2 = r * sq_norm(fp.u, 1, d + 1) + [&] {
        double s = 0.0;
        for (int i = 0; i <= d; ++i) s += sq_norm(fp.du[i], 1, d + 1);
        return s;
      }();
      pt.rhs = bp.gamma * std::sqrt(Fs2 * Gs2);
      if (kappa > 0.0) pt.rhs -= kappa * r * E_kappa(bp, u);
      const double den = std::abs(pt.formula) + std::abs(pt.rhs);
      pt.margin = den > 0.0 ? (pt.formula - pt.rhs) / den : 0.0;

      // finite differences of b = B(u) in t and each x_i, one Richardson step
      if (!pt.singular) {
        const double b0 = bval(fp.u);
        const auto [bt, btt] = richardson([&](double s) { return bval(eval_flow(st, flow_at(st, t + s), x).u); }, b0, ht);
        (void)bt;
        double lt = 0.0, scale = std::abs(btt);
        for (int i = 0; i < d; ++i) {
          const AxisSystem& ax = sys.axis(i);
          double local = 1.0;
          if (std::isfinite(ax.lower())) local = std::min(local, x[i] - ax.lower());
          if (std::isfinite(ax.upper())) local = std::min(local, ax.upper() - x[i]);
          std::vector<double> xs_ = x;
          const auto [bx, bxx] = richardson(
              [&](double s) {
                xs_[i] = x[i] + s;
                return bval(eval_flow(st, fl, xs_).u);
              },
              b0, 1e-4 * local);
          const double p = ax.p(x[i]);
          const double first = (p * ax.logw_prime(x[i]) + 2.0 * ax.dp(x[i])) * p * bx;
          lt += -p * p * bxx - first;
          scale += p * p * std::abs(bxx) + std::abs(first);
        }
        pt.fd = btt - lt;
        pt.identity_relerr = scale > 0.0 ? std::abs(pt.fd - pt.formula) / scale : 0.0;
        rep.worst_identity_relerr = std::max(rep.worst_identity_relerr, pt.identity_relerr);
      }
      rep.worst_margin = std::min(rep.worst_margin, pt.margin);
      rep.min_v_term = std::min(rep.min_v_term, pt.v_term);
      ++rep.evaluated;
      rep.points.push_back(std::move(pt));
    }
  }
  if (rep.evaluated == 0) rep.worst_margin = rep.min_v_term = 0.0;
  return rep;
}

}  // namespace riesz
