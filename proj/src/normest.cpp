#include "riesz/normest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "riesz/errors.hpp"

namespace riesz {

namespace {

// ||R f||_p / ||f||_p over c in R^M, realized on a fixed grid:
// u = A c are the values of f, y_i = B_i c those of R_i f.
struct Problem {
  double p = 2.0;
  int d = 1;
  int M = 0;
  std::size_t G = 0;
  std::vector<double> w;
  std::vector<double> A;
  std::vector<std::vector<double>> B;
  std::vector<std::size_t> slots;  // flat CoeffFn index of each unknown
  std::vector<double> col_scale;   // coefficient = col_scale * unknown
};

struct Eval {
  std::vector<double> u;
  std::vector<std::vector<double>> y;
  std::vector<double> Y;  // |(y_1, ..., y_d)|
  double NA = 0.0;
  double NB = 0.0;
  double ratio() const { return NB / NA; }
  bool degenerate() const { return !(std::isfinite(NA) && std::isfinite(NB) && NA > 0.0 && NB > 0.0); }
};

void matvec(const std::vector<double>& A, std::size_t G, int M, const std::vector<double>& c, std::vector<double>& out) {
  out.assign(G, 0.0);
  for (std::size_t j = 0; j < G; ++j) {
    const double* row = A.data() + j * M;
    double s = 0.0;
    for (int m = 0; m < M; ++m) s += row[m] * c[m];
    out[j] = s;
  }
}

// out += A^T v
void matvec_t(const std::vector<double>& A, std::size_t G, int M, const std::vector<double>& v, std::vector<double>& out) {
  for (std::size_t j = 0; j < G; ++j) {
    if (v[j] == 0.0) continue;
    const double* row = A.data() + j * M;
    for (int m = 0; m < M; ++m) out[m] += row[m] * v[j];
  }
}

// |t|^{p-2} t, zero at zero
double dual_pow(double t, double p) { return t == 0.0 ? 0.0 : std::pow(std::abs(t), p - 2.0) * t; }

Eval evaluate(const Problem& P, const std::vector<double>& c) {
  Eval e;
  matvec(P.A, P.G, P.M, c, e.u);
  e.y.resize(P.d);
  for (int i = 0; i < P.d; ++i) matvec(P.B[i], P.G, P.M, c, e.y[i]);
  e.Y.assign(P.G, 0.0);
  double sa = 0.0, sb = 0.0;
  for (std::size_t j = 0; j < P.G; ++j) {
    double s = 0.0;
    for (int i = 0; i < P.d; ++i) s += e.y[i][j] * e.y[i][j];
    e.Y[j] = std::sqrt(s);
    sa += P.w[j] * std::pow(std::abs(e.u[j]), P.p);
    sb += P.w[j] * std::pow(e.Y[j], P.p);
  }
  e.NA = std::pow(sa, 1.0 / P.p);
  e.NB = std::pow(sb, 1.0 / P.p);
  return e;
}

std::vector<double> grad_NA(const Problem& P, const Eval& e) {
  std::vector<double> v(P.G), g(P.M, 0.0);
  const double s = std::pow(e.NA, 1.0 - P.p);
  for (std::size_t j = 0; j < P.G; ++j) v[j] = P.w[j] * dual_pow(e.u[j], P.p) * s;
  matvec_t(P.A, P.G, P.M, v, g);
  return g;
}

// Gradient of the mixed norm: the duality map of l^2 inside L^p.
std::vector<double> grad_NB(const Problem& P, const Eval& e) {
  std::vector<double> v(P.G), g(P.M, 0.0);
  const double s = std::pow(e.NB, 1.0 - P.p);
  for (int i = 0; i < P.d; ++i) {
    for (std::size_t j = 0; j < P.G; ++j)
      v[j] = e.Y[j] == 0.0 ? 0.0 : P.w[j] * std::pow(e.Y[j], P.p - 2.0) * e.y[i][j] * s;
    matvec_t(P.B[i], P.G, P.M, v, g);
  }
  return g;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void scale(std::vector<double>& a, double s) {
  for (double& x : a) x *= s;
}

std::vector<double> random_start(const Problem& P, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> c(P.M);
  for (double& x : c) x = g(rng);
  return c;
}

void normalize(std::vector<double>& c, const Eval& e) { scale(c, 1.0 / e.NA); }

// A 0-homogeneous objective: value and gradient at c.
struct Objective {
  std::function<double(const std::vector<double>&, std::vector<double>*)> fn;
};

struct Climb {
  std::vector<double> c;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// L-BFGS ascent with Armijo backtracking. The objective is scale invariant,
// so iterates are put back on ||A c||_p = 1 after every step. Every accepted
// step increases the value.
Climb lbfgs_maximize(const Problem& P, const Objective& obj, std::vector<double> c, int max_iter, double rel_tol) {
  constexpr int kMemory = 8;
  Climb out;
  normalize(c, evaluate(P, c));
  std::vector<double> g;
  double J = obj.fn(c, &g);
  std::vector<std::vector<double>> S, Yv;
  int quiet = 0;
  for (int it = 0; it < max_iter; ++it) {
    ++out.iterations;
    // two-loop recursion on -J
    std::vector<double> q(g);
    scale(q, -1.0);
    std::vector<double> alpha(S.size());
    for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
      alpha[k] = dot(S[k], q) / dot(Yv[k], S[k]);
      for (int m = 0; m < P.M; ++m) q[m] -= alpha[k] * Yv[k][m];
    }
    if (!S.empty()) scale(q, dot(S.back(), Yv.back()) / dot(Yv.back(), Yv.back()));
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double b = dot(Yv[k], q) / dot(Yv[k], S[k]);
      for (int m = 0; m < P.M; ++m) q[m] += S[k][m] * (alpha[k] - b);
    }
    std::vector<double> dir(q);
    scale(dir, -1.0);
    double slope = dot(g, dir);
    if (!(slope > 0.0)) {
      S.clear();
      Yv.clear();
      dir = g;
      scale(dir, 1.0 / std::max(1.0, std::sqrt(dot(g, g))));
      slope = dot(g, dir);
    }
    if (!(slope > 0.0)) {
      out.converged = true;
      break;
    }
    double t = 1.0, Jt = 0.0;
    std::vector<double> trial(P.M), gt;
    bool moved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      for (int m = 0; m < P.M; ++m) trial[m] = c[m] + t * dir[m];
      const Eval et = evaluate(P, trial);
      if (et.degenerate()) continue;
      normalize(trial, et);
      Jt = obj.fn(trial, &gt);
      if (std::isfinite(Jt) && Jt >= J + 1e-4 * t * slope) {
        moved = true;
        break;
      }
    }
    if (!moved) {
      out.converged = true;
      break;
    }
    std::vector<double> s(P.M), yk(P.M);
    for (int m = 0; m < P.M; ++m) {
      s[m] = trial[m] - c[m];
      yk[m] = g[m] - gt[m];  // gradient difference of -J
    }
    if (dot(s, yk) > 1e-16 * std::sqrt(dot(s, s) * dot(yk, yk))) {
      S.push_back(s);
      Yv.push_back(yk);
      if (static_cast<int>(S.size()) > kMemory) {
        S.erase(S.begin());
        Yv.erase(Yv.begin());
      }
    }
    const double gain = Jt - J;
    c = std::move(trial);
    g = std::move(gt);
    J = Jt;
    quiet = gain < rel_tol * std::abs(J) ? quiet + 1 : 0;
    if (quiet >= 3) {
      out.converged = true;
      break;
    }
  }
  out.c = std::move(c);
  out.value = J;
  return out;
}

// ||R f||_p / ||f||_p and its gradient.
Objective ratio_objective(const Problem& P) {
  return {[&P](const std::vector<double>& c, std::vector<double>* grad) {
    const Eval e = evaluate(P, c);
    if (grad) {
      std::vector<double> gb = grad_NB(P, e), ga = grad_NA(P, e);
      const double J = e.ratio();
      for (int m = 0; m < P.M; ++m) gb[m] = (gb[m] - J * ga[m]) / e.NA;
      *grad = std::move(gb);
    }
    return e.ratio();
  }};
}

// <z, c> / ||A c||_p, the linearized numerator of a Boyd step.
Objective dual_objective(const Problem& P, const std::vector<double>& z) {
  return {[&P, &z](const std::vector<double>& c, std::vector<double>* grad) {
    const Eval e = evaluate(P, c);
    const double zc = dot(z, c), v = zc / e.NA;
    if (grad) {
      const std::vector<double> ga = grad_NA(P, e);
      grad->resize(P.M);
      for (int m = 0; m < P.M; ++m) (*grad)[m] = (z[m] - v * ga[m]) / e.NA;
    }
    return v;
  }};
}

struct RunResult {
  std::vector<double> c;
  double ratio = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

// Boyd's power iteration: z = grad ||B c||_p, then c <- argmax <z, c> / ||A c||_p.
// By convexity ||B c'||_p >= <z, c'> >= <z, c> = ||B c||_p, so the ratio never
// decreases as long as the inner maximization starts at c.
RunResult run_boyd(const Problem& P, std::vector<double> c, const NormOptions& opt) {
  constexpr int kInner = 20;
  RunResult r;
  normalize(c, evaluate(P, c));
  Eval e = evaluate(P, c);
  r.history.push_back(e.ratio());
  for (int it = 0; it < opt.max_iter; ++it) {
    const std::vector<double> z = grad_NB(P, e);
    const Climb step = lbfgs_maximize(P, dual_objective(P, z), c, kInner, 1e-12);
    Eval en = evaluate(P, step.c);
    ++r.iterations;
    if (en.degenerate()) break;
    const double prev = e.ratio(), cur = en.ratio();
    r.history.push_back(cur);
    if (cur >= prev) {
      c = step.c;
      e = std::move(en);
    }
    if (cur - prev < opt.rel_tol * prev) {
      r.converged = true;
      break;
    }
  }
  r.c = c;
  r.ratio = e.ratio();
  return r;
}

RunResult run_ascent(const Problem& P, std::vector<double> c, const NormOptions& opt) {
  const Climb cl = lbfgs_maximize(P, ratio_objective(P), std::move(c), opt.max_iter, 1e-12);
  RunResult r;
  r.c = cl.c;
  r.ratio = cl.value;
  r.iterations = cl.iterations;
  r.converged = cl.converged;
  return r;
}

std::vector<std::size_t> search_slots(const ProductSystem& sys, int N) {
  const CoeffFn probe(sys, N);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < probe.size(); ++j) {
    const MultiIndex k = probe.multi(j);
    if (sys.pi_removes_ground() && std::all_of(k.begin(), k.end(), [](int v) { return v == 0; })) continue;
    out.push_back(j);
  }
  return out;
}

CoeffFn to_coeff(const ProductSystem& sys, int N, const std::vector<std::size_t>& slots, const std::vector<double>& c,
                 const std::vector<double>* col_scale = nullptr) {
  CoeffFn f(sys, N);
  for (std::size_t m = 0; m < slots.size(); ++m) f.data()[slots[m]] = c[m] * (col_scale ? (*col_scale)[m] : 1.0);
  return f;
}

// Node count per axis: converge_norm on a random element for both f and
// R f, starting at the analysis resolution and capped by max_grid.
int choose_nodes(const ProductSystem& sys, int N, double p, const CoeffFn& f, const NormOptions& opt) {
  const int start = 2 * N + 2;
  const int d = sys.dim();
  // half the rule limit, so that the doubled grid used at the end exists
  const int limit = AxisSystem::kMaxDegree / 2;
  int cap = start;
  while (2 * cap <= limit && std::pow(2.0 * cap, d) <= static_cast<double>(opt.max_grid)) cap *= 2;
  ConvergeOptions co;
  co.start_nodes = start;
  co.max_nodes_per_axis = limit;
  co.max_grid_size = opt.max_grid;
  int n = start;
  try {
    n = std::max(n, converge_norm(sys.axes(), GridEvaluator([&](const GridPtr& g) { return synthesize(f, g); }), p,
                                  opt.grid_tol, co)
                        .nodes_per_axis);
    n = std::max(n, converge_norm(sys.axes(), GridEvaluator([&](const GridPtr& g) { return riesz_vector(f, g); }),
                                  p, opt.grid_tol, co)
                        .nodes_per_axis);
  } catch (const ConvergenceError&) {
    n = cap;
  }
  return n;
}

Problem build_problem(const ProductSystem& sys, int N, double p, const std::vector<std::size_t>& slots,
                      const GridPtr& grid) {
  Problem P;
  P.p = p;
  P.d = sys.dim();
  P.M = static_cast<int>(slots.size());
  P.G = grid->size();
  P.slots = slots;
  P.w.resize(P.G);
  for (std::size_t j = 0; j < P.G; ++j) P.w[j] = grid->weight(j);
  std::vector<Matrix> phi, frame;
  for (int i = 0; i < P.d; ++i) {
    phi.push_back(axis_matrix(sys.axis(i), AxisBasis::Phi, grid->axis(i).nodes, N));
    frame.push_back(axis_matrix(sys.axis(i), AxisBasis::Frame, grid->axis(i).nodes, N));
  }
  const CoeffFn probe(sys, N);
  std::vector<MultiIndex> ks;
  std::vector<std::vector<double>> fac(P.d);
  for (std::size_t s : slots) {
    const MultiIndex k = probe.multi(s);
    const double lam = sys.lambda(k);
    for (int i = 0; i < P.d; ++i)
      fac[i].push_back(k[i] == 0 ? 0.0 : std::sqrt(sys.axis(i).ladder_norm_sq(k[i]) / lam));
    ks.push_back(k);
  }
  P.A.assign(P.G * P.M, 0.0);
  P.B.assign(P.d, std::vector<double>(P.G * P.M, 0.0));
  std::vector<int> node(P.d);
  for (std::size_t j = 0; j < P.G; ++j) {
    for (int i = 0; i < P.d; ++i) node[i] = static_cast<int>(grid->index(j, i));
    for (int m = 0; m < P.M; ++m) {
      const MultiIndex& k = ks[m];
      double a = 1.0;
      for (int i = 0; i < P.d; ++i) a *= phi[i](node[i], k[i]);
      P.A[j * P.M + m] = a;
      for (int i = 0; i < P.d; ++i) {
        if (fac[i][m] == 0.0) continue;
        double b = fac[i][m] * frame[i](node[i], k[i]);
        for (int l = 0; l < P.d; ++l)
          if (l != i) b *= phi[l](node[l], k[l]);
        P.B[i][j * P.M + m] = b;
      }
    }
  }
  // Unknowns are measured in units of ||phi_k||_p; without this the ratio is
  // badly scaled in the high modes for large p.
  P.col_scale.assign(P.M, 0.0);
  for (std::size_t j = 0; j < P.G; ++j)
    for (int m = 0; m < P.M; ++m) P.col_scale[m] += P.w[j] * std::pow(std::abs(P.A[j * P.M + m]), p);
  for (double& s : P.col_scale) s = 1.0 / std::pow(s, 1.0 / p);
  for (std::size_t j = 0; j < P.G; ++j)
    for (int m = 0; m < P.M; ++m) {
      P.A[j * P.M + m] *= P.col_scale[m];
      for (int i = 0; i < P.d; ++i) P.B[i][j * P.M + m] *= P.col_scale[m];
    }
  return P;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double riesz_ratio(const CoeffFn& f, double p, const GridPtr& grid) {
  return lp_norm(riesz_vector(f, grid), p) / lp_norm(synthesize(f, grid), p);
}

double paper_norm_bound(const ProductSystem& sys, double p) { return sys.norm_bound(p); }

double arcozzi_bound(double p) { return 2.0 * (pstar(p) - 1.0); }

NormEstimate pnorm_lower_bound(const ProductSystem& sys, double p, int N, NormMethod method, const NormOptions& opt) {
  if (!std::isfinite(p) || p <= 1.0) throw ArgumentError("pnorm_lower_bound: p must be a finite number > 1");
  if (N < 0) throw ArgumentError("pnorm_lower_bound: N must be >= 0");
  if (opt.restarts < 1 || opt.max_iter < 1) throw ArgumentError("pnorm_lower_bound: restarts and max_iter must be >= 1");
  const std::vector<std::size_t> slots = search_slots(sys, N);
  if (slots.empty()) throw EstimationError("pnorm_lower_bound: nothing left to search after removing the ground state");

  NormEstimate est;
  est.p = p;
  est.system = sys.describe();
  est.d = sys.dim();
  est.N = N;
  est.method = method;
  est.paper_bound = paper_norm_bound(sys, p);

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::vector<double> c0(slots.size());
  for (double& x : c0) x = gauss(rng);
  const int n = choose_nodes(sys, N, p, to_coeff(sys, N, slots, c0), opt);
  est.nodes_per_axis = n;
  const GridPtr grid = make_grid(sys.axes(), n);
  const Problem P = build_problem(sys, N, p, slots, grid);

  RunResult best;
  bool found = false;
  const int starts = method == NormMethod::Boyd ? 1 : opt.restarts;
  int good = 0;
  for (int attempt = 0; good < starts && attempt < 2 * opt.restarts; ++attempt) {
    std::vector<double> c = attempt == 0 ? c0 : random_start(P, rng);
    if (evaluate(P, c).degenerate()) {
      ++est.degenerate_starts;
      continue;
    }
    ++good;
    RunResult r = method == NormMethod::Boyd ? run_boyd(P, c, opt) : run_ascent(P, c, opt);
    if (!std::isfinite(r.ratio)) {
      ++est.degenerate_starts;
      continue;
    }
    est.iterations += r.iterations;
    if (!found || r.ratio > best.ratio) {
      best = std::move(r);
      found = true;
    }
  }
  if (!found) throw EstimationError("pnorm_lower_bound: every start was degenerate for " + est.system);

  est.converged = best.converged;
  est.history = std::move(best.history);
  est.grid_ratio = best.ratio;
  const CoeffFn f = to_coeff(sys, N, slots, best.c, &P.col_scale);
  est.best_coeffs.assign(f.data().begin(), f.data().end());
  est.lower_bound = riesz_ratio(f, p, make_grid(sys.axes(), 2 * n));
  return est;
}

int suite_N(int N, int d, std::size_t max_coeffs) {
  int n = N;
  while (n > 1 && std::pow(n + 1.0, d) > static_cast<double>(max_coeffs)) --n;
  return n;
}

bool BoundSuiteReport::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const BoundCell& c) { return c.ok; });
}

void BoundSuiteReport::require() const {
  std::ostringstream msg;
  int bad = 0;
  for (const auto& c : cells) {
    if (c.ok) continue;
    ++bad;
    msg << "\n  " << c.family.describe() << " d=" << c.d << " N=" << c.N << " p=" << c.p << " seed=" << c.seed
        << ": lower bound " << c.lower_bound << " vs " << c.paper_bound;
    if (!c.error.empty()) msg << " (" << c.error << ")";
  }
  if (bad) throw EstimationError("norm bound violated in " + std::to_string(bad) + " cell(s):" + msg.str());
}

BoundSuiteReport bound_suite(const BoundSuiteConfig& cfg) {
  BoundSuiteReport rep;
  for (const Family& fam : cfg.systems)
    for (int d : cfg.d_grid)
      for (double p : cfg.p_grid) {
        BoundCell c;
        c.family = fam;
        c.d = d;
        c.N = suite_N(cfg.N, d, cfg.max_coeffs);
        c.p = p;
        c.seed = splitmix64(cfg.seed ^ splitmix64(rep.cells.size()));
        rep.cells.push_back(c);
      }

  auto run = [&](BoundCell& c) {
    try {
      const ProductSystem sys(c.family, c.d);
      NormOptions o = cfg.options;
      o.seed = c.seed;
      c.boyd = pnorm_lower_bound(sys, c.p, c.N, NormMethod::Boyd, o);
      c.ascent = pnorm_lower_bound(sys, c.p, c.N, NormMethod::Ascent, o);
      c.lower_bound = std::max(c.boyd.lower_bound, c.ascent.lower_bound);
      c.paper_bound = paper_norm_bound(sys, c.p);
      c.ok = c.lower_bound <= c.paper_bound;
      if (c.family.tag == FamilyTag::HermitePoly) {
        c.arcozzi = arcozzi_bound(c.p);
        c.ok = c.ok && c.lower_bound <= c.arcozzi;
      }
    } catch (const std::exception& ex) {
      c.ok = false;
      c.error = ex.what();
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rep.cells.size(); i = next++) run(rep.cells[i]);
  };
  const int nw = std::max(1, std::min<int>(cfg.workers, static_cast<int>(rep.cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nw; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const Family& fam : cfg.systems)
    for (double p : cfg.p_grid) {
      DimensionSpread s;
      s.family = fam;
      s.p = p;
      for (const auto& c : rep.cells)
        if (c.family == fam && c.p == p && c.error.empty()) s.lower_bounds.push_back(c.lower_bound);
      if (!s.lower_bounds.empty()) {
        const auto [lo, hi] = std::minmax_element(s.lower_bounds.begin(), s.lower_bounds.end());
        s.spread = *hi - *lo;
      }
      rep.spread.push_back(s);
    }
  return rep;
}

double H_constant(double s) {
  if (!(s > 0.0)) throw ArgumentError("H_constant: s must be positive");
  return (s + 4.0) * std::pow(s, -s / (s + 1.0));
}

ConstantsRow polarization_row(double p) {
  if (!std::isfinite(p) || p < 2.0) throw ArgumentError("polarization_row: p must be >= 2");
  ConstantsRow r;
  r.p = p;
  r.q = p / (p - 1.0);
  const double q = r.q;
  r.gamma = q * (q - 1.0) / 8.0;
  r.polarization = (1.0 + r.gamma) / (2.0 * r.gamma) * (std::pow(p / q, 1.0 / p) + std::pow(q / p, 1.0 / q));
  r.closed_form = (8.0 + q * (q - 1.0)) / 2.0 * std::pow(q - 1.0, 1.0 / q - 1.0) * (p - 1.0);
  r.relaxed = (q + 3.0) * std::pow(q - 1.0, 1.0 / q - 1.0) * (pstar(p) - 1.0);
  r.target = 6.0 * (pstar(p) - 1.0);
  constexpr double eps = 1e-12;
  r.ok = std::abs(r.polarization - r.closed_form) <= eps * r.closed_form && r.closed_form <= r.relaxed * (1 + eps) &&
         r.relaxed <= r.target * (1 + eps);
  return r;
}

ConstantsReport constants_report(int grid_points, int p_points) {
  if (grid_points < 3 || p_points < 2) throw ArgumentError("constants_report: grid too small");
  ConstantsReport rep;
  rep.H_at_1 = H_constant(1.0);
  int best = 1;
  for (int j = 1; j <= grid_points; ++j)
    if (H_constant(static_cast<double>(j) / grid_points) > H_constant(static_cast<double>(best) / grid_points))
      best = j;
  const double lo = static_cast<double>(std::max(best - 1, 1)) / grid_points;
  const double hi = static_cast<double>(std::min(best + 1, grid_points)) / grid_points;
  const auto [s, neg] =
      boost::math::tools::brent_find_minima([](double x) { return -H_constant(x); }, lo, hi, 52);
  rep.argmax = s;
  rep.sup_H = -neg;
  rep.interval_bound = 22.0 / 5.0 * std::pow(7.0 / 20.0, -2.0 / 7.0);
  rep.argmax_in_interval = rep.argmax > 7.0 / 20.0 && rep.argmax < 2.0 / 5.0;
  rep.sup_below_6 = rep.sup_H < 6.0;
  rep.rows_ok = true;
  for (int j = 0; j < p_points; ++j) {
    const double p = 2.0 * std::pow(500.0, static_cast<double>(j) / (p_points - 1));
    rep.rows.push_back(polarization_row(p));
    rep.rows_ok = rep.rows_ok && rep.rows.back().ok;
  }
  return rep;
}

}  // namespace riesz
