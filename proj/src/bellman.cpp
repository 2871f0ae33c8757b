#include "riesz/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "riesz/errors.hpp"
#include "riesz/quadgrid.hpp"

namespace riesz {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// s^e with the conventions 0^0 = 1 and 0^e = 0 for e > 0, inf for e < 0.
double pw(double s, double e) { return std::pow(s, e); }

const Mollifier& rule_for(const BellmanParams& bp, const Mollifier* rule) {
  if (bp.dim() > Mollifier::kMaxDim)
    throw UnsupportedError("mollified Bellman function: m1 + m2 = " + std::to_string(bp.dim()) +
                           " exceeds " + std::to_string(Mollifier::kMaxDim));
  const Mollifier& r = rule ? *rule : Mollifier::standard(bp.dim());
  if (r.dim() != bp.dim()) throw ArgumentError("mollifier dimension does not match m1 + m2");
  return r;
}

// Gradient of B at a flat point.
void grad_flat(const BellmanParams& bp, std::span<const double> xi, std::span<double> out) {
  const auto z = xi.subspan(0, bp.m1), e = xi.subspan(bp.m1, bp.m2);
  const double s1 = norm(z), s2 = norm(e);
  const BetaDerivs b = beta_derivs(bp, s1, s2);
  // grad_zeta = beta_1 zeta / (2 s1), which vanishes with s1 since beta_1 = O(s1)
  const double f1 = s1 > 0.0 ? 0.5 * b.d1 / s1 : 0.0;
  const double f2 = s2 > 0.0 ? 0.5 * b.d2 / s2 : 0.0;
  for (int i = 0; i < bp.m1; ++i) out[i] = f1 * z[i];
  for (int i = 0; i < bp.m2; ++i) out[bp.m1 + i] = f2 * e[i];
}

double B_flat(const BellmanParams& bp, std::span<const double> xi) {
  return 0.5 * beta(bp, norm(xi.subspan(0, bp.m1)), norm(xi.subspan(bp.m1, bp.m2)));
}

// Hessian without the singular-set guard; non-finite on the singular set.
Matrix hess_flat(const BellmanParams& bp, std::span<const double> xi) {
  const int n = bp.dim();
  const auto z = xi.subspan(0, bp.m1), e = xi.subspan(bp.m1, bp.m2);
  const double s1 = norm(z), s2 = norm(e);
  const BetaDerivs b = beta_derivs(bp, s1, s2);
  std::vector<double> u(n, 0.0), v(n, 0.0);
  for (int i = 0; i < bp.m1; ++i) u[i] = z[i] / s1;
  for (int i = 0; i < bp.m2; ++i) v[bp.m1 + i] = e[i] / s2;
  const double t1 = b.d1 / s1, t2 = b.d2 / s2;
  Matrix H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double h = 0.0;
      const bool zi = i < bp.m1, zj = j < bp.m1;
      if (zi && zj) h = b.d11 * u[i] * u[j] + t1 * ((i == j ? 1.0 : 0.0) - u[i] * u[j]);
      else if (!zi && !zj) h = b.d22 * v[i] * v[j] + t2 * ((i == j ? 1.0 : 0.0) - v[i] * v[j]);
      else h = b.d12 * (u[i] * v[j] + u[j] * v[i]);
      H(i, j) = H(j, i) = 0.5 * h;
    }
  return H;
}

double quad_form(const Matrix& H, std::span<const double> w) {
  double s = 0.0;
  for (int i = 0; i < H.rows; ++i)
    for (int j = 0; j < H.cols; ++j) s += H(i, j) * w[i] * w[j];
  return s;
}

double amgm_rhs(const BellmanParams& bp, std::span<const double> w) {
  return bp.gamma * norm(w.subspan(0, bp.m1)) * norm(w.subspan(bp.m1, bp.m2));
}

// Minimum over unit omega of the Hessian margin for kappa = 0. With
// c1^2 = x the squared radial share of omega_1 (likewise y for omega_2) the
// form is A r1^2 + 2 C r1 r2 + D r2^2 on r1^2 + r2^2 = 1, C <= 0 once the
// sign of the mixed term is chosen adversarially, and its minimum over the
// quarter circle is the smaller eigenvalue of [[A, C], [C, D]].
double exact_hess_margin(const BellmanParams& bp, const BetaDerivs& b, double s1, double s2) {
  const double t1 = b.d1 / s1, t2 = b.d2 / s2;
  auto lam = [&](double x, double y) {
    const double A = 0.5 * (b.d11 * x + t1 * (1.0 - x));
    const double D = 0.5 * (b.d22 * y + t2 * (1.0 - y));
    const double C = -0.5 * (std::abs(b.d12) * std::sqrt(x * y) + bp.gamma);
    return 0.5 * (A + D) - std::hypot(0.5 * (A - D), C);
  };
  // a one-dimensional block has no tangential directions
  const bool fx = bp.m1 == 1, fy = bp.m2 == 1;
  const int G = 40;
  double best = std::numeric_limits<double>::infinity(), bx = 1.0, by = 1.0;
  for (int i = 0; i <= (fx ? 0 : G); ++i)
    for (int j = 0; j <= (fy ? 0 : G); ++j) {
      const double x = fx ? 1.0 : double(i) / G, y = fy ? 1.0 : double(j) / G;
      const double v = lam(x, y);
      if (v < best) best = v, bx = x, by = y;
    }
  // compass search from the best grid cell
  for (double h = 1.0 / G; h > 1e-13; h *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (auto [dx, dy] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
        const double x = fx ? 1.0 : std::clamp(bx + dx * h, 0.0, 1.0);
        const double y = fy ? 1.0 : std::clamp(by + dy * h, 0.0, 1.0);
        const double v = lam(x, y);
        if (v < best) {
          best = v, bx = x, by = y;
          moved = true;
        }
      }
    }
  }
  return best;
}

}  // namespace

BellmanParams::BellmanParams(double p_in, int m1_in, int m2_in, double kappa_in)
    : m1(m1_in), m2(m2_in), kappa(kappa_in) {
  if (!std::isfinite(p_in) || p_in <= 1.0) throw ArgumentError("Bellman function: p must be a finite number > 1");
  if (m1 < 1 || m2 < 1) throw ArgumentError("Bellman function: m1 and m2 must be >= 1");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw ArgumentError("Bellman function: kappa must lie in [0, 1)");
  swapped = p_in < 2.0;
  p = swapped ? p_in / (p_in - 1.0) : p_in;
  q = p / (p - 1.0);
  gamma = q * (q - 1.0) / 8.0;
}

int beta_branch(const BellmanParams& bp, double s1, double s2) {
  return pw(s1, bp.p) <= pw(s2, bp.q) ? 1 : 2;
}

double beta(const BellmanParams& bp, double s1, double s2) {
  if (!(s1 >= 0.0 && s2 >= 0.0)) throw ArgumentError("beta: arguments must be >= 0");
  const double a = pw(s1, bp.p), b = pw(s2, bp.q);
  if (a <= b) return a + b + bp.gamma * s1 * s1 * pw(s2, 2.0 - bp.q);
  return a + b + bp.gamma * (2.0 / bp.p * a + (2.0 / bp.q - 1.0) * b);
}

BetaDerivs beta_derivs(const BellmanParams& bp, double s1, double s2) {
  if (!(s1 >= 0.0 && s2 >= 0.0)) throw ArgumentError("beta: arguments must be >= 0");
  const double p = bp.p, q = bp.q, g = bp.gamma;
  BetaDerivs d;
  d.value = beta(bp, s1, s2);
  d.branch = beta_branch(bp, s1, s2);
  if (d.branch == 1) {
    d.d1 = p * pw(s1, p - 1.0) + 2.0 * g * s1 * pw(s2, 2.0 - q);
    d.d2 = q * pw(s2, q - 1.0) + g * (2.0 - q) * s1 * s1 * pw(s2, 1.0 - q);
    d.d11 = p * (p - 1.0) * pw(s1, p - 2.0) + 2.0 * g * pw(s2, 2.0 - q);
    d.d12 = 2.0 * g * (2.0 - q) * s1 * pw(s2, 1.0 - q);
    d.d22 = q * (q - 1.0) * pw(s2, q - 2.0) + g * (2.0 - q) * (1.0 - q) * s1 * s1 * pw(s2, -q);
    // at s1 = 0 the gamma-terms vanish identically in s2
    if (s1 == 0.0) {
      d.d2 = q * pw(s2, q - 1.0);
      d.d12 = 0.0;
      d.d22 = q * (q - 1.0) * pw(s2, q - 2.0);
    }
  } else {
    const double c1 = p + 2.0 * g, c2 = q + g * (2.0 - q);
    d.d1 = c1 * pw(s1, p - 1.0);
    d.d2 = c2 * pw(s2, q - 1.0);
    d.d11 = c1 * (p - 1.0) * pw(s1, p - 2.0);
    d.d12 = 0.0;
    d.d22 = c2 * (q - 1.0) * pw(s2, q - 2.0);
  }
  return d;
}

std::vector<double> BellmanPoint::flat() const {
  std::vector<double> xi(zeta);
  xi.insert(xi.end(), eta.begin(), eta.end());
  return xi;
}

BellmanPoint BellmanPoint::split(const BellmanParams& bp, std::span<const double> xi) {
  if (static_cast<int>(xi.size()) != bp.dim()) throw ArgumentError("Bellman point: expected m1 + m2 coordinates");
  return {std::vector<double>(xi.begin(), xi.begin() + bp.m1), std::vector<double>(xi.begin() + bp.m1, xi.end())};
}

namespace {
void check_point(const BellmanParams& bp, const BellmanPoint& pt) {
  if (static_cast<int>(pt.zeta.size()) != bp.m1 || static_cast<int>(pt.eta.size()) != bp.m2)
    throw ArgumentError("Bellman point: dimensions do not match (m1, m2)");
}
}  // namespace

double bellman_B(const BellmanParams& bp, const BellmanPoint& pt) {
  check_point(bp, pt);
  return 0.5 * beta(bp, norm(pt.zeta), norm(pt.eta));
}

std::vector<double> grad_B(const BellmanParams& bp, const BellmanPoint& pt) {
  check_point(bp, pt);
  const auto xi = pt.flat();
  std::vector<double> g(xi.size());
  grad_flat(bp, xi, g);
  return g;
}

double singular_distance(const BellmanParams& bp, const BellmanPoint& pt) {
  check_point(bp, pt);
  const double s1 = norm(pt.zeta), s2 = norm(pt.eta);
  const double r = std::hypot(s1, s2);
  if (r == 0.0) return 0.0;
  const double a = pw(s1, bp.p), b = pw(s2, bp.q);
  return std::min({s1 / r, s2 / r, std::abs(a - b) / (a + b)});
}

Matrix hess_B(const BellmanParams& bp, const BellmanPoint& pt) {
  if (singular_distance(bp, pt) <= kSingularExclusion)
    throw SingularRegionError("Hessian of the Bellman function requested near its singular set");
  return hess_flat(bp, pt.flat());
}

std::vector<double> grad_B_fd(const BellmanParams& bp, const BellmanPoint& pt) {
  check_point(bp, pt);
  auto xi = pt.flat();
  const double h = 1e-5 * (1.0 + norm(xi));
  std::vector<double> g(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double x0 = xi[i];
    xi[i] = x0 + h;
    const double fp = B_flat(bp, xi);
    xi[i] = x0 - h;
    const double fm = B_flat(bp, xi);
    xi[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix hess_B_fd(const BellmanParams& bp, const BellmanPoint& pt) {
  check_point(bp, pt);
  auto xi = pt.flat();
  const int n = bp.dim();
  const double h = 1e-5 * (1.0 + norm(xi));
  auto at = [&](int i, double di, int j, double dj) {
    auto y = xi;
    y[i] += di;
    y[j] += dj;
    return B_flat(bp, y);
  };
  const double f0 = B_flat(bp, xi);
  Matrix H(n, n);
  for (int i = 0; i < n; ++i) {
    H(i, i) = (at(i, h, i, 0) - 2.0 * f0 + at(i, -h, i, 0)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      H(i, j) = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h);
      H(j, i) = H(i, j);
    }
  }
  return H;
}

Mollifier::Mollifier(int m, int n_radial, int n_angular) : m_(m) {
  if (m < 1 || m > kMaxDim) throw UnsupportedError("mollifier: dimension must be 1.." + std::to_string(kMaxDim));
  if (n_radial < 2 || n_angular < 2) throw ArgumentError("mollifier: need at least 2 radial and 2 angular nodes");
  const QuadRule rad = gauss_legendre(n_radial, 0.0, 1.0);
  // directions with their share of the sphere's area
  std::vector<std::vector<double>> dirs;
  std::vector<double> dw;
  const double pi = std::numbers::pi;
  if (m == 1) {
    dirs = {{1.0}, {-1.0}};
    dw = {1.0, 1.0};
  } else if (m == 2) {
    for (int j = 0; j < n_angular; ++j) {
      const double th = (j + 0.5) * 2.0 * pi / n_angular;
      dirs.push_back({std::cos(th), std::sin(th)});
      dw.push_back(2.0 * pi / n_angular);
    }
  } else {
    const QuadRule zr = gauss_legendre(std::max(2, n_angular / 2));
    for (std::size_t a = 0; a < zr.size(); ++a) {
      const double z = zr.nodes[a], rho = std::sqrt(1.0 - z * z);
      for (int j = 0; j < n_angular; ++j) {
        const double ph = (j + 0.5) * 2.0 * pi / n_angular;
        dirs.push_back({rho * std::cos(ph), rho * std::sin(ph), z});
        dw.push_back(zr.weights[a] * 2.0 * pi / n_angular);
      }
    }
  }
  double mass = 0.0;
  for (std::size_t k = 0; k < rad.size(); ++k) {
    const double r = rad.nodes[k];
    const double wr = rad.weights[k] * std::pow(r, m - 1) * std::exp(-1.0 / (1.0 - r * r));
    for (std::size_t a = 0; a < dirs.size(); ++a) {
      for (int i = 0; i < m; ++i) nodes_.push_back(r * dirs[a][i]);
      weights_.push_back(wr * dw[a]);
      mass += wr * dw[a];
    }
  }
  for (double& w : weights_) w /= mass;
  // c_m itself from a finer radial rule; the sphere's area closes the count
  const QuadRule fine = gauss_legendre(64, 0.0, 1.0);
  double radial = 0.0;
  for (std::size_t k = 0; k < fine.size(); ++k) {
    const double r = fine.nodes[k];
    radial += fine.weights[k] * std::pow(r, m - 1) * std::exp(-1.0 / (1.0 - r * r));
  }
  const double area = m == 1 ? 2.0 : (m == 2 ? 2.0 * pi : 4.0 * pi);
  c_m_ = 1.0 / (area * radial);
  mass_error_ = std::abs(c_m_ * mass - 1.0);
}

const Mollifier& Mollifier::standard(int m) {
  static std::mutex mu;
  static std::map<int, Mollifier> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, Mollifier(m)).first;
  return it->second;
}

double mollified_B(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule) {
  check_point(bp, pt);
  if (bp.kappa == 0.0) return bellman_B(bp, pt);
  const Mollifier& r = rule_for(bp, rule);
  const auto xi = pt.flat();
  std::vector<double> y(xi.size());
  double s = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const auto sj = r.node(j);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = xi[i] - bp.kappa * sj[i];
    s += r.weight(j) * B_flat(bp, y);
  }
  return s;
}

std::vector<double> mollified_grad_B(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule) {
  check_point(bp, pt);
  if (bp.kappa == 0.0) return grad_B(bp, pt);
  const Mollifier& r = rule_for(bp, rule);
  const auto xi = pt.flat();
  std::vector<double> y(xi.size()), g(xi.size()), out(xi.size(), 0.0);
  for (std::size_t j = 0; j < r.size(); ++j) {
    const auto sj = r.node(j);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = xi[i] - bp.kappa * sj[i];
    grad_flat(bp, y, g);
    for (std::size_t i = 0; i < y.size(); ++i) out[i] += r.weight(j) * g[i];
  }
  return out;
}

Matrix mollified_hess_B(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule) {
  check_point(bp, pt);
  if (bp.kappa == 0.0) return hess_B(bp, pt);
  const Mollifier& r = rule_for(bp, rule);
  const auto xi = pt.flat();
  const int n = bp.dim();
  std::vector<double> y(n);
  Matrix out(n, n);
  for (std::size_t j = 0; j < r.size(); ++j) {
    const auto sj = r.node(j);
    for (int i = 0; i < n; ++i) y[i] = xi[i] - bp.kappa * sj[i];
    const Matrix H = hess_flat(bp, y);
    // the singular set is null; a node landing on it exactly is skipped
    if (!std::all_of(H.a.begin(), H.a.end(), [](double v) { return std::isfinite(v); })) continue;
    for (std::size_t k = 0; k < out.a.size(); ++k) out.a[k] += r.weight(j) * H.a[k];
  }
  return out;
}

double E_kappa(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule) {
  check_point(bp, pt);
  if (bp.kappa == 0.0) return 0.0;
  const Mollifier& r = rule_for(bp, rule);
  const auto xi = pt.flat();
  std::vector<double> y(xi.size()), g(xi.size());
  double s = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const auto sj = r.node(j);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = xi[i] - bp.kappa * sj[i];
    grad_flat(bp, y, g);
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * sj[i];
    s -= r.weight(j) * dot;
  }
  return s;
}

namespace {
BellmanPoint axis_point(const BellmanParams& bp, double s1, double s2) {
  BellmanPoint pt{std::vector<double>(bp.m1, 0.0), std::vector<double>(bp.m2, 0.0)};
  pt.zeta[0] = s1;
  pt.eta[0] = s2;
  return pt;
}
}  // namespace

double beta_kappa(const BellmanParams& bp, double s1, double s2, const Mollifier* rule) {
  if (!(s1 >= 0.0 && s2 >= 0.0)) throw ArgumentError("beta: arguments must be >= 0");
  return 2.0 * mollified_B(bp, axis_point(bp, s1, s2), rule);
}

std::pair<double, double> beta_kappa_grad(const BellmanParams& bp, double s1, double s2, const Mollifier* rule) {
  if (!(s1 >= 0.0 && s2 >= 0.0)) throw ArgumentError("beta: arguments must be >= 0");
  const auto g = mollified_grad_B(bp, axis_point(bp, s1, s2), rule);
  return {2.0 * g[0], 2.0 * g[bp.m1]};
}

MarginReport check_hess_lower(const BellmanParams& bp, const BellmanPoint& pt, int trials, std::uint64_t seed) {
  check_point(bp, pt);
  const Matrix H = bp.kappa == 0.0 ? hess_B(bp, pt) : mollified_hess_B(bp, pt);
  const int n = bp.dim();
  MarginReport rep;
  rep.sampled = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> w(n);
  auto consider = [&](const std::vector<double>& dir) {
    const double m = quad_form(H, dir) - amgm_rhs(bp, dir);
    if (m < rep.sampled) {
      rep.sampled = m;
      rep.worst_direction = dir;
    }
  };
  for (int t = 0; t < trials; ++t) {
    for (double& x : w) x = g(rng);
    const double nw = norm(w);
    if (nw == 0.0) continue;
    for (double& x : w) x /= nw;
    consider(w);
  }
  rep.margin = rep.sampled;
  if (bp.kappa == 0.0) {
    const double s1 = norm(pt.zeta), s2 = norm(pt.eta);
    rep.exact = exact_hess_margin(bp, beta_derivs(bp, s1, s2), s1, s2);
    rep.margin = std::min(rep.margin, rep.exact);
  } else {
    rep.exact = rep.sampled;
  }
  return rep;
}

double check_grad_radial(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule) {
  check_point(bp, pt);
  const auto xi = pt.flat();
  const auto g = mollified_grad_B(bp, pt, rule);
  double dot = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) dot += g[i] * xi[i];
  const double corr = bp.kappa == 0.0 ? 0.0 : bp.kappa * E_kappa(bp, pt, rule);
  return dot + corr - bp.gamma * norm(pt.zeta) * norm(pt.eta);
}

double E_growth_ratio(const BellmanParams& bp, const BellmanPoint& pt, const Mollifier* rule) {
  if (bp.kappa == 0.0) return 0.0;
  const double s1 = norm(pt.zeta), s2 = norm(pt.eta);
  const double den = pw(s1, bp.p - 1.0) + s2 + pw(s2, bp.q - 1.0) + pw(bp.kappa, bp.q - 1.0);
  return std::abs(E_kappa(bp, pt, rule)) / den;
}

}  // namespace riesz
