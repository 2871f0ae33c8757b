#include "riesz/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "riesz/errors.hpp"

namespace riesz {

namespace {

constexpr double kZeroEigen = 1e-14;

void check_axis(const ProductSystem& sys, int i) {
  if (i < 0 || i >= sys.dim()) throw ArgumentError("axis index out of range");
}

void check_time(double t) {
  if (!std::isfinite(t) || t < 0.0) throw ArgumentError("time must be finite and >= 0");
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// out[o][r][in] = sum_m A(r, m) T[o][m][in]  (or A(m, r) when transposed).
std::vector<double> mode_product(const std::vector<double>& T, std::vector<int>& shape, int axis, const Matrix& A,
                                 bool transpose) {
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= shape[i];
  for (int i = axis + 1; i < static_cast<int>(shape.size()); ++i) inner *= shape[i];
  const int mid = shape[axis];
  const int rows = transpose ? A.cols : A.rows;
  if ((transpose ? A.rows : A.cols) != mid) throw ArgumentError("tensor mode product: shape mismatch");
  std::vector<double> out(outer * rows * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = T.data() + o * mid * inner;
    double* dst = out.data() + o * rows * inner;
    for (int r = 0; r < rows; ++r) {
      double* drow = dst + r * inner;
      for (int m = 0; m < mid; ++m) {
        const double a = transpose ? A(m, r) : A(r, m);
        if (a == 0.0) continue;
        const double* srow = src + m * inner;
        for (std::size_t in = 0; in < inner; ++in) drow[in] += a * srow[in];
      }
    }
  }
  shape[axis] = rows;
  return out;
}

std::vector<Matrix> grid_mats(const ProductSystem& sys, const TensorGrid& grid, int N,
                              const std::vector<AxisBasis>& kinds) {
  if (grid.dim() != sys.dim()) throw ArgumentError("grid dimension does not match the system");
  std::vector<Matrix> m;
  m.reserve(sys.dim());
  for (int i = 0; i < sys.dim(); ++i) m.push_back(axis_matrix(sys.axis(i), kinds[i], grid.axis(i).nodes, N));
  return m;
}

std::vector<Matrix> point_mats(const ProductSystem& sys, std::span<const double> x, int N,
                               const std::vector<AxisBasis>& kinds) {
  if (static_cast<int>(x.size()) != sys.dim()) throw ArgumentError("point dimension does not match the system");
  std::vector<Matrix> m;
  m.reserve(sys.dim());
  for (int i = 0; i < sys.dim(); ++i) m.push_back(axis_matrix(sys.axis(i), kinds[i], x.subspan(i, 1), N));
  return m;
}

std::vector<const Matrix*> ptrs(const std::vector<Matrix>& m) {
  std::vector<const Matrix*> p;
  for (const auto& x : m) p.push_back(&x);
  return p;
}

GridFn synth_with(const CoeffFn& f, const GridPtr& grid, const std::vector<AxisBasis>& kinds) {
  const auto mats = grid_mats(f.system(), *grid, f.N(), kinds);
  GridFn out(grid);
  const auto vals = tensor_apply(f.data(), f.N(), ptrs(mats));
  std::copy(vals.begin(), vals.end(), out.component(0).begin());
  return out;
}

double point_with(const CoeffFn& f, std::span<const double> x, const std::vector<AxisBasis>& kinds) {
  const auto mats = point_mats(f.system(), x, f.N(), kinds);
  return tensor_apply(f.data(), f.N(), ptrs(mats))[0];
}

void check_resolution(const TensorGrid& grid, int N) {
  for (int i = 0; i < grid.dim(); ++i)
    if (static_cast<int>(grid.axis(i).size()) < std::max(1, 2 * N))
      throw ResolutionError("quadrature resolution below 2N on axis " + std::to_string(i));
}

std::vector<AxisBasis> kinds_all(int d, AxisBasis k) { return std::vector<AxisBasis>(d, k); }

std::vector<AxisBasis> image_kinds(int d, int axis, int partial) {
  auto k = kinds_all(d, AxisBasis::Phi);
  k[axis] = AxisBasis::Frame;
  if (partial >= 0) {
    if (partial == axis)
      k[axis] = AxisBasis::DFrame;
    else
      k[partial] = AxisBasis::DPhi;
  }
  return k;
}

template <class Fn>
Fn multiply(const Fn& f, const std::function<double(std::span<const int>)>& m) {
  Fn out = f;
  auto d = out.data();
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (d[j] == 0.0) continue;
    const MultiIndex k = out.multi(j);
    d[j] *= m(k);
  }
  return out;
}

}  // namespace

double pstar(double p) {
  if (!std::isfinite(p) || p <= 1.0) throw ArgumentError("p must be a finite number > 1");
  return std::max(p, p / (p - 1.0));
}

ProductSystem::ProductSystem(std::vector<AxisSystem> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ArgumentError("ProductSystem: need at least one axis");
}

ProductSystem::ProductSystem(const Family& family, int d) {
  if (d < 1) throw ArgumentError("ProductSystem: d must be >= 1");
  for (int i = 0; i < d; ++i) axes_.emplace_back(family);
}

double ProductSystem::lambda(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != dim()) throw ArgumentError("multi-index length does not match dimension");
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += axes_[i].lambda(k[i]);
  return s;
}

double ProductSystem::Lambda0() const {
  double s = 0.0;
  for (const auto& a : axes_) s += a.lambda(0);
  return s;
}

double ProductSystem::A() const {
  double s = 0.0;
  for (const auto& a : axes_) s += a.a();
  return s;
}

double ProductSystem::K() const {
  double k = 0.0;
  for (const auto& a : axes_) k = std::max(k, a.listed_K());
  return k;
}

bool ProductSystem::theorem_range() const {
  return std::all_of(axes_.begin(), axes_.end(), [](const AxisSystem& a) { return a.theorem_range(); });
}

bool ProductSystem::pi_removes_ground() const { return std::abs(Lambda0()) < kZeroEigen; }

double ProductSystem::r(std::span<const double> x) const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += axes_[i].r(x[i]);
  return s;
}

double ProductSystem::norm_bound(double p) const { return 24.0 * (1.0 + std::sqrt(K())) * (pstar(p) - 1.0); }

std::string ProductSystem::describe() const {
  bool same = std::all_of(axes_.begin(), axes_.end(),
                          [&](const AxisSystem& a) { return a.family() == axes_[0].family(); });
  if (same) return axes_[0].family().describe() + "^" + std::to_string(dim());
  std::string s;
  for (int i = 0; i < dim(); ++i) s += (i ? " x " : "") + axes_[i].family().describe();
  return s;
}

CoeffFn::CoeffFn(ProductSystem sys, int N) : sys_(std::move(sys)), N_(N) {
  if (N < 0) throw ArgumentError("CoeffFn: N must be >= 0");
  data_.assign(ipow(static_cast<std::size_t>(N + 1), sys_.dim()), 0.0);
}

std::size_t CoeffFn::flat(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != dim()) throw ArgumentError("multi-index length does not match dimension");
  std::size_t f = 0;
  for (int i = 0; i < dim(); ++i) {
    if (k[i] < 0 || k[i] > N_) throw ArgumentError("multi-index outside the truncation");
    f = f * (N_ + 1) + k[i];
  }
  return f;
}

MultiIndex CoeffFn::multi(std::size_t f) const {
  MultiIndex k(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    k[i] = static_cast<int>(f % (N_ + 1));
    f /= (N_ + 1);
  }
  return k;
}

double CoeffFn::norm2() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

void CoeffFn::for_each_nonzero(const std::function<void(const MultiIndex&, double)>& fn) const {
  for (std::size_t j = 0; j < data_.size(); ++j)
    if (data_[j] != 0.0) fn(multi(j), data_[j]);
}

CoeffFn CoeffFn::basis(ProductSystem sys, int N, std::span<const int> k) {
  CoeffFn f(std::move(sys), N);
  f.set(k, 1.0);
  return f;
}

ImageFrameFn::ImageFrameFn(ProductSystem sys, int axis, int N) : CoeffFn(std::move(sys), N), axis_(axis) {
  check_axis(sys_, axis);
}

void ImageFrameFn::set(std::span<const int> k, double v) {
  const std::size_t f = flat(k);
  if (k[axis_] == 0 && v != 0.0) throw ArgumentError("frame coefficient requires k_i >= 1");
  data_[f] = v;
}

Matrix axis_matrix(const AxisSystem& sys, AxisBasis kind, std::span<const double> nodes, int N) {
  Matrix m;
  m.rows = static_cast<int>(nodes.size());
  m.cols = N + 1;
  m.a.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
  std::vector<double> buf(N + 1);
  for (int r = 0; r < m.rows; ++r) {
    const double x = nodes[r];
    switch (kind) {
      case AxisBasis::Phi:
        sys.phi_upto(x, buf);
        break;
      case AxisBasis::DPhi:
        sys.dphi_upto(x, buf);
        break;
      case AxisBasis::Ladder:
      case AxisBasis::Frame:
        sys.ladder_upto(x, buf);
        break;
      case AxisBasis::DLadder:
      case AxisBasis::DFrame:
        sys.ladder_derivative_upto(x, buf);
        break;
    }
    if (kind == AxisBasis::Frame || kind == AxisBasis::DFrame) {
      buf[0] = 0.0;
      for (int k = 1; k <= N; ++k) buf[k] /= std::sqrt(sys.ladder_norm_sq(k));
    }
    std::copy(buf.begin(), buf.end(), m.a.begin() + static_cast<std::size_t>(r) * m.cols);
  }
  return m;
}

std::vector<double> tensor_apply(std::span<const double> coeffs, int N, const std::vector<const Matrix*>& mats) {
  std::vector<int> shape(mats.size(), N + 1);
  std::vector<double> T(coeffs.begin(), coeffs.end());
  for (int i = 0; i < static_cast<int>(mats.size()); ++i) T = mode_product(T, shape, i, *mats[i], false);
  return T;
}

std::vector<double> tensor_apply_transpose(std::span<const double> values, int N,
                                           const std::vector<const Matrix*>& mats) {
  std::vector<int> shape(mats.size());
  for (std::size_t i = 0; i < mats.size(); ++i) shape[i] = mats[i]->rows;
  std::vector<double> T(values.begin(), values.end());
  for (int i = 0; i < static_cast<int>(mats.size()); ++i) {
    if (mats[i]->cols != N + 1) throw ArgumentError("tensor_apply_transpose: column count mismatch");
    T = mode_product(T, shape, i, *mats[i], true);
  }
  return T;
}

GridPtr analysis_grid(const ProductSystem& sys, int N) { return make_grid(sys.axes(), 2 * N + 2); }

CoeffFn project(const GridFn& f, const ProductSystem& sys, int N) {
  const TensorGrid& grid = *f.grid();
  if (grid.dim() != sys.dim()) throw ArgumentError("grid dimension does not match the system");
  check_resolution(grid, N);
  std::vector<double> wv(f.size());
  for (std::size_t j = 0; j < wv.size(); ++j) wv[j] = grid.weight(j) * f.at(0, j);
  const auto mats = grid_mats(sys, grid, N, kinds_all(sys.dim(), AxisBasis::Phi));
  CoeffFn out(sys, N);
  const auto c = tensor_apply_transpose(wv, N, ptrs(mats));
  std::copy(c.begin(), c.end(), out.data().begin());
  return out;
}

CoeffFn project(const GridFn::PointFn& f, const ProductSystem& sys, int N) {
  return project(GridFn::sample(analysis_grid(sys, N), f), sys, N);
}

GridFn synthesize(const CoeffFn& f, const GridPtr& grid) {
  return synth_with(f, grid, kinds_all(f.dim(), AxisBasis::Phi));
}

GridFn synthesize_partial(const CoeffFn& f, int j, const GridPtr& grid) {
  check_axis(f.system(), j);
  auto k = kinds_all(f.dim(), AxisBasis::Phi);
  k[j] = AxisBasis::DPhi;
  return synth_with(f, grid, k);
}

ImageFrameFn analyze_image(const GridFn& g, const ProductSystem& sys, int axis, int N) {
  check_axis(sys, axis);
  const TensorGrid& grid = *g.grid();
  if (grid.dim() != sys.dim()) throw ArgumentError("grid dimension does not match the system");
  check_resolution(grid, N);
  std::vector<double> wv(g.size());
  for (std::size_t j = 0; j < wv.size(); ++j) wv[j] = grid.weight(j) * g.at(0, j);
  const auto mats = grid_mats(sys, grid, N, image_kinds(sys.dim(), axis, -1));
  ImageFrameFn out(sys, axis, N);
  const auto c = tensor_apply_transpose(wv, N, ptrs(mats));
  std::copy(c.begin(), c.end(), out.data().begin());
  return out;
}

ImageFrameFn analyze_image(const GridFn::PointFn& g, const ProductSystem& sys, int axis, int N) {
  return analyze_image(GridFn::sample(analysis_grid(sys, N), g), sys, axis, N);
}

GridFn synth_image(const ImageFrameFn& g, const GridPtr& grid) {
  return synth_with(g, grid, image_kinds(g.dim(), g.axis(), -1));
}

GridFn synth_image_partial(const ImageFrameFn& g, int j, const GridPtr& grid) {
  check_axis(g.system(), j);
  return synth_with(g, grid, image_kinds(g.dim(), g.axis(), j));
}

double eval_point(const CoeffFn& f, std::span<const double> x) {
  return point_with(f, x, kinds_all(f.dim(), AxisBasis::Phi));
}

double eval_partial_point(const CoeffFn& f, int j, std::span<const double> x) {
  check_axis(f.system(), j);
  auto k = kinds_all(f.dim(), AxisBasis::Phi);
  k[j] = AxisBasis::DPhi;
  return point_with(f, x, k);
}

double eval_delta_point(const CoeffFn& f, int i, std::span<const double> x) {
  check_axis(f.system(), i);
  auto k = kinds_all(f.dim(), AxisBasis::Phi);
  k[i] = AxisBasis::Ladder;
  return point_with(f, x, k);
}

double eval_image_point(const ImageFrameFn& g, std::span<const double> x) {
  return point_with(g, x, image_kinds(g.dim(), g.axis(), -1));
}

double eval_image_partial_point(const ImageFrameFn& g, int j, std::span<const double> x) {
  check_axis(g.system(), j);
  return point_with(g, x, image_kinds(g.dim(), g.axis(), j));
}

CoeffFn apply_Pi(const CoeffFn& f) {
  CoeffFn out = f;
  if (f.system().pi_removes_ground()) out.data()[0] = 0.0;
  return out;
}

CoeffFn apply_L_power(const CoeffFn& f, double s) {
  if (!std::isfinite(s)) throw ArgumentError("apply_L_power: non-finite exponent");
  const ProductSystem& sys = f.system();
  return multiply(f, [&](std::span<const int> k) {
    const double lam = sys.lambda(k);
    if (s == 0.0) return 1.0;
    if (std::abs(lam) < kZeroEigen) {
      if (s < 0.0) throw SingularError("negative power of L applied to a zero eigenvalue");
      return 0.0;
    }
    return std::pow(lam, s);
  });
}

CoeffFn apply_Pt(const CoeffFn& f, double t) {
  check_time(t);
  const ProductSystem& sys = f.system();
  return multiply(f, [&](std::span<const int> k) { return std::exp(-t * std::sqrt(sys.lambda(k))); });
}

CoeffFn dt_Pt(const CoeffFn& f, double t) {
  check_time(t);
  const ProductSystem& sys = f.system();
  return multiply(f, [&](std::span<const int> k) {
    const double s = std::sqrt(sys.lambda(k));
    return -s * std::exp(-t * s);
  });
}

ImageFrameFn apply_Qt(const ImageFrameFn& g, double t) {
  check_time(t);
  const ProductSystem& sys = g.system();
  return multiply(g, [&](std::span<const int> k) { return std::exp(-t * std::sqrt(sys.lambda(k))); });
}

ImageFrameFn dt_Qt(const ImageFrameFn& g, double t) {
  check_time(t);
  const ProductSystem& sys = g.system();
  return multiply(g, [&](std::span<const int> k) {
    const double s = std::sqrt(sys.lambda(k));
    return -s * std::exp(-t * s);
  });
}

GridFn apply_delta(const CoeffFn& f, int i, const GridPtr& grid) {
  check_axis(f.system(), i);
  auto k = kinds_all(f.dim(), AxisBasis::Phi);
  k[i] = AxisBasis::Ladder;
  return synth_with(f, grid, k);
}

GridFn apply_frakd(const CoeffFn& f, int i, const GridPtr& grid) {
  GridFn out = apply_delta(f, i, grid);
  const GridFn vals = synthesize(f, grid);
  const AxisSystem& ax = f.system().axis(i);
  for (std::size_t j = 0; j < out.size(); ++j) out.at(0, j) -= ax.q(grid->node(j, i)) * vals.at(0, j);
  return out;
}

ImageFrameFn riesz_coeffs(const CoeffFn& f, int i) {
  const ProductSystem& sys = f.system();
  check_axis(sys, i);
  const CoeffFn pf = apply_Pi(f);
  ImageFrameFn g(sys, i, f.N());
  auto src = pf.data();
  auto dst = g.data();
  const AxisSystem& ax = sys.axis(i);
  for (std::size_t j = 0; j < src.size(); ++j) {
    if (src[j] == 0.0) continue;
    const MultiIndex k = pf.multi(j);
    const double lam = sys.lambda(k);
    if (std::abs(lam) < kZeroEigen) throw SingularError("Riesz transform of a zero-eigenvalue component");
    if (k[i] == 0) continue;
    dst[j] = std::sqrt(ax.ladder_norm_sq(k[i]) / lam) * src[j];
  }
  return g;
}

GridFn riesz(const CoeffFn& f, int i, const GridPtr& grid) { return synth_image(riesz_coeffs(f, i), grid); }

std::vector<std::vector<double>> domain_samples(const ProductSystem& sys, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto one = [&](const AxisSystem& ax) {
    const double lo = ax.lower(), hi = ax.upper();
    const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
    const double u = U(rng);
    // distance 1e-10 .. 1 from an edge, log-uniform
    auto near = [&] { return std::pow(10.0, -10.0 * U(rng)); };
    if (flo && fhi) {
      const double w = hi - lo;
      if (u < 0.6) return lo + w * (0.001 + 0.998 * U(rng));
      if (u < 0.8) return lo + std::min(0.5 * w, near() * w);
      return hi - std::min(0.5 * w, near() * w);
    }
    if (flo) {
      if (u < 0.7) return lo + 30.0 * U(rng) + 1e-10;
      return lo + near();
    }
    return -10.0 + 20.0 * u;
  };
  std::vector<std::vector<double>> pts(n, std::vector<double>(sys.dim()));
  for (auto& x : pts)
    for (int i = 0; i < sys.dim(); ++i) {
      double v = one(sys.axis(i));
      if (!sys.axis(i).contains(v)) v = std::clamp(v, sys.axis(i).lower() + 2 * AxisSystem::kEdgeGuard,
                                                    sys.axis(i).upper() - 2 * AxisSystem::kEdgeGuard);
      x[i] = v;
    }
  return pts;
}

PredicateCheck check_A1(const ProductSystem& sys, const std::vector<std::vector<double>>& points) {
  PredicateCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& x : points) {
    if (static_cast<int>(x.size()) != sys.dim()) throw ArgumentError("check_A1: point dimension mismatch");
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sys.dim(); ++i) m = std::min(m, sys.axis(i).v(x[i]));
    if (m < out.worst_margin) {
      out.worst_margin = m;
      out.worst_point = x;
    }
    ++out.samples;
  }
  out.holds = out.worst_margin >= 0.0;
  return out;
}

PredicateCheck check_A2(const ProductSystem& sys, const std::vector<std::vector<double>>& points, double K,
                        double rel_tol) {
  PredicateCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& x : points) {
    if (static_cast<int>(x.size()) != sys.dim()) throw ArgumentError("check_A2: point dimension mismatch");
    double q2 = 0.0;
    for (int i = 0; i < sys.dim(); ++i) q2 += sys.axis(i).q(x[i]) * sys.axis(i).q(x[i]);
    const double r = sys.r(x);
    // K = inf with r = 0 leaves the bound undetermined; count it as a violation
    double m = std::isinf(K) ? (r > 0.0 ? K : -q2) : K * r * (1.0 + rel_tol) - q2;
    if (std::isnan(m)) m = -q2;
    if (m < out.worst_margin) {
      out.worst_margin = m;
      out.worst_point = x;
    }
    if (r > 0.0) out.sup_ratio = std::max(out.sup_ratio, q2 / r);
    else if (q2 > 0.0) out.sup_ratio = std::numeric_limits<double>::infinity();
    ++out.samples;
  }
  out.holds = out.worst_margin >= 0.0;
  return out;
}

GridFn riesz_vector(const CoeffFn& f, const GridPtr& grid) {
  GridFn out(grid, f.dim());
  for (int i = 0; i < f.dim(); ++i) {
    const GridFn ri = riesz(f, i, grid);
    std::copy(ri.component(0).begin(), ri.component(0).end(), out.component(i).begin());
  }
  return out;
}

}  // namespace riesz
