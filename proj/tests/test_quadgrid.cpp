#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "riesz/errors.hpp"
#include "riesz/quadgrid.hpp"
#include "riesz/tridiag.hpp"

using namespace riesz;

namespace {

// Number of eigenvalues below x (Sturm sequence of the leading minors).
int sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  int count = 0;
  double q = d[0] - x;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (q == 0.0) q = 1e-300;
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q < 0) ++count;
  }
  return count;
}

double moment(const QuadRule& r, int m) {
  double s = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) s += r.weights[j] * std::pow(r.nodes[j], m);
  return s;
}

}  // namespace

TEST_SUITE("quadgrid") {

TEST_CASE("tridiagonal eigenvalues against Sturm counts") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int n : {1, 2, 3, 10, 57}) {
    std::vector<double> d(n), e(n > 0 ? n - 1 : 0);
    for (auto& x : d) x = U(rng);
    for (auto& x : e) x = U(rng);
    const auto eig = tridiag_eigen(d, e);
    REQUIRE(eig.values.size() == static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const double lam = eig.values[j];
      const double eps = 1e-9 * (1.0 + std::abs(lam));
      CHECK(sturm_count(d, e, lam - eps) <= j);
      CHECK(sturm_count(d, e, lam + eps) >= j + 1);
    }
    // first row of the eigenvector matrix reproduces the (0,0) entries of A^0, A, A^2
    double m0 = 0, m1 = 0, m2 = 0;
    for (int j = 0; j < n; ++j) {
      const double z2 = eig.first_components[j] * eig.first_components[j];
      m0 += z2;
      m1 += z2 * eig.values[j];
      m2 += z2 * eig.values[j] * eig.values[j];
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m1 == doctest::Approx(d[0]).epsilon(1e-12).scale(1.0));
    CHECK(m2 == doctest::Approx(d[0] * d[0] + (n > 1 ? e[0] * e[0] : 0.0)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("tridiagonal argument errors") {
  CHECK_THROWS_AS(tridiag_eigen({}, {}), ArgumentError);
  CHECK_THROWS_AS(tridiag_eigen({1.0, 2.0}, {}), ArgumentError);
  CHECK_THROWS_AS(tridiag_eigen({1.0}, {0.5}), ArgumentError);
  auto diag = tridiag_eigen({3.0, -1.0, 2.0}, {0.0, 0.0});
  CHECK(diag.values == std::vector<double>{-1.0, 2.0, 3.0});
}

TEST_CASE("small Gauss rules") {
  auto h = gauss_rule(AxisSystem({FamilyTag::HermitePoly}), 1);
  CHECK(std::abs(h.nodes[0]) < 1e-15);
  CHECK(h.weights[0] == doctest::Approx(1.0));
  auto l = gauss_rule(AxisSystem({FamilyTag::JacobiPoly, 0.0, 0.0}), 2);
  CHECK(l.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)));
  CHECK(l.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(l.weights[0] == doctest::Approx(0.5));
  CHECK(l.weights[1] == doctest::Approx(0.5));
  auto g = gauss_rule(AxisSystem({FamilyTag::LaguerrePoly, 0.0}), 1);
  CHECK(g.nodes[0] == doctest::Approx(1.0));
  CHECK(g.weights[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(gauss_rule(AxisSystem({FamilyTag::HermitePoly}), 0), ArgumentError);
}

TEST_CASE("Gauss exactness on monomial moments") {
  for (int n : {3, 8, 15}) {
    auto h = gauss_rule(AxisSystem({FamilyTag::HermitePoly}), n);
    for (int m = 0; m <= 2 * n - 1; ++m) {
      // E x^m for x ~ N(0, 1/2)
      double ref = 0.0;
      if (m % 2 == 0) ref = std::exp(std::lgamma(m + 1.0) - std::lgamma(m / 2 + 1.0) - m * std::log(2.0));
      double abs_moment = 0.0;
      for (std::size_t j = 0; j < h.size(); ++j) abs_moment += h.weights[j] * std::pow(std::abs(h.nodes[j]), m);
      CHECK(std::abs(moment(h, m) - ref) <= 1e-12 * std::max(1.0, abs_moment));
    }
    for (double a : {-0.5, 0.0, 2.5}) {
      auto g = gauss_rule(AxisSystem({FamilyTag::LaguerrePoly, a}), n);
      for (int m = 0; m <= 2 * n - 1; ++m) {
        const double ref = std::exp(std::lgamma(m + a + 1.0) - std::lgamma(a + 1.0));
        CHECK(moment(g, m) == doctest::Approx(ref).epsilon(1e-12));
      }
    }
    Family jf{FamilyTag::JacobiPoly, 1.5, -0.5};
    auto j = gauss_rule(AxisSystem(jf), n);
    for (int m = 0; m <= 2 * n - 1; ++m) {
      const double ref = oracle::integrate(jf, [m](double x) { return std::pow(x, m); });
      CHECK(moment(j, m) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("rule properties for every family") {
  for (const auto& fam : oracle::sample_families()) {
    AxisSystem s(fam);
    CAPTURE(fam.describe());
    auto r = gauss_rule(s, 40);
    for (std::size_t j = 0; j < r.size(); ++j) {
      CHECK(r.weights[j] > 0.0);
      CHECK(s.contains(r.nodes[j]));
      if (j) CHECK(r.nodes[j] > r.nodes[j - 1]);
    }
    if (s.measure_kind() == MeasureKind::WeightedPolynomialMeasure) {
      double sum = 0.0;
      for (double w : r.weights) sum += w;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("mapped rule weights agree with Golub-Welsch weights") {
  AxisSystem ho({FamilyTag::HermiteFunc});
  auto r = gauss_rule(ho, 20);
  auto gw = golub_welsch(ho.recurrence_coeffs(20));
  for (std::size_t j = 0; j < r.size(); ++j) {
    CHECK(r.nodes[j] == doctest::Approx(gw.nodes[j]).epsilon(1e-13).scale(1.0));
    const double expect = gw.weights[j] * std::sqrt(std::numbers::pi) * std::exp(gw.nodes[j] * gw.nodes[j]);
    CHECK(r.weights[j] == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("Gauss-Legendre on an interval") {
  auto r = gauss_legendre(5, 0.0, 2.0);
  CHECK(moment(r, 0) == doctest::Approx(2.0));
  CHECK(moment(r, 9) == doctest::Approx(std::pow(2.0, 10) / 10.0));
}

TEST_CASE("tensor grid layout") {
  std::vector<AxisSystem> ax{AxisSystem({FamilyTag::HermitePoly}), AxisSystem({FamilyTag::LaguerrePoly, 0.5})};
  auto g = make_grid(ax, std::vector<int>{3, 4});
  CHECK(g->dim() == 2);
  CHECK(g->size() == 12);
  CHECK(g->shape() == std::vector<int>{3, 4});
  // last axis fastest
  CHECK(g->index(1, 1) == 1);
  CHECK(g->index(1, 0) == 0);
  CHECK(g->index(4, 0) == 1);
  CHECK(g->weight(5) == doctest::Approx(g->axis(0).weights[1] * g->axis(1).weights[1]));
  double total = 0;
  for (std::size_t j = 0; j < g->size(); ++j) total += g->weight(j);
  CHECK(total == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_grid(ax, std::vector<int>{3}), ArgumentError);
  CHECK_THROWS_AS(TensorGrid({}), ArgumentError);
}

TEST_CASE("lp norms") {
  std::vector<AxisSystem> ou{AxisSystem({FamilyTag::HermitePoly})};
  auto g = make_grid(ou, 20);
  auto one = GridFn::sample(g, [](std::span<const double>) { return 1.0; });
  for (double p : {1.1, 2.0, 3.7, 10.0}) CHECK(lp_norm(one, p) == doctest::Approx(1.0));
  auto h1 = GridFn::sample(g, [](std::span<const double> x) { return std::sqrt(2.0) * x[0]; });
  CHECK(lp_norm(h1, 2.0) == doctest::Approx(1.0));
  CHECK(lp_norm(h1, 4.0) == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-13));
  CHECK_THROWS_AS(lp_norm(h1, 1.0), ArgumentError);
  CHECK_THROWS_AS(lp_norm(h1, 0.5), ArgumentError);
  CHECK_THROWS_AS(lp_norm(h1, INFINITY), ArgumentError);
  CHECK_THROWS_AS(lp_norm(h1, NAN), ArgumentError);

  // vector-valued: Euclidean norm per node first
  GridFn v(g, 2);
  for (std::size_t j = 0; j < g->size(); ++j) {
    v.at(0, j) = 3.0;
    v.at(1, j) = 4.0;
  }
  CHECK(lp_norm(v, 3.0) == doctest::Approx(5.0));
}

TEST_CASE("basis functions have unit norm for every family") {
  for (const auto& fam : oracle::sample_families()) {
    AxisSystem s(fam);
    auto g = make_grid({s}, 30);
    for (int k : {0, 3, 11}) {
      auto f = GridFn::sample(g, [&](std::span<const double> x) { return s.phi(k, x[0]); });
      CHECK(lp_norm(f, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("inner products") {
  for (const auto& fam : oracle::sample_families()) {
    AxisSystem s(fam);
    CAPTURE(fam.describe());
    auto g = make_grid({s}, 30);
    auto phi = [&](int k) { return GridFn::sample(g, [&s, k](std::span<const double> x) { return s.phi(k, x[0]); }); };
    auto lad = [&](int k) {
      return GridFn::sample(g, [&s, k](std::span<const double> x) { return s.ladder_eval(k, x[0]); });
    };
    CHECK(inner(phi(4), phi(4)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(inner(phi(4), phi(7))) < 1e-10);
    CHECK(inner(lad(6), lad(6)) == doctest::Approx(s.lambda(6) - s.a()).epsilon(1e-10));
    CHECK(inner(phi(2), phi(5)) == doctest::Approx(inner(phi(5), phi(2))).scale(1.0));
  }
  std::vector<AxisSystem> ou{AxisSystem({FamilyTag::HermitePoly})};
  auto a = GridFn::sample(make_grid(ou, 10), [](std::span<const double> x) { return x[0]; });
  auto b = GridFn::sample(make_grid(ou, 11), [](std::span<const double> x) { return x[0]; });
  CHECK_THROWS_AS(inner(a, b), ArgumentError);
  // equal content on separately built grids is accepted
  auto c = GridFn::sample(make_grid(ou, 10), [](std::span<const double> x) { return x[0]; });
  CHECK(inner(a, c) == doctest::Approx(0.5));
}

TEST_CASE("bilinearity of the inner product") {
  std::vector<AxisSystem> ax{AxisSystem({FamilyTag::JacobiPoly, 0.5, 0.0}), AxisSystem({FamilyTag::HermiteFunc})};
  auto g = make_grid(ax, 12);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  GridFn f(g), h(g), k(g), comb(g);
  for (std::size_t j = 0; j < g->size(); ++j) {
    f.at(0, j) = N(rng);
    h.at(0, j) = N(rng);
    k.at(0, j) = N(rng);
    comb.at(0, j) = 2.0 * f.at(0, j) - 3.0 * h.at(0, j);
  }
  CHECK(inner(comb, k) == doctest::Approx(2.0 * inner(f, k) - 3.0 * inner(h, k)).epsilon(1e-12));
}

TEST_CASE("tensorization of norms") {
  AxisSystem a({FamilyTag::HermitePoly}), b({FamilyTag::LaguerrePoly, 0.5});
  auto f1 = [](double x) { return 1.0 + x + 0.3 * x * x; };
  auto f2 = [](double y) { return 2.0 - y; };
  auto g = make_grid({a, b}, 16);
  auto prod = GridFn::sample(g, [&](std::span<const double> x) { return f1(x[0]) * f2(x[1]); });
  for (double p : {2.0, 4.0}) {
    auto n1 = lp_norm(GridFn::sample(make_grid({a}, 16), [&](std::span<const double> x) { return f1(x[0]); }), p);
    auto n2 = lp_norm(GridFn::sample(make_grid({b}, 16), [&](std::span<const double> x) { return f2(x[0]); }), p);
    CHECK(lp_norm(prod, p) == doctest::Approx(n1 * n2).epsilon(1e-10));
  }
}

TEST_CASE("lp norm is nondecreasing in p for probability measures") {
  for (const auto& fam : oracle::sample_families()) {
    AxisSystem s(fam);
    if (s.measure_kind() != MeasureKind::WeightedPolynomialMeasure) continue;
    auto g = make_grid({s}, 40);
    auto f = GridFn::sample(g, [&](std::span<const double> x) { return s.phi(3, x[0]) + 0.5 * s.phi(1, x[0]); });
    double prev = 0.0;
    for (double p = 1.05; p < 8.0; p *= 1.2) {
      const double v = lp_norm(f, p);
      CHECK(v >= prev * (1 - 1e-13));
      prev = v;
    }
  }
}

TEST_CASE("converge_norm") {
  std::vector<AxisSystem> ou{AxisSystem({FamilyTag::HermitePoly})};
  // even power of a polynomial: exact from the first rule on
  auto poly = converge_norm(ou, GridFn::PointFn([](std::span<const double> x) { return 1.0 + x[0] * x[0]; }), 4.0,
                            1e-12);
  CHECK(poly.doublings == 1);

  // |sqrt2 x|^3 against the Gaussian, oracle by double-exponential quadrature.
  // The kink at 0 limits Gauss rules to O(n^-2), so the error is about a third of the last step.
  boost::math::quadrature::sinh_sinh<double> q;
  const double ref =
      std::cbrt(q.integrate(
                    [](double x) {
                      const double e = std::exp(-x * x);
                      return e == 0.0 ? 0.0 : std::pow(std::abs(std::sqrt(2.0) * x), 3) * e;
                    },
                    1e-15) /
                std::sqrt(std::numbers::pi));
  auto odd = converge_norm(ou, GridFn::PointFn([](std::span<const double> x) { return std::sqrt(2.0) * x[0]; }), 3.0,
                           1e-6);
  CHECK(odd.value == doctest::Approx(ref).epsilon(1e-6));
  CHECK(odd.achieved_tol < 1e-6);
  CHECK(odd.doublings >= 5);

  // function family: no truncation radius to tune, value stable under refinement
  AxisSystem ho({FamilyTag::HermiteFunc});
  auto h1 = converge_norm({ho}, GridFn::PointFn([&](std::span<const double> x) { return ho.phi(1, x[0]); }), 3.0, 1e-6);
  const double ref_h = std::cbrt(q.integrate([&](double x) { return std::pow(std::abs(ho.phi(1, x)), 3); }, 1e-15));
  CHECK(h1.value == doctest::Approx(ref_h).epsilon(1e-6));

  ConvergeOptions small;
  small.start_nodes = 4;
  small.max_nodes_per_axis = 32;
  try {
    converge_norm(ou, GridFn::PointFn([](std::span<const double> x) { return std::abs(std::sin(40.0 * x[0])); }), 1.5,
                  1e-14, small);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(std::isfinite(e.previous()));
    CHECK(std::isfinite(e.last()));
    CHECK(e.previous() != e.last());
  }
  CHECK_THROWS_AS(converge_norm(ou, GridFn::PointFn([](std::span<const double>) { return 1.0; }), 1.0, 1e-8),
                  ArgumentError);
}

}  // TEST_SUITE
