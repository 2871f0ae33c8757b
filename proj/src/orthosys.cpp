#include "riesz/orthosys.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <vector>

#include "riesz/errors.hpp"

namespace riesz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

struct NameEntry {
  const char* name;
  FamilyTag tag;
};

constexpr NameEntry kNames[] = {
    {"hermite-poly", FamilyTag::HermitePoly},
    {"laguerre-poly", FamilyTag::LaguerrePoly},
    {"jacobi-poly", FamilyTag::JacobiPoly},
    {"hermite-func", FamilyTag::HermiteFunc},
    {"laguerre-func-h", FamilyTag::LaguerreFuncH},
    {"laguerre-func-conv", FamilyTag::LaguerreFuncConv},
    {"jacobi-func", FamilyTag::JacobiFunc},
    // aliases
    {"ou", FamilyTag::HermitePoly},
    {"harmosc", FamilyTag::HermiteFunc},
    {"laguerre-func-hermite", FamilyTag::LaguerreFuncH},
};

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

bool is_poly(FamilyTag t) {
  return t == FamilyTag::HermitePoly || t == FamilyTag::LaguerrePoly || t == FamilyTag::JacobiPoly;
}

}  // namespace

bool Family::has_alpha() const { return tag != FamilyTag::HermitePoly && tag != FamilyTag::HermiteFunc; }

bool Family::has_beta() const { return tag == FamilyTag::JacobiPoly || tag == FamilyTag::JacobiFunc; }

bool Family::in_theorem_range() const {
  switch (tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::HermiteFunc:
      return true;
    case FamilyTag::LaguerrePoly:
    case FamilyTag::LaguerreFuncConv:
      return alpha >= -0.5;
    case FamilyTag::LaguerreFuncH:
      return alpha > 0.5;
    case FamilyTag::JacobiPoly:
      return alpha >= -0.5 && beta >= -0.5;
    case FamilyTag::JacobiFunc:
      return alpha >= 0.5 && beta >= 0.5;
  }
  return false;
}

std::string Family::name() const {
  for (const auto& e : kNames)
    if (e.tag == tag) return e.name;
  return "unknown";
}

std::string Family::describe() const {
  char buf[96];
  if (has_beta())
    std::snprintf(buf, sizeof buf, "%s(a=%.17g,b=%.17g)", name().c_str(), alpha, beta);
  else if (has_alpha())
    std::snprintf(buf, sizeof buf, "%s(a=%.17g)", name().c_str(), alpha);
  else
    std::snprintf(buf, sizeof buf, "%s", name().c_str());
  return buf;
}

Family Family::parse(const std::string& name, double alpha, double beta) {
  for (const auto& e : kNames) {
    if (name == e.name) {
      Family f{e.tag, alpha, beta};
      if (!f.has_alpha()) f.alpha = 0.0;
      if (!f.has_beta()) f.beta = 0.0;
      return f;
    }
  }
  throw ArgumentError("unknown system '" + name + "'");
}

double multiplier_value(Multiplier m, double x) {
  switch (m) {
    case Multiplier::One:
      return 1.0;
    case Multiplier::SqrtX:
      return std::sqrt(x);
    case Multiplier::SqrtOneMinusX2:
      return std::sqrt((1.0 - x) * (1.0 + x));
    case Multiplier::X:
      return x;
  }
  return 0.0;
}

double multiplier_derivative(Multiplier m, double x) {
  switch (m) {
    case Multiplier::One:
      return 0.0;
    case Multiplier::SqrtX:
      return 0.5 / std::sqrt(x);
    case Multiplier::SqrtOneMinusX2:
      return -x / std::sqrt((1.0 - x) * (1.0 + x));
    case Multiplier::X:
      return 1.0;
  }
  return 0.0;
}

AxisSystem::AxisSystem(Family family) : family_(family) {
  if (!family_.has_alpha()) family_.alpha = 0.0;
  if (!family_.has_beta()) family_.beta = 0.0;
  const double al = family_.alpha, be = family_.beta;
  if (!std::isfinite(al) || !std::isfinite(be))
    throw ParameterError("non-finite family parameter");
  if (family_.has_alpha() && al <= -1.0)
    throw ParameterError(family_.name() + ": alpha must exceed -1");
  if (family_.has_beta() && be <= -1.0)
    throw ParameterError(family_.name() + ": beta must exceed -1");

  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::HermiteFunc:
      lower_ = -kInf;
      upper_ = kInf;
      break;
    case FamilyTag::LaguerrePoly:
    case FamilyTag::LaguerreFuncH:
    case FamilyTag::LaguerreFuncConv:
      lower_ = 0.0;
      upper_ = kInf;
      break;
    case FamilyTag::JacobiPoly:
      lower_ = -1.0;
      upper_ = 1.0;
      break;
    case FamilyTag::JacobiFunc:
      lower_ = 0.0;
      upper_ = kPi;
      break;
  }

  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::LaguerrePoly:
    case FamilyTag::JacobiPoly:
      a_ = 0.0;
      break;
    case FamilyTag::HermiteFunc:
      a_ = 1.0;
      break;
    case FamilyTag::LaguerreFuncH:
    case FamilyTag::LaguerreFuncConv:
      a_ = 2.0 * al + 2.0;
      break;
    case FamilyTag::JacobiFunc:
      a_ = 0.25 * (al + be + 1.0) * (al + be + 1.0);
      break;
  }
}

MeasureKind AxisSystem::measure_kind() const {
  return is_poly(family_.tag) ? MeasureKind::WeightedPolynomialMeasure : MeasureKind::LebesgueLike;
}

double AxisSystem::listed_K() const {
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::LaguerrePoly:
    case FamilyTag::JacobiPoly:
      return 0.0;
    case FamilyTag::LaguerreFuncH:
      if (family_.alpha <= 0.5) return kInf;
      return (family_.alpha + 0.5) / (family_.alpha - 0.5);
    case FamilyTag::HermiteFunc:
    case FamilyTag::LaguerreFuncConv:
    case FamilyTag::JacobiFunc:
      return 1.0;
  }
  return kInf;
}

bool AxisSystem::contains(double x) const {
  if (!std::isfinite(x)) return false;
  if (std::isfinite(lower_) && !(x > lower_ + kEdgeGuard)) return false;
  if (std::isfinite(upper_) && !(x < upper_ - kEdgeGuard)) return false;
  return true;
}

void AxisSystem::check_domain(double x) const {
  if (!contains(x)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: x = %.17g outside the open domain (%g, %g)",
                  family_.name().c_str(), x, lower_, upper_);
    throw DomainError(buf);
  }
}

double AxisSystem::lambda(int k) const {
  if (k < 0) throw ArgumentError("negative index");
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
      return 2.0 * k;
    case FamilyTag::LaguerrePoly:
      return k;
    case FamilyTag::JacobiPoly:
      return k * (k + al + be + 1.0);
    case FamilyTag::HermiteFunc:
      return 2.0 * k + 1.0;
    case FamilyTag::LaguerreFuncH:
    case FamilyTag::LaguerreFuncConv:
      return 4.0 * k + 2.0 * al + 2.0;
    case FamilyTag::JacobiFunc: {
      const double s = k + 0.5 * (al + be + 1.0);
      return s * s;
    }
  }
  return 0.0;
}

double AxisSystem::rec_diag(int k) const {
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::HermiteFunc:
      return 0.0;
    case FamilyTag::LaguerrePoly:
    case FamilyTag::LaguerreFuncH:
    case FamilyTag::LaguerreFuncConv:
      return 2.0 * k + al + 1.0;
    case FamilyTag::JacobiPoly:
    case FamilyTag::JacobiFunc: {
      if (k == 0) return (be - al) / (al + be + 2.0);
      const double s = 2.0 * k + al + be;
      return (be * be - al * al) / (s * (s + 2.0));
    }
  }
  return 0.0;
}

double AxisSystem::rec_offdiag(int k) const {
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::HermiteFunc:
      return std::sqrt(0.5 * k);
    case FamilyTag::LaguerrePoly:
    case FamilyTag::LaguerreFuncH:
    case FamilyTag::LaguerreFuncConv:
      return std::sqrt(k * (k + al));
    case FamilyTag::JacobiPoly:
    case FamilyTag::JacobiFunc: {
      if (k == 1) {
        const double s = 2.0 + al + be;
        return std::sqrt(4.0 * (1.0 + al) * (1.0 + be) / (s * s * (s + 1.0)));
      }
      const double s = 2.0 * k + al + be;
      return std::sqrt(4.0 * k * (k + al) * (k + be) * (k + al + be) / (s * s * (s + 1.0) * (s - 1.0)));
    }
  }
  return 0.0;
}

Recurrence AxisSystem::recurrence_coeffs(int n) const {
  if (n < 1) throw ArgumentError("recurrence_coeffs: n must be >= 1");
  Recurrence r;
  r.diag.resize(n);
  r.offdiag.resize(n - 1);
  for (int k = 0; k < n; ++k) r.diag[k] = rec_diag(k);
  for (int k = 1; k < n; ++k) r.offdiag[k - 1] = rec_offdiag(k);
  return r;
}

double AxisSystem::to_aux(double x) const {
  switch (family_.tag) {
    case FamilyTag::LaguerreFuncH:
    case FamilyTag::LaguerreFuncConv:
      return x * x;
    case FamilyTag::JacobiFunc:
      return std::cos(x);
    default:
      return x;
  }
}

double AxisSystem::from_aux(double t) const {
  switch (family_.tag) {
    case FamilyTag::LaguerreFuncH:
    case FamilyTag::LaguerreFuncConv:
      return std::sqrt(t);
    case FamilyTag::JacobiFunc:
      return std::acos(t);
    default:
      return t;
  }
}

bool AxisSystem::alternating_sign() const {
  switch (family_.tag) {
    case FamilyTag::LaguerrePoly:
    case FamilyTag::LaguerreFuncH:
    case FamilyTag::LaguerreFuncConv:
      return true;
    default:
      return false;
  }
}

double AxisSystem::log_envelope(double x) const {
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::LaguerrePoly:
    case FamilyTag::JacobiPoly:
      return 0.0;
    case FamilyTag::HermiteFunc:
      return -0.25 * std::log(kPi) - 0.5 * x * x;
    case FamilyTag::LaguerreFuncH:
      return 0.5 * std::log(2.0) - 0.5 * std::lgamma(al + 1.0) + (al + 0.5) * std::log(x) - 0.5 * x * x;
    case FamilyTag::LaguerreFuncConv:
      return 0.5 * std::log(2.0) - 0.5 * std::lgamma(al + 1.0) - 0.5 * x * x;
    case FamilyTag::JacobiFunc:
      return -0.5 * log_beta(al + 1.0, be + 1.0) + (al + 0.5) * std::log(std::sin(0.5 * x)) +
             (be + 0.5) * std::log(std::cos(0.5 * x));
  }
  return 0.0;
}

void AxisSystem::phi_upto(double x, std::span<double> out) const {
  check_domain(x);
  const int n = static_cast<int>(out.size());
  if (n == 0) return;
  if (n - 1 > kMaxDegree) throw ArgumentError("degree exceeds the configured maximum");
  const double t = to_aux(x);
  const double logenv = log_envelope(x);
  const bool alt = alternating_sign();
  // Scaled three-term recurrence; the running scale is kept in log form so
  // that large polynomial values meeting a tiny envelope do not overflow.
  constexpr double kBig = 1e100;
  const double log_big = std::log(kBig);
  double scale = logenv;
  double prev = 0.0, cur = 1.0;
  double factor = std::exp(scale);
  out[0] = cur * factor;
  for (int k = 0; k + 1 < n; ++k) {
    const double bk = k > 0 ? rec_offdiag(k) : 0.0;
    double next = ((t - rec_diag(k)) * cur - bk * prev) / rec_offdiag(k + 1);
    prev = cur;
    cur = next;
    if (std::abs(cur) > kBig) {
      cur /= kBig;
      prev /= kBig;
      scale += log_big;
      factor = std::exp(scale);
    }
    double val = cur * factor;
    if (std::isnan(val)) val = 0.0;  // overflowed polynomial under an underflowed envelope
    if (alt && ((k + 1) & 1)) val = -val;
    out[k + 1] = val;
  }
}

double AxisSystem::phi(int k, double x) const {
  if (k < 0) throw ArgumentError("negative index");
  if (k > kMaxDegree) throw ArgumentError("degree exceeds the configured maximum");
  std::vector<double> buf(k + 1);
  phi_upto(x, buf);
  return buf[k];
}

double AxisSystem::ladder_coefficient(int k) const {
  if (k == 0) return 0.0;
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::HermiteFunc:
      return std::sqrt(2.0 * k);
    case FamilyTag::LaguerrePoly:
      return -std::sqrt(k / (al + 1.0));
    case FamilyTag::JacobiPoly: {
      const double s = al + be;
      return std::sqrt(k * (k + s + 1.0) * (s + 2.0) * (s + 3.0) / (4.0 * (al + 1.0) * (be + 1.0)));
    }
    case FamilyTag::LaguerreFuncH:
    case FamilyTag::LaguerreFuncConv:
      return -2.0 * std::sqrt(static_cast<double>(k));
    case FamilyTag::JacobiFunc:
      return -std::sqrt(k * (k + al + be + 1.0));
  }
  return 0.0;
}

LadderResult AxisSystem::ladder(int k) const {
  if (k < 0) throw ArgumentError("negative index");
  LadderResult r;
  r.coefficient = ladder_coefficient(k);
  r.target_index = k > 0 ? k - 1 : 0;
  r.target_family = family_;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::HermiteFunc:
      r.multiplier = Multiplier::One;
      break;
    case FamilyTag::LaguerrePoly:
      r.target_family.alpha += 1.0;
      r.multiplier = Multiplier::SqrtX;
      break;
    case FamilyTag::JacobiPoly:
      r.target_family.alpha += 1.0;
      r.target_family.beta += 1.0;
      r.multiplier = Multiplier::SqrtOneMinusX2;
      break;
    case FamilyTag::LaguerreFuncH:
      r.target_family.alpha += 1.0;
      r.multiplier = Multiplier::One;
      break;
    case FamilyTag::LaguerreFuncConv:
      r.target_family.alpha += 1.0;
      r.multiplier = Multiplier::X;
      break;
    case FamilyTag::JacobiFunc:
      r.target_family.alpha += 1.0;
      r.target_family.beta += 1.0;
      r.multiplier = Multiplier::One;
      break;
  }
  return r;
}

AxisSystem AxisSystem::ladder_target() const { return AxisSystem(ladder(1).target_family); }

void AxisSystem::ladder_upto(double x, std::span<double> out) const {
  check_domain(x);
  const int n = static_cast<int>(out.size());
  if (n == 0) return;
  out[0] = 0.0;
  if (n == 1) return;
  const AxisSystem target = ladder_target();
  std::vector<double> tp(n - 1);
  target.phi_upto(x, tp);
  const double m = multiplier_value(ladder(1).multiplier, x);
  for (int k = 1; k < n; ++k) out[k] = ladder_coefficient(k) * m * tp[k - 1];
}

double AxisSystem::ladder_eval(int k, double x) const {
  if (k < 0) throw ArgumentError("negative index");
  std::vector<double> buf(k + 1);
  ladder_upto(x, buf);
  return buf[k];
}

void AxisSystem::dphi_upto(double x, std::span<double> out) const {
  const int n = static_cast<int>(out.size());
  if (n == 0) return;
  std::vector<double> ph(n);
  phi_upto(x, ph);
  ladder_upto(x, out);
  const double qx = q(x), px = p(x);
  for (int k = 0; k < n; ++k) out[k] = (out[k] - qx * ph[k]) / px;
}

double AxisSystem::dphi(int k, double x) const {
  if (k < 0) throw ArgumentError("negative index");
  std::vector<double> buf(k + 1);
  dphi_upto(x, buf);
  return buf[k];
}

void AxisSystem::ladder_derivative_upto(double x, std::span<double> out) const {
  check_domain(x);
  const int n = static_cast<int>(out.size());
  if (n == 0) return;
  out[0] = 0.0;
  if (n == 1) return;
  const AxisSystem target = ladder_target();
  std::vector<double> tp(n - 1), dtp(n - 1);
  target.phi_upto(x, tp);
  target.dphi_upto(x, dtp);
  const Multiplier mk = ladder(1).multiplier;
  const double m = multiplier_value(mk, x), dm = multiplier_derivative(mk, x);
  for (int k = 1; k < n; ++k) out[k] = ladder_coefficient(k) * (dm * tp[k - 1] + m * dtp[k - 1]);
}

double AxisSystem::p(double x) const {
  check_domain(x);
  switch (family_.tag) {
    case FamilyTag::LaguerrePoly:
      return std::sqrt(x);
    case FamilyTag::JacobiPoly:
      return std::sqrt((1.0 - x) * (1.0 + x));
    default:
      return 1.0;
  }
}

double AxisSystem::dp(double x) const {
  check_domain(x);
  switch (family_.tag) {
    case FamilyTag::LaguerrePoly:
      return 0.5 / std::sqrt(x);
    case FamilyTag::JacobiPoly:
      return -x / std::sqrt((1.0 - x) * (1.0 + x));
    default:
      return 0.0;
  }
}

double AxisSystem::d2p(double x) const {
  check_domain(x);
  switch (family_.tag) {
    case FamilyTag::LaguerrePoly:
      return -0.25 / (x * std::sqrt(x));
    case FamilyTag::JacobiPoly: {
      const double s = (1.0 - x) * (1.0 + x);
      return -1.0 / (s * std::sqrt(s));
    }
    default:
      return 0.0;
  }
}

double AxisSystem::q(double x) const {
  check_domain(x);
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::LaguerrePoly:
    case FamilyTag::JacobiPoly:
      return 0.0;
    case FamilyTag::HermiteFunc:
    case FamilyTag::LaguerreFuncConv:
      return x;
    case FamilyTag::LaguerreFuncH:
      return x - (al + 0.5) / x;
    case FamilyTag::JacobiFunc: {
      const double h = 0.5 * x;
      return -0.25 * (2.0 * al + 1.0) / std::tan(h) + 0.25 * (2.0 * be + 1.0) * std::tan(h);
    }
  }
  return 0.0;
}

double AxisSystem::dq(double x) const {
  check_domain(x);
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::LaguerrePoly:
    case FamilyTag::JacobiPoly:
      return 0.0;
    case FamilyTag::HermiteFunc:
    case FamilyTag::LaguerreFuncConv:
      return 1.0;
    case FamilyTag::LaguerreFuncH:
      return 1.0 + (al + 0.5) / (x * x);
    case FamilyTag::JacobiFunc: {
      const double s = std::sin(0.5 * x), c = std::cos(0.5 * x);
      return 0.125 * (2.0 * al + 1.0) / (s * s) + 0.125 * (2.0 * be + 1.0) / (c * c);
    }
  }
  return 0.0;
}

double AxisSystem::logw_prime(double x) const {
  check_domain(x);
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
      return -2.0 * x;
    case FamilyTag::LaguerrePoly:
      return al / x - 1.0;
    case FamilyTag::JacobiPoly:
      return -al / (1.0 - x) + be / (1.0 + x);
    case FamilyTag::LaguerreFuncConv:
      return (2.0 * al + 1.0) / x;
    default:
      return 0.0;
  }
}

double AxisSystem::logw_second(double x) const {
  check_domain(x);
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
      return -2.0;
    case FamilyTag::LaguerrePoly:
      return -al / (x * x);
    case FamilyTag::JacobiPoly:
      return -al / ((1.0 - x) * (1.0 - x)) - be / ((1.0 + x) * (1.0 + x));
    case FamilyTag::LaguerreFuncConv:
      return -(2.0 * al + 1.0) / (x * x);
    default:
      return 0.0;
  }
}

double AxisSystem::v(double x) const {
  check_domain(x);
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::HermiteFunc:
      return 2.0;
    case FamilyTag::LaguerrePoly:
      return (al + 0.5 + x) / (2.0 * x);
    case FamilyTag::JacobiPoly:
      return (al + 0.5) / (1.0 - x) + (be + 0.5) / (1.0 + x);
    case FamilyTag::LaguerreFuncH:
    case FamilyTag::LaguerreFuncConv:
      return 2.0 + (2.0 * al + 1.0) / (x * x);
    case FamilyTag::JacobiFunc: {
      const double s = std::sin(0.5 * x), c = std::cos(0.5 * x);
      return 0.25 * (2.0 * al + 1.0) / (s * s) + 0.25 * (2.0 * be + 1.0) / (c * c);
    }
  }
  return 0.0;
}

double AxisSystem::v_from_coefficients(double x) const {
  const double P = p(x), dP = dp(x), d2P = d2p(x);
  const double lw = logw_prime(x), lw2 = logw_second(x);
  return P * (2.0 * dq(x) - dP * lw - P * lw2 - d2P);
}

double AxisSystem::r(double x) const {
  check_domain(x);
  const double al = family_.alpha, be = family_.beta;
  switch (family_.tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::LaguerrePoly:
    case FamilyTag::JacobiPoly:
      return 0.0;
    case FamilyTag::HermiteFunc:
    case FamilyTag::LaguerreFuncConv:
      return x * x;
    case FamilyTag::LaguerreFuncH:
      return x * x + (al * al - 0.25) / (x * x);
    case FamilyTag::JacobiFunc: {
      const double s = std::sin(0.5 * x), c = std::cos(0.5 * x);
      return (4.0 * al * al - 1.0) / (16.0 * s * s) + (4.0 * be * be - 1.0) / (16.0 * c * c);
    }
  }
  return 0.0;
}

double AxisSystem::r_from_coefficients(double x) const {
  const double P = p(x), dP = dp(x), Q = q(x);
  return a_ + Q * Q - P * dq(x) - dP * Q - P * Q * logw_prime(x);
}

}  // namespace riesz
