#include "riesz/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "riesz/bellman.hpp"
#include "riesz/embedding.hpp"
#include "riesz/errors.hpp"
#include "riesz/normest.hpp"
#include "riesz/quadgrid.hpp"
#include "riesz/spectral.hpp"

namespace riesz {

namespace {

constexpr struct {
  Suite suite;
  const char* name;
} kSuiteNames[] = {
    {Suite::Ortho, "ortho"},         {Suite::Ladder, "ladder"},     {Suite::Assumptions, "assumptions"},
    {Suite::Form1, "form1"},         {Suite::Embedding, "embedding"}, {Suite::Bellman, "bellman"},
    {Suite::DiffIneq, "diffineq"},   {Suite::NormBound, "normbound"}, {Suite::Constants, "constants"},
    {Suite::All, "all"},
};

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Runs fn(0..n-1) on up to `workers` threads; fn writes only its own slot.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nw; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

SuiteReport collect(std::vector<std::vector<CheckRecord>> cells) {
  SuiteReport r;
  for (auto& c : cells)
    for (auto& rec : c) r.records.push_back(std::move(rec));
  return r;
}

std::vector<int> dims_or(const SuiteConfig& cfg, std::vector<int> fallback) {
  if (cfg.d > 0) return {cfg.d};
  return fallback;
}

std::vector<double> ps_or(const SuiteConfig& cfg, std::vector<double> fallback) {
  return cfg.p_list.empty() ? fallback : cfg.p_list;
}

std::vector<Family> systems_or_default(const SuiteConfig& cfg) {
  return cfg.systems.empty() ? default_systems() : cfg.systems;
}

int trials_or(const SuiteConfig& cfg, int fallback) { return cfg.trials > 0 ? cfg.trials : fallback; }

// Central differences at h and h/2 combined to fourth order.
double fd1(const std::function<double(double)>& f, double x, double h) {
  auto D = [&](double s) { return (f(x + s) - f(x - s)) / (2.0 * s); };
  return (4.0 * D(0.5 * h) - D(h)) / 3.0;
}

double fd2(const std::function<double(double)>& f, double x, double h) {
  const double f0 = f(x);
  auto D = [&](double s) { return (f(x + s) - 2.0 * f0 + f(x - s)) / (s * s); };
  return (4.0 * D(0.5 * h) - D(h)) / 3.0;
}

double fd_step(const AxisSystem& ax, double x, double base = 1e-3) {
  double h = base;
  if (std::isfinite(ax.lower())) h = std::min(h, 0.2 * (x - ax.lower()));
  if (std::isfinite(ax.upper())) h = std::min(h, 0.2 * (ax.upper() - x));
  return h;
}

// Interior points for pointwise checks: nodes of a small Gauss rule.
std::vector<double> interior_points(const AxisSystem& ax) { return gauss_rule(ax, 8).nodes; }

// A random theorem-range parameter choice for a family.
Family sample_family(FamilyTag tag, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Family f{tag, 0.0, 0.0};
  switch (tag) {
    case FamilyTag::HermitePoly:
    case FamilyTag::HermiteFunc:
      break;
    case FamilyTag::LaguerrePoly:
    case FamilyTag::LaguerreFuncConv:
      f.alpha = -0.5 + 3.5 * U(rng);
      break;
    case FamilyTag::LaguerreFuncH:
      f.alpha = 0.55 + 2.45 * U(rng);
      break;
    case FamilyTag::JacobiPoly:
      f.alpha = -0.5 + 3.5 * U(rng);
      f.beta = -0.5 + 3.5 * U(rng);
      break;
    case FamilyTag::JacobiFunc:
      f.alpha = 0.5 + 2.5 * U(rng);
      f.beta = 0.5 + 2.5 * U(rng);
      break;
  }
  return f;
}

std::string cell_id(const std::string& check, const std::string& system, int d = 0, double p = 0.0) {
  std::string s = check + "/" + system;
  if (d > 0) s += "/d=" + std::to_string(d);
  if (p > 0.0) s += "/p=" + short_fmt(p);
  return s;
}

std::string inputs(const std::string& id, std::uint64_t seed, const std::string& extra = "") {
  return id + "|seed=" + std::to_string(seed) + "|" + extra;
}

CoeffFn random_coeffs(const ProductSystem& sys, int N, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> U(0.3, 1.0);
  const double rho = U(rng);
  CoeffFn f(sys, N);
  for (std::size_t j = 0; j < f.size(); ++j) {
    const MultiIndex k = f.multi(j);
    int s = 0;
    for (int v : k) s += v;
    f.data()[j] = g(rng) * std::pow(rho, s);
  }
  return f;
}

std::vector<ImageFrameFn> random_frames(const ProductSystem& sys, int N, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<ImageFrameFn> out;
  for (int i = 0; i < sys.dim(); ++i) {
    ImageFrameFn h(sys, i, N);
    for (std::size_t j = 0; j < h.size(); ++j)
      if (h.multi(j)[i] > 0) h.data()[j] = g(rng);
    out.push_back(h);
  }
  return out;
}

std::vector<std::vector<double>> random_points(const ProductSystem& sys, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const auto fallback = domain_samples(sys, n, rng());
  std::vector<std::vector<double>> out(n, std::vector<double>(sys.dim()));
  for (std::size_t j = 0; j < n; ++j)
    for (int i = 0; i < sys.dim(); ++i) {
      const AxisSystem& ax = sys.axis(i);
      out[j][i] = std::isinf(ax.lower()) && std::isinf(ax.upper()) ? 1.5 * g(rng) : fallback[j][i];
    }
  return out;
}

template <class F>
CheckRecord guarded(const std::string& id, const std::string& anchor, const std::string& in, F&& body) {
  try {
    return body();
  } catch (const std::exception& ex) {
    return error_check(id, anchor, in, ex.what());
  }
}

}  // namespace

Suite parse_suite(const std::string& name) {
  for (const auto& e : kSuiteNames)
    if (name == e.name) return e.suite;
  throw ConfigError("unknown suite '" + name + "'");
}

std::string suite_name(Suite s) {
  for (const auto& e : kSuiteNames)
    if (s == e.suite) return e.name;
  return "unknown";
}

const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> v{Suite::Ortho,   Suite::Ladder,   Suite::Assumptions,
                                    Suite::Form1,   Suite::Embedding, Suite::Bellman,
                                    Suite::DiffIneq, Suite::NormBound, Suite::Constants};
  return v;
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t{
      {"ortho.orthonormality", 1e-10},
      {"ortho.ladder_norm", 1e-8},
      {"ortho.eigen_fd", 1e-6},
      {"ladder.formula_fd", 1e-6},
      {"contraction.l2", 1e-10},
      {"contraction.attained", 1e-10},
      {"assumptions.a2_rel", 1e-12},
      {"form1.relerr", 1e-8},
      {"form1.t_rule", 1e-10},
      {"embedding.ratio", 1.0},
      {"bellman.size", 1e-12},
      {"bellman.gradient", 1e-12},
      {"bellman.hessian", 1e-8},
      {"bellman.radial", 1e-6},
      {"bellman.kappa", 0.01},
      {"diffineq.identity", 1e-4},
      {"diffineq.margin", 1e-6},
      {"diffineq.flagged", 0.05},
      {"constants.sup", 6.0},
      {"constants.closed_form", 1e-12},
  };
  return t;
}

double SuiteConfig::tolerance(const std::string& key) const {
  if (auto it = tol.find(key); it != tol.end()) return it->second;
  return default_tolerances().at(key);
}

void validate(const SuiteConfig& cfg) {
  if (cfg.d < 0 || cfg.d > 3) throw ConfigError("d must be between 1 and 3");
  if (cfg.N < 0) throw ConfigError("N must be nonnegative");
  if (cfg.d == 3 && cfg.N > 16) throw ConfigError("N must be at most 16 when d = 3");
  if (cfg.trials < 0) throw ConfigError("trials must be nonnegative");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  for (double p : cfg.p_list)
    if (!std::isfinite(p) || p <= 1.0) throw ConfigError("every p must be a finite number > 1");
  for (const auto& [k, v] : cfg.tol) {
    if (!default_tolerances().count(k)) throw ConfigError("unknown tolerance key '" + k + "'");
    if (!std::isfinite(v)) throw ConfigError("tolerance '" + k + "' must be finite");
  }
  for (const Family& f : cfg.systems) {
    try {
      AxisSystem ax(f);
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("bad system: ") + ex.what());
    }
  }
}

std::vector<Family> default_systems() {
  return {{FamilyTag::HermitePoly, 0.0, 0.0},      {FamilyTag::LaguerrePoly, 0.5, 0.0},
          {FamilyTag::JacobiPoly, 0.5, 1.0},       {FamilyTag::HermiteFunc, 0.0, 0.0},
          {FamilyTag::LaguerreFuncH, 1.5, 0.0},    {FamilyTag::LaguerreFuncConv, 0.5, 0.0},
          {FamilyTag::JacobiFunc, 1.0, 1.5}};
}

bool operator==(const CheckRecord& a, const CheckRecord& b) {
  return a.id == b.id && a.anchor == b.anchor && a.digest == b.digest && same_double(a.value, b.value) &&
         same_double(a.target, b.target) && same_double(a.margin, b.margin) && a.pass == b.pass && a.note == b.note;
}

bool operator==(const NormPlotRow& a, const NormPlotRow& b) {
  return a.system == b.system && a.d == b.d && same_double(a.p, b.p) && same_double(a.lower_bound, b.lower_bound) &&
         same_double(a.paper_bound, b.paper_bound);
}

CheckRecord upper_check(std::string id, std::string anchor, std::string in, double value, double target) {
  CheckRecord r{std::move(id), std::move(anchor), digest_hex(in), value, target, target - value, false, ""};
  r.pass = std::isfinite(value) && r.margin >= 0.0;
  return r;
}

CheckRecord lower_check(std::string id, std::string anchor, std::string in, double value, double target) {
  CheckRecord r{std::move(id), std::move(anchor), digest_hex(in), value, target, value - target, false, ""};
  r.pass = std::isfinite(value) && r.margin >= 0.0;
  return r;
}

CheckRecord error_check(std::string id, std::string anchor, std::string in, const std::string& what) {
  CheckRecord r{std::move(id), std::move(anchor), digest_hex(in), std::nan(""), std::nan(""), std::nan(""), false,
                "error: " + what};
  return r;
}

std::size_t SuiteReport::passed() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.pass; }));
}

std::size_t SuiteReport::failed() const { return records.size() - passed(); }

void SuiteReport::append(SuiteReport other) {
  for (auto& r : other.records) records.push_back(std::move(r));
  for (auto& r : other.embedding_plot) embedding_plot.push_back(std::move(r));
  for (auto& r : other.norm_plot) norm_plot.push_back(std::move(r));
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(const std::string& in) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(in)));
  return buf;
}

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 of the pair
  std::uint64_t x = seed ^ (index * 0x9e3779b97f4a7c15ULL);
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SuiteReport run_ortho(const SuiteConfig& cfg) {
  std::vector<Family> systems = cfg.systems;
  if (systems.empty()) {
    std::mt19937_64 rng(cfg.seed);
    for (FamilyTag tag : kAllFamilies) {
      systems.push_back(default_systems()[static_cast<int>(tag)]);
      if (tag == FamilyTag::HermitePoly || tag == FamilyTag::HermiteFunc) continue;
      for (int k = 0; k < 2; ++k) systems.push_back(sample_family(tag, rng));
    }
  }
  const int kmax = cfg.N > 0 ? cfg.N : 20;
  const double t_on = cfg.tolerance("ortho.orthonormality"), t_ln = cfg.tolerance("ortho.ladder_norm"),
               t_fd = cfg.tolerance("ortho.eigen_fd");
  std::vector<std::vector<CheckRecord>> cells(systems.size());
  parallel_for(systems.size(), cfg.workers, [&](std::size_t c) {
    const Family& fam = systems[c];
    const std::string sys = fam.describe();
    const std::string in = "kmax=" + std::to_string(kmax);
    auto& out = cells[c];

    std::string id = cell_id("ortho.orthonormality", sys);
    out.push_back(guarded(id, "<phi_k, phi_m> = delta_km", in, [&] {
      const AxisSystem ax(fam);
      const QuadRule rule = gauss_rule(ax, kmax + 4);
      std::vector<std::vector<double>> v(rule.size(), std::vector<double>(kmax + 1));
      for (std::size_t j = 0; j < rule.size(); ++j) ax.phi_upto(rule.nodes[j], v[j]);
      double worst = 0.0;
      for (int a = 0; a <= kmax; ++a)
        for (int b = a; b <= kmax; ++b) {
          double ip = 0.0;
          for (std::size_t j = 0; j < rule.size(); ++j) ip += rule.weights[j] * v[j][a] * v[j][b];
          worst = std::max(worst, std::abs(ip - (a == b ? 1.0 : 0.0)));
        }
      return upper_check(id, "<phi_k, phi_m> = delta_km", inputs(id, 0, in), worst, t_on);
    }));

    id = cell_id("ortho.ladder_norm", sys);
    out.push_back(guarded(id, "||delta phi_k||^2 = lambda_k - a", in, [&] {
      const AxisSystem ax(fam);
      const QuadRule rule = gauss_rule(ax, kmax + 6);
      std::vector<double> v(kmax + 1), n2(kmax + 1, 0.0);
      for (std::size_t j = 0; j < rule.size(); ++j) {
        ax.ladder_upto(rule.nodes[j], v);
        for (int k = 0; k <= kmax; ++k) n2[k] += rule.weights[j] * v[k] * v[k];
      }
      double worst = 0.0;
      for (int k = 0; k <= kmax; ++k)
        worst = std::max(worst, std::abs(n2[k] - ax.ladder_norm_sq(k)) / std::max(1.0, ax.lambda(k)));
      return upper_check(id, "||delta phi_k||^2 = lambda_k - a", inputs(id, 0, in), worst, t_ln);
    }));

    id = cell_id("ortho.eigen_fd", sys);
    out.push_back(guarded(id, "L phi_k = lambda_k phi_k", in, [&] {
      const AxisSystem ax(fam);
      double worst = 0.0;
      for (double x : interior_points(ax)) {
        // Scaled by the sum of the term magnitudes: near a zero of phi_k the
        // terms cancel and |phi_k| alone would overstate the FD roundoff.
        const double P = ax.p(x);
        for (int k = 0; k <= kmax; ++k) {
          // phi_k oscillates on the scale p(x) / sqrt(lambda_k)
          const double h = fd_step(ax, x, 0.02 * P / std::sqrt(std::max(1.0, ax.lambda(k))));
          auto f = [&](double y) { return ax.phi(k, y); };
          const double t2 = P * P * fd2(f, x, h), t1 = P * (P * ax.logw_prime(x) + 2.0 * ax.dp(x)) * fd1(f, x, h),
                       t0 = ax.r(x) * f(x);
          const double Lf = -t2 - t1 + t0;
          const double scale =
              std::max(1.0, std::abs(t2) + std::abs(t1) + std::abs(t0) + ax.lambda(k) * std::abs(f(x)));
          worst = std::max(worst, std::abs(Lf - ax.lambda(k) * f(x)) / scale);
        }
      }
      return upper_check(id, "L phi_k = lambda_k phi_k", inputs(id, 0, in), worst, t_fd);
    }));
  });
  return collect(std::move(cells));
}

SuiteReport run_ladder(const SuiteConfig& cfg) {
  const auto systems = systems_or_default(cfg);
  const int kmax = cfg.N > 0 ? cfg.N : 12;
  const double tol = cfg.tolerance("ladder.formula_fd");
  std::vector<std::vector<CheckRecord>> cells(systems.size());
  parallel_for(systems.size(), cfg.workers, [&](std::size_t c) {
    const Family& fam = systems[c];
    const std::string id = cell_id("ladder.formula_fd", fam.describe());
    const std::string in = "kmax=" + std::to_string(kmax);
    const std::string anchor = "ladder formula for delta phi_k agrees with p d/dx + q";
    cells[c].push_back(guarded(id, anchor, in, [&] {
      const AxisSystem ax(fam);
      double worst = 0.0;
      for (double x : interior_points(ax)) {
        const double h = fd_step(ax, x);
        for (int k = 0; k <= kmax; ++k) {
          auto f = [&](double y) { return ax.phi(k, y); };
          const double expect = ax.p(x) * fd1(f, x, h) + ax.q(x) * f(x);
          worst = std::max(worst, std::abs(ax.ladder_eval(k, x) - expect) / std::max(1.0, std::abs(expect)));
        }
      }
      return upper_check(id, anchor, inputs(id, 0, in), worst, tol);
    }));
  });
  SuiteReport r = collect(std::move(cells));
  r.append(run_contraction(cfg));
  return r;
}

SuiteReport run_contraction(const SuiteConfig& cfg) {
  const auto systems = systems_or_default(cfg);
  const auto dims = dims_or(cfg, {1, 2});
  const int trials = trials_or(cfg, 200);
  const double tol = cfg.tolerance("contraction.l2"), tol_eq = cfg.tolerance("contraction.attained");
  const std::string anchor = "||R f||_2 <= ||f||_2";
  struct Cell {
    Family fam;
    int d;
  };
  std::vector<Cell> list;
  for (const auto& f : systems)
    for (int d : dims) list.push_back({f, d});
  std::vector<std::vector<CheckRecord>> cells(list.size());
  parallel_for(list.size(), cfg.workers, [&](std::size_t c) {
    const auto [fam, d] = list[c];
    const int N = cfg.N > 0 ? cfg.N : (d == 1 ? 10 : d == 2 ? 6 : 3);
    const std::uint64_t seed = cell_seed(cfg.seed, c);
    const std::string id = cell_id("contraction.l2", fam.describe(), d);
    const std::string in = inputs(id, seed, "N=" + std::to_string(N) + "|trials=" + std::to_string(trials));
    cells[c].push_back(guarded(id, anchor, in, [&] {
      const ProductSystem sys(fam, d);
      const GridPtr grid = analysis_grid(sys, N);
      std::mt19937_64 rng(seed);
      double worst = 0.0;
      for (int t = 0; t < trials; ++t) {
        const CoeffFn f = random_coeffs(sys, N, rng);
        worst = std::max(worst, lp_norm(riesz_vector(f, grid), 2.0) / lp_norm(synthesize(f, grid), 2.0));
      }
      return upper_check(id, anchor, in, worst, 1.0 + tol);
    }));
    if (fam.tag == FamilyTag::HermitePoly && d == 1) {
      const std::string eid = cell_id("contraction.attained", fam.describe(), d);
      cells[c].push_back(guarded(eid, "||R phi_1||_2 = ||phi_1||_2 for Ornstein-Uhlenbeck", "", [&] {
        const ProductSystem sys(fam, 1);
        const std::vector<int> k{1};
        const CoeffFn f = CoeffFn::basis(sys, 2, k);
        const GridPtr grid = analysis_grid(sys, 2);
        const double ratio = lp_norm(riesz_vector(f, grid), 2.0) / lp_norm(synthesize(f, grid), 2.0);
        return upper_check(eid, "||R phi_1||_2 = ||phi_1||_2 for Ornstein-Uhlenbeck", inputs(eid, 0),
                           std::abs(ratio - 1.0), tol_eq);
      }));
    }
  });
  return collect(std::move(cells));
}

SuiteReport run_assumptions(const SuiteConfig& cfg) {
  const auto systems = systems_or_default(cfg);
  const int d = cfg.d > 0 ? cfg.d : 1;
  const int samples = trials_or(cfg, 10000);
  const double rel = cfg.tolerance("assumptions.a2_rel");
  std::vector<std::vector<CheckRecord>> cells(systems.size());
  parallel_for(systems.size(), cfg.workers, [&](std::size_t c) {
    const Family& fam = systems[c];
    const std::uint64_t seed = cell_seed(cfg.seed, c);
    const std::string sys_name = fam.describe();
    const std::string in = "samples=" + std::to_string(samples);
    std::string id = cell_id("assumptions.A1", sys_name, d);
    const std::string a1 = "v_i >= 0";
    cells[c].push_back(guarded(id, a1, in, [&] {
      const ProductSystem sys(fam, d);
      const auto pc = check_A1(sys, domain_samples(sys, samples, seed));
      auto r = lower_check(id, a1, inputs(id, seed, in), pc.worst_margin, 0.0);
      if (!sys.theorem_range()) r.note = "parameters outside the theorem range";
      return r;
    }));
    id = cell_id("assumptions.A2", sys_name, d);
    const std::string a2 = "sum q_i^2 <= K r with the listed K";
    cells[c].push_back(guarded(id, a2, in, [&] {
      const ProductSystem sys(fam, d);
      const auto pc = check_A2(sys, domain_samples(sys, samples, seed), sys.K(), rel);
      auto r = lower_check(id, a2, inputs(id, seed, in), pc.worst_margin, 0.0);
      r.note = "K=" + short_fmt(sys.K()) + " sup q^2/r=" + short_fmt(pc.sup_ratio);
      if (!sys.theorem_range()) r.note += " parameters outside the theorem range";
      return r;
    }));
  });
  return collect(std::move(cells));
}

SuiteReport run_form1(const SuiteConfig& cfg) {
  const auto systems = systems_or_default(cfg);
  const auto dims = dims_or(cfg, {1, 2});
  const int trials = trials_or(cfg, 100);
  const int total = cfg.N > 0 ? cfg.N : 6;
  const double tol = cfg.tolerance("form1.relerr"), tol_t = cfg.tolerance("form1.t_rule");
  const std::string anchor = "<R_i f, g> = -4 int <delta_i P_t Pi f, d_t Q_t g> t dt";
  struct Cell {
    Family fam;
    int d;
  };
  std::vector<Cell> list;
  for (const auto& f : systems)
    for (int d : dims) list.push_back({f, d});
  std::vector<std::vector<CheckRecord>> cells(list.size());
  parallel_for(list.size(), cfg.workers, [&](std::size_t c) {
    const auto [fam, d] = list[c];
    const std::uint64_t seed = cell_seed(cfg.seed, c);
    const std::string sys_name = fam.describe();
    double worst_t = 0.0;
    bool t_ok = true;

    std::string id = cell_id("form1.eigenpairs", sys_name, d);
    std::string in = inputs(id, 0, "total=" + std::to_string(total));
    cells[c].push_back(guarded(id, anchor, in, [&] {
      const ProductSystem sys(fam, d);
      const CoeffFn probe(sys, total);
      double worst = 0.0;
      for (std::size_t a = 0; a < probe.size(); ++a) {
        const MultiIndex k = probe.multi(a);
        int sk = 0;
        for (int v : k) sk += v;
        if (sk > total) continue;
        const CoeffFn f = CoeffFn::basis(sys, total, k);
        for (int i = 0; i < d; ++i)
          for (std::size_t b = 0; b < probe.size(); ++b) {
            const MultiIndex n = probe.multi(b);
            int sn = 0;
            for (int v : n) sn += v;
            if (sn > total || n[i] == 0) continue;
            ImageFrameFn g(sys, i, total);
            g.set(n, 1.0);
            const Form1Result r = form1_check(f, i, g);
            worst = std::max(worst, r.relerr);
            worst_t = std::max(worst_t, r.t_rule_err);
          }
      }
      return upper_check(id, anchor, in, worst, tol);
    }));
    if (!cells[c].back().note.empty()) t_ok = false;

    id = cell_id("form1.random", sys_name, d);
    const int N = d == 1 ? 8 : 5;
    in = inputs(id, seed, "N=" + std::to_string(N) + "|trials=" + std::to_string(trials));
    cells[c].push_back(guarded(id, anchor, in, [&] {
      const ProductSystem sys(fam, d);
      std::mt19937_64 rng(seed);
      double worst = 0.0;
      for (int t = 0; t < trials; ++t) {
        const CoeffFn f = random_coeffs(sys, N, rng);
        const auto g = random_frames(sys, N, rng);
        for (int i = 0; i < d; ++i) {
          const Form1Result r = form1_check(f, i, g[i]);
          worst = std::max(worst, r.relerr);
          worst_t = std::max(worst_t, r.t_rule_err);
        }
      }
      return upper_check(id, anchor, in, worst, tol);
    }));
    if (!cells[c].back().note.empty()) t_ok = false;

    id = cell_id("form1.t_integral", sys_name, d);
    const std::string ta = "int e^{-(sqrt l_k + sqrt l_n) t} t dt = (sqrt l_k + sqrt l_n)^-2";
    if (t_ok)
      cells[c].push_back(upper_check(id, ta, inputs(id, seed), worst_t, tol_t));
    else
      cells[c].push_back(error_check(id, ta, inputs(id, seed), "bilinear formula checks did not complete"));
  });
  return collect(std::move(cells));
}

SuiteReport run_embedding(const SuiteConfig& cfg) {
  const auto systems = systems_or_default(cfg);
  const auto dims = dims_or(cfg, {1, 2});
  const auto ps = ps_or(cfg, {1.5, 2.0, 3.0, 6.0});
  const int trials = trials_or(cfg, 100);
  const double target = cfg.tolerance("embedding.ratio");
  const std::string anchor = "int int |F|_* |G|_* t <= 6 (p* - 1) ||f||_p ||g||_q";
  struct Cell {
    Family fam;
    int d;
    double p;
  };
  std::vector<Cell> list;
  for (const auto& f : systems)
    for (int d : dims)
      for (double p : ps) list.push_back({f, d, p});
  std::vector<std::vector<CheckRecord>> cells(list.size());
  std::vector<EmbeddingPlotRow> plot(list.size());
  parallel_for(list.size(), cfg.workers, [&](std::size_t c) {
    const auto [fam, d, p] = list[c];
    const std::uint64_t seed = cell_seed(cfg.seed, c);
    const int Nmax = cfg.N > 0 ? std::min(cfg.N, 8) : (d == 1 ? 8 : 5);
    const std::string id = cell_id("embedding.ratio", fam.describe(), d, p);
    const std::string in = inputs(id, seed, "Nmax=" + std::to_string(Nmax) + "|trials=" + std::to_string(trials));
    plot[c] = {fam.describe(), d, p, std::nan("")};
    cells[c].push_back(guarded(id, anchor, in, [&] {
      const ProductSystem sys(fam, d);
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> UN(1, Nmax);
      double worst = 0.0;
      bool certified = true;
      int unconverged = 0;
      double worst_change = 0.0;
      for (int t = 0; t < trials; ++t) {
        const int N = UN(rng);
        const CoeffFn f = random_coeffs(sys, N, rng);
        const FlowState st(f, random_frames(sys, N, rng), p);
        const EmbeddingResult r = embedding_check(st);
        worst = std::max(worst, r.ratio);
        certified = certified && r.tail_certified;
        unconverged += r.norms_converged ? 0 : 1;
        worst_change = std::max(worst_change, r.norm_rel_change);
      }
      plot[c].max_ratio = worst;
      auto rec = upper_check(id, anchor, in, worst, target);
      rec.note = std::string("max ratio over ") + std::to_string(trials) + " trials" +
                 (certified ? "" : "; tail bound not certified") +
                 (unconverged ? "; " + std::to_string(unconverged) + " trials with norms at the node cap" : "") +
                 "; worst norm refinement change " + short_fmt(worst_change);
      return rec;
    }));
  });
  SuiteReport r = collect(std::move(cells));
  r.embedding_plot = std::move(plot);
  return r;
}

SuiteReport run_bellman(const SuiteConfig& cfg) {
  const auto ps = ps_or(cfg, {2.0, 3.0, 6.0});
  const int n = trials_or(cfg, 10000);
  const double kappa = cfg.tolerance("bellman.kappa");
  const double t_size = cfg.tolerance("bellman.size"), t_grad = cfg.tolerance("bellman.gradient"),
               t_hess = cfg.tolerance("bellman.hessian"), t_rad = cfg.tolerance("bellman.radial");
  struct Cell {
    double p;
    int m1, m2;
  };
  std::vector<Cell> list;
  for (double p : ps)
    for (auto [m1, m2] : {std::pair{1, 1}, std::pair{1, 2}}) list.push_back({p, m1, m2});
  std::vector<std::vector<CheckRecord>> cells(list.size());

  parallel_for(list.size(), cfg.workers, [&](std::size_t c) {
    const auto [p, m1, m2] = list[c];
    const std::uint64_t seed = cell_seed(cfg.seed, c);
    const std::string tag = "m=(" + std::to_string(m1) + "," + std::to_string(m2) + ")";
    auto idf = [&](const std::string& check) { return check + "/" + tag + "/p=" + short_fmt(p); };
    const std::string in = "n=" + std::to_string(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lu(-3.0, 2.0);
    std::normal_distribution<double> g;
    auto point = [&](const BellmanParams& bp) {
      BellmanPoint pt{std::vector<double>(bp.m1), std::vector<double>(bp.m2)};
      auto fill = [&](std::vector<double>& v) {
        double s = 0.0;
        for (double& x : v) {
          x = g(rng);
          s += x * x;
        }
        const double len = std::exp(lu(rng)) / std::sqrt(s);
        for (double& x : v) x *= len;
      };
      fill(pt.zeta);
      fill(pt.eta);
      return pt;
    };

    std::string id = idf("bellman.size");
    const std::string sa = "0 <= beta(s1, s2) <= (1 + gamma) (s1^p + s2^q)";
    cells[c].push_back(guarded(id, sa, in, [&] {
      const BellmanParams bp(p, m1, m2);
      double worst = -1e300;
      for (int i = 0; i < n; ++i) {
        const double s1 = std::exp(lu(rng)), s2 = std::exp(lu(rng));
        const double b = beta(bp, s1, s2), top = (1.0 + bp.gamma) * (std::pow(s1, bp.p) + std::pow(s2, bp.q));
        worst = std::max({worst, b / top - 1.0, -b / top});
      }
      return upper_check(id, sa, inputs(id, seed, in), worst, t_size);
    }));

    id = idf("bellman.gradient");
    const std::string ga = "d beta / d s1 >= 0 and d beta / d s2 >= 0";
    cells[c].push_back(guarded(id, ga, in, [&] {
      const BellmanParams bp(p, m1, m2);
      double worst = 1e300;
      for (int i = 0; i < n; ++i) {
        const auto dv = beta_derivs(bp, std::exp(lu(rng)), std::exp(lu(rng)));
        worst = std::min({worst, dv.d1, dv.d2});
      }
      return lower_check(id, ga, inputs(id, seed, in), worst, -t_grad);
    }));

    id = idf("bellman.hessian");
    const std::string ha = "<Hess B w, w> >= gamma |w_1| |w_2|";
    cells[c].push_back(guarded(id, ha, in, [&] {
      const BellmanParams bp(p, m1, m2);
      double worst = 1e300;
      int tested = 0;
      while (tested < n) {
        const auto pt = point(bp);
        if (singular_distance(bp, pt) <= kSingularExclusion) continue;
        ++tested;
        worst = std::min(worst, check_hess_lower(bp, pt, 8, rng()).margin);
      }
      return lower_check(id, ha, inputs(id, seed, in), worst, -t_hess);
    }));

    id = idf("bellman.radial");
    const std::string ra = "<grad B_kappa(xi), xi> + kappa E_kappa(xi) >= gamma |zeta| |eta|";
    cells[c].push_back(guarded(id, ra, in, [&] {
      const BellmanParams bp(p, m1, m2, kappa);
      double worst = 1e300;
      for (int i = 0; i < n; ++i) worst = std::min(worst, check_grad_radial(bp, point(bp)));
      auto r = lower_check(id, ra, inputs(id, seed, in + "|kappa=" + short_fmt(kappa)), worst, -t_rad);
      r.note = "kappa=" + short_fmt(kappa);
      return r;
    }));
  });
  return collect(std::move(cells));
}

SuiteReport run_diffineq(const SuiteConfig& cfg) {
  const std::vector<Family> systems = cfg.systems.empty()
                                          ? std::vector<Family>{{FamilyTag::HermitePoly, 0, 0}, {FamilyTag::HermiteFunc, 0, 0}}
                                          : cfg.systems;
  const auto dims = dims_or(cfg, {1, 2});
  const auto ps = ps_or(cfg, {1.5, 2.0, 3.0, 6.0});
  const int trials = trials_or(cfg, 20);
  const double t_id = cfg.tolerance("diffineq.identity"), t_m = cfg.tolerance("diffineq.margin"),
               t_fl = cfg.tolerance("diffineq.flagged");
  struct Cell {
    Family fam;
    int d;
    double p;
  };
  std::vector<Cell> list;
  for (const auto& f : systems)
    for (int d : dims)
      for (double p : ps) list.push_back({f, d, p});
  std::vector<std::vector<CheckRecord>> cells(list.size());
  parallel_for(list.size(), cfg.workers, [&](std::size_t c) {
    const auto [fam, d, p] = list[c];
    const std::uint64_t seed = cell_seed(cfg.seed, c);
    const int N = cfg.N > 0 ? cfg.N : 4;
    const std::string sys_name = fam.describe();
    const std::string in = "N=" + std::to_string(N) + "|trials=" + std::to_string(trials);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.05, 2.0);

    std::string id = cell_id("diffineq.identity", sys_name, d, p);
    const std::string ia = "(d_t^2 - tilde L) b equals the chain-rule expression";
    cells[c].push_back(guarded(id, ia, in, [&] {
      const ProductSystem sys(fam, d);
      const FlowState st(random_coeffs(sys, N, rng), random_frames(sys, N, rng), p, 8);
      double worst = 0.0;
      int done = 0, attempts = 0;
      while (done < trials && attempts < 20 * trials) {
        ++attempts;
        const auto xs = random_points(sys, 1, rng);
        const DiffIneqReport rep = diff_ineq_check(st, xs, {ut(rng)});
        if (rep.evaluated == 0) continue;
        ++done;
        worst = std::max(worst, rep.worst_identity_relerr);
      }
      if (done < trials) throw EstimationError("too many points in the singular region");
      return upper_check(id, ia, inputs(id, seed, in), worst, t_id);
    }));

    const ProductSystem sys(fam, d);
    const auto xs = random_points(sys, 30, rng);
    std::optional<DiffIneqReport> sweep;
    std::string sweep_error;
    try {
      const FlowState st(random_coeffs(sys, N, rng), random_frames(sys, N, rng), p, 8);
      sweep = diff_ineq_check(st, xs, {0.05, 0.4, 1.5});
    } catch (const std::exception& ex) {
      sweep_error = ex.what();
    }
    const std::string sin = in + "|points=90";
    id = cell_id("diffineq.margin", sys_name, d, p);
    const std::string ma = "(d_t^2 - tilde L) b >= gamma |F|_* |G|_*";
    if (sweep) {
      auto r = lower_check(id, ma, inputs(id, seed, sin), sweep->worst_margin, -t_m);
      r.note = std::to_string(sweep->flagged) + " of " + std::to_string(sweep->points.size()) +
               " points flagged near the singular set";
      cells[c].push_back(r);
    } else {
      cells[c].push_back(error_check(id, ma, inputs(id, seed, sin), sweep_error));
    }
    id = cell_id("diffineq.flagged", sys_name, d, p);
    const std::string fa = "fraction of sweep points excluded near the singular set";
    if (sweep)
      cells[c].push_back(upper_check(id, fa, inputs(id, seed, sin),
                                     static_cast<double>(sweep->flagged) / sweep->points.size(), t_fl));
    else
      cells[c].push_back(error_check(id, fa, inputs(id, seed, sin), sweep_error));
    id = cell_id("diffineq.v_term", sys_name, d, p);
    const std::string va = "sum v_i (d B / d G_i) G_i >= 0";
    if (sweep)
      cells[c].push_back(lower_check(id, va, inputs(id, seed, sin), sweep->min_v_term, 0.0));
    else
      cells[c].push_back(error_check(id, va, inputs(id, seed, sin), sweep_error));
  });
  return collect(std::move(cells));
}

SuiteReport run_normbound(const SuiteConfig& cfg) {
  BoundSuiteConfig bc;
  bc.systems = systems_or_default(cfg);
  bc.p_grid = ps_or(cfg, {1.25, 1.5, 2.0, 3.0, 6.0});
  bc.d_grid = dims_or(cfg, {1, 2, 3});
  if (cfg.N > 0) bc.N = cfg.N;
  bc.seed = cfg.seed;
  bc.workers = cfg.workers;
  const BoundSuiteReport rep = bound_suite(bc);
  SuiteReport out;
  const std::string anchor = "||R f||_p <= 24 (1 + sqrt K) (p* - 1) ||f||_p";
  for (const auto& c : rep.cells) {
    const std::string sys = c.family.describe();
    const std::string id = cell_id("normbound.paper", sys, c.d, c.p);
    const std::string in = inputs(id, c.seed, "N=" + std::to_string(c.N));
    if (!c.error.empty()) {
      out.records.push_back(error_check(id, anchor, in, c.error));
      continue;
    }
    auto r = upper_check(id, anchor, in, c.lower_bound, c.paper_bound);
    r.note = "boyd=" + short_fmt(c.boyd.lower_bound) + " ascent=" + short_fmt(c.ascent.lower_bound) +
             " N=" + std::to_string(c.N);
    out.records.push_back(r);
    if (c.arcozzi > 0.0) {
      const std::string aid = cell_id("normbound.ou_sharp", sys, c.d, c.p);
      out.records.push_back(upper_check(aid, "||R f||_p <= 2 (p* - 1) ||f||_p for Ornstein-Uhlenbeck",
                                        inputs(aid, c.seed, "N=" + std::to_string(c.N)), c.lower_bound,
                                        c.arcozzi));
    }
    out.norm_plot.push_back({sys, c.d, c.p, c.lower_bound, c.paper_bound});
  }
  return out;
}

SuiteReport run_constants(const SuiteConfig& cfg) {
  SuiteReport out;
  const double sup_target = cfg.tolerance("constants.sup"), cf = cfg.tolerance("constants.closed_form");
  const ConstantsReport rep = constants_report();
  out.records.push_back(upper_check("constants.H_at_1", "H(1) = 5", "constants.H_at_1", std::abs(rep.H_at_1 - 5.0),
                                    1e-14));
  auto sup = upper_check("constants.sup_H", "sup_{0<s<=1} (s + 4) s^{-s/(s+1)} < 6", "constants.sup_H", rep.sup_H,
                         sup_target);
  sup.pass = sup.pass && rep.sup_H < sup_target;
  sup.note = "argmax=" + fmt(rep.argmax);
  out.records.push_back(sup);
  out.records.push_back(lower_check("constants.argmax", "the maximizer of H lies in (7/20, 2/5)", "constants.argmax",
                                    std::min(rep.argmax - 0.35, 0.4 - rep.argmax), 0.0));
  out.records.back().pass = out.records.back().pass && rep.argmax_in_interval;
  out.records.push_back(upper_check("constants.interval_bound", "max of H on [7/20, 2/5] < (22/5)(7/20)^{-2/7} < 6",
                                    "constants.interval_bound", rep.sup_H, rep.interval_bound));
  out.records.back().pass = out.records.back().pass && rep.interval_bound < 6.0;
  out.records.back().note = "(22/5)(7/20)^{-2/7}=" + fmt(rep.interval_bound);

  double worst_ratio = 0.0, worst_cf = 0.0;
  for (const auto& row : rep.rows) {
    worst_ratio = std::max(worst_ratio, row.polarization / row.target);
    worst_cf = std::max(worst_cf, std::abs(row.polarization - row.closed_form) / row.closed_form);
  }
  const std::string in = "p in [2, 1e3], " + std::to_string(rep.rows.size()) + " points";
  out.records.push_back(upper_check("constants.polarization",
                                    "(1 + gamma)/(2 gamma) ((p/q)^{1/p} + (q/p)^{1/q}) <= 6 (p* - 1)",
                                    "constants.polarization|" + in, worst_ratio, 1.0));
  out.records.back().pass = out.records.back().pass && rep.rows_ok;
  out.records.push_back(upper_check("constants.closed_form",
                                    "polarization constant = (8 + q (q - 1))/2 (q - 1)^{1/q - 1} (p - 1)",
                                    "constants.closed_form|" + in, worst_cf, cf));
  return out;
}

SuiteReport run(const SuiteConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  SuiteReport out;
  auto one = [&](Suite s) {
    switch (s) {
      case Suite::Ortho: return run_ortho(cfg);
      case Suite::Ladder: return run_ladder(cfg);
      case Suite::Assumptions: return run_assumptions(cfg);
      case Suite::Form1: return run_form1(cfg);
      case Suite::Embedding: return run_embedding(cfg);
      case Suite::Bellman: return run_bellman(cfg);
      case Suite::DiffIneq: return run_diffineq(cfg);
      case Suite::NormBound: return run_normbound(cfg);
      case Suite::Constants: return run_constants(cfg);
      case Suite::All: break;
    }
    return SuiteReport{};
  };
  if (cfg.suite == Suite::All)
    for (Suite s : all_suites()) out.append(one(s));
  else
    out = one(cfg.suite);
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

int exit_code(const SuiteReport& report) { return report.pass() ? 0 : 1; }

namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double num(const nlohmann::json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_json(const SuiteReport& report) {
  nlohmann::json j;
  j["summary"] = {{"checks", report.records.size()}, {"passed", report.passed()}, {"failed", report.failed()},
                  {"pass", report.pass()}};
  j["wall_time"] = report.wall_time;
  j["records"] = nlohmann::json::array();
  for (const auto& r : report.records)
    j["records"].push_back({{"id", r.id},
                            {"anchor", r.anchor},
                            {"digest", r.digest},
                            {"value", num(r.value)},
                            {"target", num(r.target)},
                            {"margin", num(r.margin)},
                            {"pass", r.pass},
                            {"note", r.note}});
  j["embedding_plot"] = nlohmann::json::array();
  for (const auto& r : report.embedding_plot)
    j["embedding_plot"].push_back({{"system", r.system}, {"d", r.d}, {"p", r.p}, {"max_ratio", num(r.max_ratio)}});
  j["norm_plot"] = nlohmann::json::array();
  for (const auto& r : report.norm_plot)
    j["norm_plot"].push_back({{"system", r.system},
                              {"d", r.d},
                              {"p", r.p},
                              {"lower_bound", num(r.lower_bound)},
                              {"paper_bound", num(r.paper_bound)}});
  return j.dump(2) + "\n";
}

SuiteReport report_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SuiteReport r;
  r.wall_time = j.at("wall_time").get<double>();
  for (const auto& e : j.at("records"))
    r.records.push_back({e.at("id").get<std::string>(), e.at("anchor").get<std::string>(),
                         e.at("digest").get<std::string>(), num(e.at("value")), num(e.at("target")),
                         num(e.at("margin")), e.at("pass").get<bool>(), e.at("note").get<std::string>()});
  for (const auto& e : j.at("embedding_plot"))
    r.embedding_plot.push_back(
        {e.at("system").get<std::string>(), e.at("d").get<int>(), e.at("p").get<double>(), num(e.at("max_ratio"))});
  for (const auto& e : j.at("norm_plot"))
    r.norm_plot.push_back({e.at("system").get<std::string>(), e.at("d").get<int>(), e.at("p").get<double>(),
                           num(e.at("lower_bound")), num(e.at("paper_bound"))});
  return r;
}

std::string to_csv(const SuiteReport& report) {
  std::string s = "id,anchor,digest,value,target,margin,pass,note\n";
  for (const auto& r : report.records)
    s += csv_field(r.id) + "," + csv_field(r.anchor) + "," + r.digest + "," + fmt(r.value) + "," + fmt(r.target) +
         "," + fmt(r.margin) + "," + (r.pass ? "1" : "0") + "," + csv_field(r.note) + "\n";
  return s;
}

std::string embedding_plot_csv(const SuiteReport& report) {
  std::string s = "system,d,p,max_ratio\n";
  for (const auto& r : report.embedding_plot)
    s += csv_field(r.system) + "," + std::to_string(r.d) + "," + fmt(r.p) + "," + fmt(r.max_ratio) + "\n";
  return s;
}

std::string norm_plot_csv(const SuiteReport& report) {
  std::string s = "system,d,p,lower_bound,paper_bound,margin\n";
  for (const auto& r : report.norm_plot)
    s += csv_field(r.system) + "," + std::to_string(r.d) + "," + fmt(r.p) + "," + fmt(r.lower_bound) + "," +
         fmt(r.paper_bound) + "," + fmt(r.paper_bound - r.lower_bound) + "\n";
  return s;
}

void emit(const SuiteReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& body) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << body;
    out.close();
    if (!out) throw std::runtime_error("write failed for " + path.string());
  };
  write("report.json", to_json(report));
  write("report.csv", to_csv(report));
  write("plotdata_embedding.csv", embedding_plot_csv(report));
  write("plotdata_normbound.csv", norm_plot_csv(report));
}

}  // namespace riesz
