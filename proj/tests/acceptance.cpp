// Acceptance run: the nine headline criteria at their pinned tolerances, each
// within its runtime budget. One PASS/FAIL line per criterion; exit status 1
// if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "riesz/harness.hpp"
#include "riesz/normest.hpp"

using namespace riesz;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int env_workers() {
  const char* s = std::getenv("RIESZ_WORKERS");
  const int n = s ? std::atoi(s) : 1;
  return n >= 1 ? n : 1;
}

SuiteConfig base(Suite s) {
  SuiteConfig cfg;
  cfg.suite = s;
  cfg.seed = 20240601;
  cfg.workers = env_workers();
  return cfg;
}

// Prints the failing records (at most a few) and returns the summary.
Outcome from_report(const SuiteReport& r) {
  Outcome o;
  o.pass = r.pass();
  o.detail = std::to_string(r.passed()) + "/" + std::to_string(r.records.size()) + " checks";
  int shown = 0;
  for (const auto& rec : r.records) {
    if (rec.pass || shown++ >= 8) continue;
    std::printf("    violated: %s value=%.6g target=%.6g %s\n", rec.id.c_str(), rec.value, rec.target,
                rec.note.c_str());
  }
  return o;
}

double max_value(const SuiteReport& r, const std::string& prefix) {
  double m = 0.0;
  for (const auto& rec : r.records)
    if (rec.id.rfind(prefix, 0) == 0) m = std::max(m, rec.value);
  return m;
}

Outcome ortho() { return from_report(run(base(Suite::Ortho))); }

Outcome assumptions() {
  SuiteConfig cfg = base(Suite::Assumptions);
  cfg.trials = 10000;
  Outcome o = from_report(run(cfg));
  // out-of-range parameters must be flagged
  SuiteConfig bad = cfg;
  bad.systems = {Family{FamilyTag::JacobiPoly, -0.9, 0.0}};
  const SuiteReport rb = run(bad);
  const bool flagged = !rb.records.empty() && !rb.records[0].pass;
  o.pass = o.pass && flagged;
  o.detail += flagged ? "; jacobi-poly(a=-0.9) flagged" : "; jacobi-poly(a=-0.9) NOT flagged";
  return o;
}

Outcome form1() {
  SuiteConfig cfg = base(Suite::Form1);
  cfg.trials = 100;
  const SuiteReport r = run(cfg);
  Outcome o = from_report(r);
  char buf[96];
  std::snprintf(buf, sizeof buf, "; worst relerr %.2e, t-rule %.2e", std::max(max_value(r, "form1.eigenpairs"),
                                                                                max_value(r, "form1.random")),
                max_value(r, "form1.t_integral"));
  o.detail += buf;
  return o;
}

Outcome contraction() {
  SuiteConfig cfg = base(Suite::Ladder);
  cfg.trials = 200;
  return from_report(run_contraction(cfg));
}

Outcome bellman() {
  SuiteConfig cfg = base(Suite::Bellman);
  cfg.trials = 10000;
  return from_report(run(cfg));
}

Outcome diffineq() { return from_report(run(base(Suite::DiffIneq))); }

Outcome embedding() {
  SuiteConfig cfg = base(Suite::Embedding);
  cfg.trials = 100;
  const SuiteReport r = run(cfg);
  Outcome o = from_report(r);
  double worst = 0.0;
  for (const auto& row : r.embedding_plot) worst = std::max(worst, row.max_ratio);
  char buf[64];
  std::snprintf(buf, sizeof buf, "; max ratio %.4f", worst);
  o.detail += buf;
  return o;
}

Outcome normbound() {
  SuiteConfig cfg = base(Suite::NormBound);
  const SuiteReport r = run(cfg);
  Outcome o = from_report(r);
  double worst = 0.0;
  for (const auto& row : r.norm_plot) worst = std::max(worst, row.lower_bound / row.paper_bound);
  char buf[96];
  std::snprintf(buf, sizeof buf, "; largest lower_bound / bound %.4f", worst);
  o.detail += buf;
  // dimension stability is a diagnostic only
  for (const auto& a : r.norm_plot) {
    if (a.d != 1) continue;
    double lo = a.lower_bound, hi = a.lower_bound;
    for (const auto& b : r.norm_plot)
      if (b.system == a.system && b.p == a.p) {
        lo = std::min(lo, b.lower_bound);
        hi = std::max(hi, b.lower_bound);
      }
    std::printf("    d-spread %-28s p=%-5g %.4f\n", a.system.c_str(), a.p, hi - lo);
  }
  return o;
}

Outcome constants() {
  const SuiteReport r = run(base(Suite::Constants));
  Outcome o = from_report(r);
  const ConstantsReport c = constants_report();
  char buf[96];
  std::snprintf(buf, sizeof buf, "; sup H = %.6f at s = %.6f", c.sup_H, c.argmax);
  o.detail += buf;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "orthonormality and eigen-structure", 30, ortho},
      {2, "assumption predicates", 10, assumptions},
      {3, "bilinear formula", 120, form1},
      {4, "L2 contraction", 60, contraction},
      {5, "Bellman function properties", 180, bellman},
      {6, "differential inequality", 180, diffineq},
      {7, "bilinear embedding", 600, embedding},
      {8, "norm bounds", 1200, normbound},
      {9, "constant chase", 5, constants},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s; %.1f s of %.0f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : " (over budget)");
    std::fflush(stdout);
  }
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
