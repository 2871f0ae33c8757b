// riesz-verify: runs one verification suite (or all of them) and writes the
// reports. Exit status 0 when every check passes, 1 on any violation, 2 on a
// configuration error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riesz/harness.hpp"

namespace {

int env_workers() {
  const char* s = std::getenv("RIESZ_WORKERS");
  if (!s || !*s) return 1;
  char* end = nullptr;
  const long n = std::strtol(s, &end, 10);
  if (*end != '\0' || n < 1 || n > 256) throw riesz::ConfigError("RIESZ_WORKERS must be an integer in [1, 256]");
  return static_cast<int>(n);
}

std::map<std::string, double> parse_tols(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw riesz::ConfigError("--tol expects KEY=V, got '" + item + "'");
    const std::string v = item.substr(eq + 1);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') throw riesz::ConfigError("bad tolerance value in '" + item + "'");
    out[item.substr(0, eq)] = x;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of dimension-free Riesz transform bounds"};
  std::string suite, system, out_dir = ".";
  double alpha = 0.0, beta = 0.0;
  int d = 0, N = 0, trials = 0;
  std::vector<double> p_list;
  std::uint64_t seed = 1;
  std::vector<std::string> tols;

  std::string suite_help = "one of";
  for (auto s : riesz::all_suites()) suite_help += " " + riesz::suite_name(s);
  suite_help += " all";
  app.add_option("suite", suite, suite_help)->required();
  app.add_option("--system", system, "family name, e.g. hermite-poly or jacobi-func");
  app.add_option("--alpha", alpha, "family parameter alpha");
  app.add_option("--beta", beta, "family parameter beta");
  app.add_option("--d", d, "dimension (1 to 3)");
  app.add_option("--N", N, "truncation degree per axis");
  app.add_option("--p", p_list, "comma separated exponents")->delimiter(',');
  app.add_option("--trials", trials, "random trials per cell");
  app.add_option("--seed", seed, "run seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--tol", tols, "tolerance override KEY=V (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  riesz::SuiteConfig cfg;
  try {
    cfg.suite = riesz::parse_suite(suite);
    if (!system.empty()) {
      try {
        cfg.systems.push_back(riesz::Family::parse(system, alpha, beta));
      } catch (const std::exception& ex) {
        throw riesz::ConfigError(ex.what());
      }
    }
    cfg.d = d;
    cfg.N = N;
    cfg.p_list = p_list;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.tol = parse_tols(tols);
    cfg.output_dir = out_dir;
    cfg.workers = env_workers();
    riesz::validate(cfg);
  } catch (const riesz::ConfigError& ex) {
    std::cerr << "riesz-verify: " << ex.what() << "\n";
    return 2;
  }

  riesz::SuiteReport report;
  try {
    report = riesz::run(cfg);
    riesz::emit(report, cfg.output_dir);
  } catch (const riesz::ConfigError& ex) {
    std::cerr << "riesz-verify: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "riesz-verify: " << ex.what() << "\n";
    return 1;
  }

  for (const auto& r : report.records)
    if (!r.pass)
      std::printf("FAIL %s value=%.6g target=%.6g %s\n", r.id.c_str(), r.value, r.target, r.note.c_str());
  std::printf("%s: %zu checks, %zu passed, %zu failed, %.1f s\n", riesz::suite_name(cfg.suite).c_str(),
              report.records.size(), report.passed(), report.failed(), report.wall_time);
  return riesz::exit_code(report);
}
