#pragma once

// Suite orchestration for riesz-verify: configuration, per-check records,
// deterministic seeding, and the JSON/CSV reports.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "riesz/orthosys.hpp"

namespace riesz {

enum class Suite { Ortho, Ladder, Assumptions, Form1, Embedding, Bellman, DiffIneq, NormBound, Constants, All };

Suite parse_suite(const std::string& name);
std::string suite_name(Suite s);
const std::vector<Suite>& all_suites();

/// Bad configuration: unknown suite, system or tolerance key, or out-of-range sizes.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Default tolerances, one entry per check kind. Every key can be overridden
/// with --tol KEY=V.
const std::map<std::string, double>& default_tolerances();

struct SuiteConfig {
  Suite suite = Suite::All;
  /// Empty means the suite's default list.
  std::vector<Family> systems;
  /// 0 means the suite's default dimensions.
  int d = 0;
  int N = 0;
  std::vector<double> p_list;
  int trials = 0;
  std::uint64_t seed = 1;
  std::map<std::string, double> tol;
  std::string output_dir = ".";
  int workers = 1;

  double tolerance(const std::string& key) const;
};

/// Throws ConfigError. d <= 3, N <= 16 when d = 3, known tolerance keys.
void validate(const SuiteConfig& cfg);

/// One representative theorem-range parameter choice per family.
std::vector<Family> default_systems();

struct CheckRecord {
  std::string id;
  std::string anchor;  // the statement being checked
  std::string digest;  // FNV-1a of the inputs
  double value = 0.0;
  double target = 0.0;
  double margin = 0.0;  // >= 0 exactly when the check passes
  bool pass = false;
  std::string note;

  friend bool operator==(const CheckRecord&, const CheckRecord&);
};

/// value <= target passes; margin = target - value.
CheckRecord upper_check(std::string id, std::string anchor, std::string inputs, double value, double target);
/// value >= target passes; margin = value - target.
CheckRecord lower_check(std::string id, std::string anchor, std::string inputs, double value, double target);
/// Records an exception from the module under test as a failed check.
CheckRecord error_check(std::string id, std::string anchor, std::string inputs, const std::string& what);

struct EmbeddingPlotRow {
  std::string system;
  int d = 0;
  double p = 0.0;
  double max_ratio = 0.0;
  friend bool operator==(const EmbeddingPlotRow&, const EmbeddingPlotRow&) = default;
};

struct NormPlotRow {
  std::string system;
  int d = 0;
  double p = 0.0;
  double lower_bound = 0.0;
  double paper_bound = 0.0;
  friend bool operator==(const NormPlotRow&, const NormPlotRow&);
};

struct SuiteReport {
  std::vector<CheckRecord> records;
  std::vector<EmbeddingPlotRow> embedding_plot;
  std::vector<NormPlotRow> norm_plot;
  double wall_time = 0.0;

  std::size_t passed() const;
  std::size_t failed() const;
  bool pass() const { return failed() == 0; }
  void append(SuiteReport other);
};

std::uint64_t fnv1a(const std::string& s);
std::string digest_hex(const std::string& inputs);
/// Seed of cell `index` derived from the run seed.
std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t index);

// Suites. Each check catches its own exceptions, so one failure never stops
// its siblings.
SuiteReport run_ortho(const SuiteConfig& cfg);
SuiteReport run_ladder(const SuiteConfig& cfg);
SuiteReport run_contraction(const SuiteConfig& cfg);
SuiteReport run_assumptions(const SuiteConfig& cfg);
SuiteReport run_form1(const SuiteConfig& cfg);
SuiteReport run_embedding(const SuiteConfig& cfg);
SuiteReport run_bellman(const SuiteConfig& cfg);
SuiteReport run_diffineq(const SuiteConfig& cfg);
SuiteReport run_normbound(const SuiteConfig& cfg);
SuiteReport run_constants(const SuiteConfig& cfg);

/// Validates, runs the requested suite (all of them for Suite::All) and
/// times the run.
SuiteReport run(const SuiteConfig& cfg);

/// 0 when every check passed, 1 otherwise.
int exit_code(const SuiteReport& report);

std::string to_json(const SuiteReport& report);
SuiteReport report_from_json(const std::string& text);
/// One row per check; no timing, so identical runs give identical bytes.
std::string to_csv(const SuiteReport& report);
std::string embedding_plot_csv(const SuiteReport& report);
std::string norm_plot_csv(const SuiteReport& report);

/// Writes report.json, report.csv, plotdata_embedding.csv and
/// plotdata_normbound.csv into dir, creating it if needed. I/O failures
/// throw std::runtime_error naming the path.
void emit(const SuiteReport& report, const std::string& dir);

}  // namespace riesz
