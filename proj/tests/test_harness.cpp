#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "riesz/harness.hpp"

using namespace riesz;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("riesz_harness_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

SuiteReport sample_report() {
  SuiteReport r;
  r.records.push_back(upper_check("a/one", "x <= 1", "in-a", 0.25, 1.0));
  r.records.push_back(lower_check("b/two, with comma", "y >= 0", "in-b", 1e-300, 0.0));
  r.records.push_back(error_check("c/three", "z \"quoted\"", "in-c", "went wrong"));
  r.records.back().note += "\nsecond line";
  r.embedding_plot.push_back({"hermite-poly", 2, 1.5, 0.0625});
  r.norm_plot.push_back({"jacobi-poly(a=0.5,b=1)", 3, 6.0, 1.0 / 3.0, 120.0});
  r.wall_time = 1.25;
  return r;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("check records") {
  const CheckRecord u = upper_check("id", "anchor", "inputs", 0.5, 2.0);
  CHECK(u.pass);
  CHECK(u.margin == 1.5);
  CHECK(u.digest == digest_hex("inputs"));
  CHECK(u.digest.size() == 16);
  CHECK_FALSE(upper_check("id", "a", "i", 2.5, 2.0).pass);
  CHECK(upper_check("id", "a", "i", 2.0, 2.0).pass);
  CHECK_FALSE(upper_check("id", "a", "i", std::nan(""), 2.0).pass);

  const CheckRecord l = lower_check("id", "anchor", "inputs", 3.0, 1.0);
  CHECK(l.pass);
  CHECK(l.margin == 2.0);
  CHECK_FALSE(lower_check("id", "a", "i", 0.5, 1.0).pass);
  CHECK_FALSE(lower_check("id", "a", "i", std::nan(""), 1.0).pass);

  const CheckRecord e = error_check("id", "anchor", "inputs", "boom");
  CHECK_FALSE(e.pass);
  CHECK(std::isnan(e.value));
  CHECK(e.note.find("boom") != std::string::npos);
}

TEST_CASE("FNV-1a digests") {
  // published test vectors for 64-bit FNV-1a
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(digest_hex("") == "cbf29ce484222325");
}

TEST_CASE("cell seeds are distinct and reproducible") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(cell_seed(1, i));
  CHECK(seen.size() == 1000);
  CHECK(cell_seed(7, 3) == cell_seed(7, 3));
  CHECK(cell_seed(7, 3) != cell_seed(8, 3));
}

TEST_CASE("report summary") {
  SuiteReport r = sample_report();
  CHECK(r.passed() == 2);
  CHECK(r.failed() == 1);
  CHECK_FALSE(r.pass());
  CHECK(exit_code(r) == 1);
  r.records.pop_back();
  CHECK(r.pass());
  CHECK(exit_code(r) == 0);

  SuiteReport empty;
  CHECK(empty.pass());
  CHECK(exit_code(empty) == 0);

  SuiteReport a = sample_report(), b = sample_report();
  a.append(b);
  CHECK(a.records.size() == 6);
  CHECK(a.embedding_plot.size() == 2);
  CHECK(a.norm_plot.size() == 2);
}

TEST_CASE("JSON round trip is lossless") {
  const SuiteReport r = sample_report();
  const SuiteReport back = report_from_json(to_json(r));
  CHECK(back.records == r.records);
  CHECK(back.embedding_plot == r.embedding_plot);
  CHECK(back.norm_plot == r.norm_plot);
  CHECK(back.wall_time == r.wall_time);
  CHECK(back.records[1].value == 1e-300);
  CHECK(std::isnan(back.records[2].value));
  CHECK(to_json(back) == to_json(r));

  const SuiteReport e = report_from_json(to_json(SuiteReport{}));
  CHECK(e.records.empty());
  CHECK(e.pass());
}

TEST_CASE("CSV output") {
  const SuiteReport r = sample_report();
  const std::string csv = to_csv(r);
  CHECK(csv.rfind("id,anchor,digest,value,target,margin,pass,note\n", 0) == 0);
  CHECK(csv.find("\"b/two, with comma\"") != std::string::npos);
  CHECK(csv.find("\"z \"\"quoted\"\"\"") != std::string::npos);
  CHECK(csv.find("0.25") != std::string::npos);
  // wall time is not part of the flat table
  SuiteReport slower = r;
  slower.wall_time = 99.0;
  CHECK(to_csv(slower) == csv);

  const std::string np = norm_plot_csv(r);
  CHECK(np.rfind("system,d,p,lower_bound,paper_bound,margin\n", 0) == 0);
  CHECK(np.find("\"jacobi-poly(a=0.5,b=1)\",3,6,0.33333333333333331,120,119.66666666666667") != std::string::npos);
  CHECK(embedding_plot_csv(r) == "system,d,p,max_ratio\nhermite-poly,2,1.5,0.0625\n");

  const SuiteReport empty;
  CHECK(to_csv(empty) == "id,anchor,digest,value,target,margin,pass,note\n");
}

TEST_CASE("emit writes every file") {
  const auto dir = scratch("emit") / "nested";
  emit(sample_report(), dir.string());
  for (const char* f : {"report.json", "report.csv", "plotdata_embedding.csv", "plotdata_normbound.csv"})
    CHECK(std::filesystem::exists(dir / f));
  const SuiteReport back = report_from_json(slurp(dir / "report.json"));
  CHECK(back.records == sample_report().records);
  CHECK(slurp(dir / "report.csv") == to_csv(sample_report()));

  const auto edir = scratch("emit_empty");
  emit(SuiteReport{}, edir.string());
  CHECK(report_from_json(slurp(edir / "report.json")).records.empty());
  std::filesystem::remove_all(dir.parent_path());
  std::filesystem::remove_all(edir);
}

TEST_CASE("emit reports the failing path") {
  const auto dir = scratch("blocked");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  const std::string target = (dir / "file" / "sub").string();
  try {
    emit(SuiteReport{}, target);
    FAIL("emit did not throw");
  } catch (const std::runtime_error& ex) {
    CHECK(std::string(ex.what()).find(target) != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("suite names") {
  for (Suite s : all_suites()) CHECK(parse_suite(suite_name(s)) == s);
  CHECK(parse_suite("all") == Suite::All);
  CHECK(all_suites().size() == 9);
  CHECK_THROWS_AS(parse_suite("everything"), ConfigError);
}

TEST_CASE("configuration validation") {
  SuiteConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.d = 4;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.d = 3;
  cfg.N = 17;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.N = 16;
  CHECK_NOTHROW(validate(cfg));
  cfg.d = 2;
  cfg.N = 40;
  CHECK_NOTHROW(validate(cfg));

  SuiteConfig p;
  p.p_list = {2.0, 1.0};
  CHECK_THROWS_AS(validate(p), ConfigError);
  SuiteConfig t;
  t.tol["no.such.key"] = 1.0;
  CHECK_THROWS_AS(validate(t), ConfigError);
  t.tol = {{"form1.relerr", 1e-6}};
  CHECK_NOTHROW(validate(t));
  CHECK(t.tolerance("form1.relerr") == 1e-6);
  CHECK(t.tolerance("form1.t_rule") == 1e-10);
  SuiteConfig w;
  w.workers = 0;
  CHECK_THROWS_AS(validate(w), ConfigError);
  SuiteConfig bad_sys;
  bad_sys.systems = {Family{FamilyTag::LaguerrePoly, -2.0, 0.0}};
  CHECK_THROWS_AS(validate(bad_sys), ConfigError);
  SuiteConfig r;
  r.d = 5;
  CHECK_THROWS_AS(run(r), ConfigError);
}

TEST_CASE("default tolerance table") {
  const auto& t = default_tolerances();
  CHECK(t.at("ortho.orthonormality") == 1e-10);
  CHECK(t.at("ortho.ladder_norm") == 1e-8);
  CHECK(t.at("ortho.eigen_fd") == 1e-6);
  CHECK(t.at("form1.relerr") == 1e-8);
  CHECK(t.at("form1.t_rule") == 1e-10);
  CHECK(t.at("contraction.l2") == 1e-10);
  CHECK(t.at("bellman.hessian") == 1e-8);
  CHECK(t.at("bellman.radial") == 1e-6);
  CHECK(t.at("diffineq.identity") == 1e-4);
  CHECK(t.at("diffineq.margin") == 1e-6);
  CHECK(t.at("embedding.ratio") == 1.0);
  CHECK(t.at("constants.sup") == 6.0);
}

TEST_CASE("constants suite") {
  SuiteConfig cfg;
  cfg.suite = Suite::Constants;
  const SuiteReport r = run(cfg);
  CHECK(r.pass());
  bool found = false;
  for (const auto& rec : r.records)
    if (rec.id == "constants.sup_H") {
      found = true;
      CHECK(rec.value < 6.0);
      CHECK(rec.target == 6.0);
      CHECK(rec.pass);
    }
  CHECK(found);
}

TEST_CASE("out-of-range assumptions are flagged") {
  SuiteConfig cfg;
  cfg.suite = Suite::Assumptions;
  cfg.systems = {Family{FamilyTag::JacobiPoly, -0.9, 0.0}};
  cfg.trials = 2000;
  const SuiteReport r = run(cfg);
  CHECK(exit_code(r) == 1);
  REQUIRE(r.records.size() == 2);
  CHECK_FALSE(r.records[0].pass);
  CHECK(r.records[0].id.find("A1") != std::string::npos);
  CHECK(r.records[0].note.find("outside") != std::string::npos);
}

TEST_CASE("form1 suite on one system") {
  SuiteConfig cfg;
  cfg.suite = Suite::Form1;
  cfg.systems = {Family{FamilyTag::HermitePoly, 0, 0}};
  cfg.d = 2;
  cfg.N = 6;
  cfg.trials = 10;
  const SuiteReport r = run(cfg);
  CHECK(r.records.size() == 3);
  CHECK(exit_code(r) == 0);
}

TEST_CASE("identical runs give identical tables") {
  SuiteConfig cfg;
  cfg.suite = Suite::Ladder;  // includes the seeded contraction draws
  cfg.systems = {Family{FamilyTag::HermiteFunc, 0, 0}, Family{FamilyTag::JacobiPoly, 0.5, 1.0}};
  cfg.trials = 20;
  cfg.seed = 99;
  const SuiteReport a = run(cfg);
  cfg.workers = 3;
  const SuiteReport b = run(cfg);
  CHECK(to_csv(a) == to_csv(b));
  CHECK(a.pass());
  cfg.seed = 100;
  CHECK(to_csv(run(cfg)) != to_csv(a));
}

TEST_CASE("a throwing check does not stop its siblings") {
  SuiteConfig cfg;
  cfg.suite = Suite::Ortho;
  // alpha below -1 is rejected by the axis constructor inside each check
  cfg.systems = {Family{FamilyTag::HermitePoly, 0, 0}, Family{FamilyTag::LaguerrePoly, -3.0, 0}};
  const SuiteReport r = run_ortho(cfg);
  REQUIRE(r.records.size() == 6);
  for (int i = 0; i < 3; ++i) CHECK(r.records[i].pass);
  for (int i = 3; i < 6; ++i) {
    CHECK_FALSE(r.records[i].pass);
    CHECK(r.records[i].note.rfind("error:", 0) == 0);
  }
}

}  // TEST_SUITE
