#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "cdmrg/config.hpp"
#include "cdmrg/harness.hpp"
#include "cdmrg/output.hpp"

using namespace cdmrg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double number_at(const Table& t, std::size_t row, std::string_view column) {
  return std::get<double>(t.rows.at(row).at(t.column_index(column)));
}

// Rows of `t` rendered as text, grouped by the value of `key` (which is dropped).
std::map<std::string, std::vector<std::string>> rows_by(const Table& t, std::string_view key) {
  const std::size_t k = t.column_index(key);
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& row : t.rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == k) continue;
      line += format_cell(row[c]) + ",";
    }
    out[format_cell(row[k])].push_back(line);
  }
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cdmrg_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_pec() {
  json doc = {{"kind", "pec_comparison"},
              {"seed", 3},
              {"chain", {{"sites", 4}, {"field", {{"min", 0.8}, {"max", 1.2}, {"points", 5}}}}},
              {"sweep", {{"max_bond", 2}, {"num_sweeps", 20}, {"energy_tol", 1e-10}}}};
  return parse_config(doc);
}

}  // namespace

TEST_CASE("UniformGrid hits both ends exactly") {
  const auto v = UniformGrid{-std::numbers::sqrt2, std::numbers::sqrt2, 401}.values();
  REQUIRE(v.size() == 401);
  CHECK(v.front() == -std::numbers::sqrt2);
  CHECK(v.back() == std::numbers::sqrt2);
  CHECK(v[200] == 0.0);
  CHECK(UniformGrid{0.0, 1.0, 1}.values() == std::vector<double>{0.0});
}

TEST_CASE("format_double and CSV quoting") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  Table t;
  t.columns = {"a", "b"};
  t.add_row({std::string("x,y"), 2.5});
  t.add_row({std::int64_t{3}, true});
  CHECK(to_csv(t) == "a,b\r\n\"x,y\",2.5\r\n3,true\r\n");
  CHECK_THROWS(t.add_row({1.0}));
}

TEST_CASE("sha256 of a known vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config: defaults and round trip") {
  const ExperimentConfig cfg = parse_config(json{{"kind", "crossing_scan"}});
  CHECK(cfg.kind == ExperimentKind::crossing_scan);
  REQUIRE(cfg.policies.size() == 1);
  CHECK(cfg.policies[0].policy.kind == PolicyKind::standard);
  CHECK(cfg.two_level.lambda.points == 401);
  CHECK(cfg.sweep.policy.max_kept == cfg.sweep.max_bond);

  json doc = {{"kind", "pec_comparison"},
              {"seed", 9},
              {"pec", {{"family", "two_level"}, {"objective", "fidelity"}}},
              {"coefficient_grids", {{"gamma1", {0.0, 0.5}}}},
              {"policies", {{{"kind", "uhlmann"}, {"gamma1", 0.25}, {"name", "u"}}}}};
  const ExperimentConfig a = parse_config(doc);
  const json dumped = config_to_json(a);
  const ExperimentConfig b = parse_config(dumped);
  CHECK(config_to_json(b) == dumped);
  CHECK(b.pec.family == PecFamily::two_level);
  CHECK(b.grids.gamma1 == std::vector<double>{0.0, 0.5});
  CHECK(b.policies.at(0).name == "u");
  CHECK(b.policies.at(0).policy.gamma1 == 0.25);
}

TEST_CASE("config: all problems are reported together") {
  json doc = {{"kind", "crossing_scan"},
              {"bogus", 1},
              {"two_level", {{"coupling", "strong"}}},
              {"coefficient_grids", {{"gamma1", {0.5, 1.0}}}},
              {"policies", {{{"name", "p"}}}}};
  try {
    parse_config(doc);
    FAIL("expected an exception");
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    CHECK(msg.find("config.bogus: unknown key") != std::string::npos);
    CHECK(msg.find("two_level.coupling: expected a number") != std::string::npos);
    CHECK(msg.find("policies[0].kind: required") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(json{{"seed", 1}}), InvalidInput);
  CHECK_THROWS_AS(parse_config(json{{"kind", "teleport"}}), InvalidInput);
  CHECK_THROWS_AS(parse_config(json::array()), InvalidInput);
}

TEST_CASE("config: coefficient grids must contain zero") {
  json doc = {{"kind", "pec_comparison"}, {"coefficient_grids", {{"lambda2", {0.1, 0.2}}}}};
  try {
    parse_config(doc);
    FAIL("expected an exception");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("lambda2") != std::string::npos);
  }
  json negative = {{"kind", "pec_comparison"}, {"coefficient_grids", {{"gamma1", {0.0, -1.0}}}}};
  CHECK_THROWS_AS(parse_config(negative), InvalidInput);
}

TEST_CASE("config: load_config reads files and reports bad JSON") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "good.json") << R"({"kind": "dmrg_benchmark", "benchmark": {"sites": [4]}})";
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK(load_config(dir / "good.json").benchmark.sites == std::vector<int>{4});
  CHECK_THROWS_AS(load_config(dir / "bad.json"), InvalidInput);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), InvalidInput);
  fs::remove_all(dir);
}

TEST_CASE("grid search: zero tuple first and strict improvement only") {
  std::vector<std::pair<double, double>> calls;
  const auto flat = grid_search_coefficients({0.0, 1.0}, {0.0, 2.0}, true, [&](double a, double b) {
    calls.emplace_back(a, b);
    return 1.0;
  });
  CHECK(calls.front() == std::pair{0.0, 0.0});
  CHECK(flat.best.c1 == 0.0);
  CHECK(flat.best.c2 == 0.0);
  CHECK(flat.table.size() == 4);
  const auto best = grid_search_coefficients({0.0, 1.0, 2.0}, {0.0}, false, [](double a, double) {
    return (a - 1.0) * (a - 1.0);
  });
  CHECK(best.best.c1 == 1.0);
  CHECK(best.table.size() == 3);
}

TEST_CASE("method policies") {
  CHECK(method_policy(Method::standard, 1.0, 1.0).kind == PolicyKind::standard);
  const TruncationPolicy u = method_policy(Method::uhlmann, 0.3, 0.7);
  CHECK(u.kind == PolicyKind::uhlmann);
  CHECK(u.gamma1 == 0.3);
  CHECK(u.gamma2 == 0.0);
  const TruncationPolicy h = method_policy(Method::higher_categorical, 0.3, 0.7);
  CHECK(h.kind == PolicyKind::coherence_eigenvalue_2);
  CHECK(h.lambda1 == 0.3);
  CHECK(h.lambda2 == 0.7);
}

TEST_CASE("crossing scan: default grid, crossings and TDSE") {
  const ExperimentConfig cfg = parse_config(json{{"kind", "crossing_scan"}});
  const Report r = run_crossing_scan(cfg);
  const Table& pts = r.table("points");
  REQUIRE(pts.rows.size() == 401);
  CHECK(number_at(pts, 100, "p_gaussian") == 1.0);
  CHECK(number_at(pts, 300, "p_gaussian") == 1.0);
  double pmax = 0.0;
  for (std::size_t k = 0; k < pts.rows.size(); ++k) pmax = std::max(pmax, number_at(pts, k, "p_gaussian"));
  CHECK(pmax == 1.0);
  const double p0 = number_at(pts, 200, "p_gaussian");
  CHECK(std::abs(p0 - std::exp(-50.0)) <= 1e-12 * std::exp(-50.0));
  CHECK(r.summary.at("tdse").at("max_norm_drift").get<double>() < 1e-10);
}

TEST_CASE("crossing scan: zero-coefficient policies give identical columns") {
  json doc = {{"kind", "crossing_scan"},
              {"two_level", {{"lambda", {{"min", -1.0}, {"max", 1.0}, {"points", 41}}}}},
              {"policies",
               {{{"name", "s"}, {"kind", "standard"}},
                {{"name", "u"}, {"kind", "uhlmann"}},
                {{"name", "c"}, {"kind", "categorified"}},
                {{"name", "e1"}, {"kind", "coherence_eigenvalue"}},
                {{"name", "e2"}, {"kind", "coherence_eigenvalue_2"}},
                {{"name", "strong"}, {"kind", "uhlmann"}, {"gamma1", 5.0}}}}};
  const Report r = run_crossing_scan(parse_config(doc));
  const auto groups = rows_by(r.table("policies"), "policy");
  REQUIRE(groups.size() == 6);
  for (const char* name : {"u", "c", "e1", "e2"}) CHECK(groups.at(name) == groups.at("s"));
  CHECK(groups.at("strong") != groups.at("s"));
}

TEST_CASE("crossing scan: same seed gives byte-identical output") {
  json doc = {{"kind", "crossing_scan"},
              {"seed", 4},
              {"two_level", {{"lambda", {{"min", -1.0}, {"max", 1.0}, {"points", 21}}}}}};
  const ExperimentConfig cfg = parse_config(doc);
  const auto a = report_files(run_experiment(cfg), config_to_json(cfg));
  const auto b = report_files(run_experiment(cfg), config_to_json(cfg));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].contents == b[i].contents);
  }
}

TEST_CASE("pec comparison: zero grids give four identical rows") {
  const Report r = run_pec_comparison(small_pec());
  const Table& m = r.table("methods");
  REQUIRE(m.rows.size() == 4);
  const double ref = number_at(m, 0, "window_error");
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(number_at(m, i, "window_error") == ref);
    CHECK(number_at(m, i, "improvement_percent") == 0.0);
  }
  const auto pts = rows_by(r.table("points"), "method");
  REQUIRE(pts.size() == 4);
  for (const auto& [name, rows] : pts) CHECK(rows == pts.begin()->second);
  CHECK_FALSE(r.numerical_failure);
}

TEST_CASE("pec comparison: enhanced methods never lose to the standard one") {
  ExperimentConfig cfg = small_pec();
  cfg.grids.gamma1 = {0.0, 0.1, 1.0};
  cfg.grids.gamma2 = {0.0, 0.1};
  cfg.grids.lambda1 = {0.0, 0.1};
  cfg.grids.lambda2 = {0.0, 0.1};
  const Report r = run_pec_comparison(cfg);
  const Table& m = r.table("methods");
  const double standard = number_at(m, 0, "window_error");
  for (std::size_t i = 1; i < m.rows.size(); ++i) CHECK(number_at(m, i, "window_error") <= standard);
}

TEST_CASE("pec comparison: two-level family and dense-limit check") {
  json doc = {{"kind", "pec_comparison"},
              {"pec", {{"family", "two_level"}}},
              {"two_level", {{"lambda", {{"min", -1.0}, {"max", 1.0}, {"points", 11}}}}}};
  const Report r = run_pec_comparison(parse_config(doc));
  CHECK(r.table("methods").rows.size() == 4);
  CHECK(number_at(r.table("methods"), 0, "window_error") < 1e-12);

  ExperimentConfig big = small_pec();
  big.chain.sites = 13;
  CHECK_THROWS_AS(run_pec_comparison(big), InvalidInput);
}

TEST_CASE("dmrg benchmark table") {
  json doc = {{"kind", "dmrg_benchmark"}, {"benchmark", {{"sites", {4, 6}}, {"fields", {0.5, 1.0}}}}};
  const Report r = run_dmrg_benchmark(parse_config(doc));
  const Table& t = r.table("cases");
  REQUIRE(t.rows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(number_at(t, i, "abs_error") < 1e-8);
}

TEST_CASE("gauge diagnostics: small random suite and refinement") {
  const GaugeSuiteResult s = gauge_algebra_suite(1, 5);
  CHECK(s.families == 5);
  CHECK(s.max_hermiticity_a <= 1e-10);
  CHECK(s.max_hermiticity_a1 <= 1e-10);
  CHECK(s.max_hermiticity_a2 <= 1e-10);
  CHECK(s.max_covariance_residual <= 1e-8);
  CHECK(s.min_covariant_action >= -1e-12);
  CHECK(s.max_constant_family_action == 0.0);
  CHECK(s.max_parallel_transport_action <= 1e-8);

  const RefinementStudy study = finite_difference_refinement(9, 2);
  REQUIRE(study.spacing.size() == 3);
  CHECK(study.spacing[0] / study.spacing[1] == doctest::Approx(2.0));
}

TEST_CASE("write_outputs: manifest, replacement and failure cleanup") {
  const fs::path dir = scratch("out");
  const std::vector<OutputFile> files{{"a.csv", "x\n1\n"}, {"summary.json", "{}\n"}};
  write_outputs(dir, files, {"cdmrg run", "2026-01-01T00:00:00Z", 1.5, 1});
  CHECK(slurp(dir / "a.csv") == "x\n1\n");
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  REQUIRE(manifest.at("files").size() == 3);
  CHECK(manifest["files"][0]["sha256"] == sha256_hex("x\n1\n"));
  CHECK(manifest["files"][0]["bytes"] == 4);
  CHECK(manifest["files"][2]["path"] == "manifest.json");
  CHECK(manifest["files"][2]["sha256"].is_null());
  CHECK(manifest["command"] == "cdmrg run");

  write_outputs(dir, {{"b.csv", "y\n"}}, {});
  CHECK_FALSE(fs::exists(dir / "a.csv"));
  CHECK(fs::exists(dir / "b.csv"));

  CHECK_THROWS(write_outputs(dir, {{"sub/missing/c.csv", "z"}}, {}));
  CHECK(fs::exists(dir / "b.csv"));
  for (const auto& e : fs::directory_iterator(dir.parent_path())) {
    CHECK(e.path().filename().string().find(".cdmrg_test_out.") == std::string::npos);
  }
  fs::remove_all(dir);
}
