#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "helpers.hpp"
#include "riesz/scenario.hpp"

using namespace riesz;
using namespace riesz::cli;
using test_util::error_code;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ScenarioConfig config_for(const std::string& id, int n) {
  ScenarioConfig c;
  c.scenario = id;
  c.n_values = {n};
  return c;
}

const Check* find(const std::vector<Check>& checks, const std::string& name) {
  for (const Check& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("registry lists every scenario once") {
  std::set<std::string> ids;
  for (const auto& s : registry()) ids.insert(s.id);
  CHECK(ids.size() == registry().size());
  for (const char* id : {"sl_unperturbed", "sl_special", "sl_custom_sigma", "sl_violated_nonhermitian",
                         "sl_violated_indefinite", "laplace2d_special", "oracle_sweep", "williams_sweep",
                         "goursat_crosscheck"}) {
    CHECK(ids.count(id) == 1);
  }
  CHECK(error_code([] { (void)run_scenario(config_for("nope", 10)); }) == ErrorCode::UnknownScenario);
}

TEST_CASE("checks and status") {
  CHECK(make_check("a", 1.0, "<=", 2.0, CheckRole::Conclusion).pass);
  CHECK_FALSE(make_check("a", 3.0, "<=", 2.0, CheckRole::Conclusion).pass);
  CHECK(make_check("a", 2.0, ">=", 2.0, CheckRole::Conclusion).pass);
  CHECK_FALSE(make_check("a", 2.0, ">", 2.0, CheckRole::Conclusion).pass);
  CHECK(make_check("a", 0.0, "==", 0.0, CheckRole::Conclusion).pass);
  CHECK_FALSE(make_check("a", NAN, "<=", 1.0, CheckRole::Conclusion).pass);
  CHECK(error_code([] { (void)make_check("a", 1.0, "<", 2.0, CheckRole::Conclusion); }) ==
        ErrorCode::InvalidArgument);

  const Check hyp_fail = make_check("h", 1.0, "<=", 0.0, CheckRole::Hypothesis);
  const Check con_fail = make_check("c", 1.0, "<=", 0.0, CheckRole::Conclusion);
  const Check info_fail = make_check("i", 1.0, "<=", 0.0, CheckRole::Exploratory);
  CHECK(status_from_checks({}) == RunStatus::Pass);
  CHECK(status_from_checks({info_fail}) == RunStatus::Pass);
  CHECK(status_from_checks({con_fail}) == RunStatus::ConclusionFailed);
  CHECK(status_from_checks({hyp_fail, con_fail}) == RunStatus::HypothesesViolated);
}

TEST_CASE("empirical orders") {
  const auto orders = empirical_orders({10, 20, 40}, {1.0, 0.25, 0.0625});
  REQUIRE(orders.size() == 2);
  CHECK(orders[0] == doctest::Approx(2.0));
  CHECK(orders[1] == doctest::Approx(2.0));
}

TEST_CASE("config files: defaults, sections and validation") {
  const auto dir = temp_dir("riesz_config_test");
  const auto path = (dir / "cfg.json").string();
  {
    std::ofstream out(path);
    out << R"({"defaults": {"n": [20, 40], "tolerances": {"realness": 1e-7}, "seed": 9},
               "sl_special": {"alpha": 2.0, "potential": "const:1", "formats": ["summary"]}})";
  }
  const ScenarioConfig c = load_config(path, "sl_special");
  CHECK(c.n_values == std::vector<int>{20, 40});
  CHECK(c.tol.realness == 1e-7);
  CHECK(c.tol.hermitian == Tolerances{}.hermitian);
  CHECK(c.seed == 9);
  CHECK(c.alpha == 2.0);
  CHECK(c.potential == "const:1");
  CHECK(c.formats == std::vector<std::string>{"summary"});
  const ScenarioConfig other = load_config(path, "sl_unperturbed");
  CHECK_FALSE(other.alpha.has_value());

  {
    std::ofstream out(path);
    out << R"({"defaults": {"n": [40, 20]}})";
  }
  CHECK(error_code([&] { (void)load_config(path, "sl_special"); }) == ErrorCode::InvalidArgument);
  {
    std::ofstream out(path);
    out << R"({"defaults": {"tolerances": {"psd": -1}}})";
  }
  CHECK(error_code([&] { (void)load_config(path, "sl_special"); }) == ErrorCode::InvalidArgument);
  {
    std::ofstream out(path);
    out << "{not json";
  }
  CHECK(error_code([&] { (void)load_config(path, "sl_special"); }) == ErrorCode::InvalidArgument);
  {
    std::ofstream out(path);
    out << R"({"defaults": {"n": "ten"}})";
  }
  CHECK(error_code([&] { (void)load_config(path, "sl_special"); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([&] { (void)load_config((dir / "missing.json").string(), "x"); }) == ErrorCode::IoFailure);
  ScenarioConfig bad_format = config_for("sl_special", 20);
  bad_format.formats = {"xml"};
  CHECK(error_code([&] { validate(bad_format); }) == ErrorCode::InvalidArgument);
  std::filesystem::remove_all(dir);
}

TEST_CASE("special scenario passes at a small size") {
  const RunReport r = run_scenario(config_for("sl_special", 60));
  CHECK(r.status == RunStatus::Pass);
  CHECK(r.as_expected());
  REQUIRE(r.conditions.has_value());
  CHECK(r.conditions->nonnegative_kl);
  REQUIRE(find(r.checks, "ostrowski_bracket_violation") != nullptr);
  CHECK(find(r.checks, "ostrowski_bracket_violation")->pass);
  CHECK(find(r.checks, "adjoint_direct_crosscheck")->pass);
}

TEST_CASE("violated scenarios report hypothesis failures, not conclusion failures") {
  for (const char* id : {"sl_violated_nonhermitian", "sl_violated_indefinite"}) {
    const RunReport r = run_scenario(config_for(id, 60));
    CAPTURE(id);
    CHECK(r.status == RunStatus::HypothesesViolated);
    CHECK(r.as_expected());
    CHECK_FALSE(r.metrics["reasons"].empty());
  }
  const RunReport nh = run_scenario(config_for("sl_violated_nonhermitian", 60));
  CHECK(find(nh.checks, "kl_hermitian_residual")->value > 0.1);
}

TEST_CASE("unperturbed scenario reproduces the reference operator") {
  const RunReport r = run_scenario(config_for("sl_unperturbed", 80));
  CHECK(r.status == RunStatus::Pass);
  CHECK(find(r.checks, "closed_form_spectrum_gap")->value <= 1e-9);
  CHECK(find(r.checks, "riesz_kappa_minus_one")->value <= 1e-8);
}

TEST_CASE("custom densities accept either verdict") {
  ScenarioConfig c = config_for("sl_custom_sigma", 40);
  c.alpha = 0.0;
  c.beta = 0.0;
  const RunReport zero = run_scenario(c);
  CHECK(zero.status == RunStatus::Pass);
  const RunReport dflt = run_scenario(config_for("sl_custom_sigma", 40));
  CHECK(dflt.as_expected());
  CHECK_FALSE(dflt.expected.has_value());
}

TEST_CASE("Goursat scenario: potential default and exact zero kernel") {
  const RunReport r = run_scenario(config_for("goursat_crosscheck", 100));
  CHECK(r.status == RunStatus::Pass);
  CHECK(r.config["potential"] == "const:1");
  CHECK(r.metrics["c1_reference"].get<double>() == doctest::Approx(std::cosh(1.0)));
  ScenarioConfig zero = config_for("goursat_crosscheck", 100);
  zero.potential = "zero";
  const RunReport z = run_scenario(zero);
  REQUIRE(find(z.checks, "zero_potential_kernel_max") != nullptr);
  CHECK(find(z.checks, "zero_potential_kernel_max")->value == 0.0);
}

TEST_CASE("sweeps add trend checks") {
  ScenarioConfig c = config_for("goursat_crosscheck", 0);
  c.n_values = {50, 100, 200};
  const SweepReport s = run_sweep(c);
  CHECK(s.runs.size() == 3);
  CHECK(s.status == RunStatus::Pass);
  CHECK(s.as_expected());
  CHECK(s.trend.header[1] == "c1_error");
  CHECK(s.checks.size() == 2);
  c.n_values = {50};
  CHECK(error_code([&] { (void)run_sweep(c); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("reports are byte-stable and carry no timing") {
  const ScenarioConfig c = config_for("sl_special", 40);
  const std::string a = report_json(run_scenario(c)).dump(2);
  const std::string b = report_json(run_scenario(c)).dump(2);
  CHECK(a == b);
  CHECK(a.find("seconds") == std::string::npos);
  const auto j = nlohmann::json::parse(a);
  CHECK(j["status"] == "Pass");
  CHECK(j["spectral"]["eigenvalues_LK"].size() == 40);
}

TEST_CASE("emitted files and summary format") {
  const auto dir = temp_dir("riesz_emit_test");
  const RunReport r = run_scenario(config_for("sl_violated_indefinite", 30));
  const auto files = emit_report(r, dir.string(), {"structured", "csv", "summary"});
  CHECK(std::filesystem::exists(dir / "sl_violated_indefinite_n30.json"));
  CHECK(std::filesystem::exists(dir / "sl_violated_indefinite_n30_eigenvalues.csv"));
  CHECK(std::filesystem::exists(dir / "sl_violated_indefinite_n30_summary.txt"));
  std::ifstream in(dir / "sl_violated_indefinite_n30_summary.txt");
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("PASS density_boundary_residual ", 0) == 0);
  std::string line, last;
  while (std::getline(in, line)) last = line;
  CHECK(last == "STATUS HypothesesViolated expected HypothesesViolated");
  std::filesystem::remove_all(dir);
}

TEST_CASE("oracle and inclusion scenarios at reduced counts") {
  ScenarioConfig o = config_for("oracle_sweep", 8);
  o.count = 50;
  const RunReport r = run_scenario(o);
  CHECK(find(r.checks, "valid_family_violations")->value == 0.0);
  CHECK(find(r.checks, "violated_family_nonreal_instances")->role == CheckRole::Exploratory);
  CHECK(r.status == RunStatus::Pass);
  ScenarioConfig w = config_for("williams_sweep", 6);
  w.count = 30;
  const RunReport wr = run_scenario(w);
  CHECK(wr.status == RunStatus::Pass);
  CHECK(find(wr.checks, "affine_range_residual")->value <= 1e-10);
}

TEST_CASE("2D scenario at a small grid") {
  ScenarioConfig c = config_for("laplace2d_special", 11);
  c.harmonic = "xy";
  const RunReport r = run_scenario(c);
  CHECK(r.status == RunStatus::Pass);
  CHECK(find(r.checks, "adjoint_identity_residual")->value <= 1e-10);
  CHECK(find(r.checks, "min_real_part")->value > 0.0);
  c.harmonic = "sinh";
  CHECK(error_code([&] { (void)run_scenario(c); }) == ErrorCode::UnsupportedKind);
}
