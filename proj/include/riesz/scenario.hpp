#pragma once

// Scenario registry and runner behind the riesz_lab command line: config
// parsing, end-to-end pipelines, reports and plot-ready tables.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "riesz/analysis.hpp"
#include "riesz/perturbation.hpp"
#include "riesz/tolerances.hpp"

namespace riesz::cli {

struct ScenarioConfig {
  std::string scenario;
  std::vector<int> n_values;  // empty: the scenario default
  std::string potential;  // empty: the scenario default
  std::string harmonic = "one";
  std::optional<double> alpha;  // unset: the scenario default
  std::optional<double> beta;
  std::vector<std::string> density_csv;
  Tolerances tol;
  std::string out_dir;  // empty: no files
  std::uint64_t seed = 1;
  std::optional<int> count;
  std::optional<int> max_n;
  std::optional<bool> riesz;
  std::vector<std::string> formats{"structured", "csv", "summary"};
};

/// Throws InvalidArgument when tolerances are not positive or the n list is
/// not strictly increasing.
void validate(const ScenarioConfig& config);

/// Reads the "defaults" section, then the section named after the scenario.
/// Keys: n (int or list), potential, harmonic, alpha, beta, densities, out,
/// seed, count, max_n, riesz, formats, tolerances {realness, hermitian, ...}.
ScenarioConfig load_config(const std::string& path, const std::string& scenario);
void apply_json(const nlohmann::json& section, ScenarioConfig& config);
nlohmann::json to_json(const ScenarioConfig& config);

enum class RunStatus { Pass, HypothesesViolated, ConclusionFailed };

std::string_view to_string(RunStatus s);

/// Hypothesis checks decide whether the similarity argument applies, conclusion checks
/// whether it held. Exploratory checks are reported but carry no verdict.
enum class CheckRole { Hypothesis, Conclusion, Exploratory };

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;  // "<=", ">=", ">", "=="
  CheckRole role = CheckRole::Conclusion;
  bool pass = false;
};

Check make_check(std::string name, double value, std::string relation, double tolerance, CheckRole role);

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<RealVector> columns;
};

struct RunReport {
  std::string scenario;
  int n = 0;
  nlohmann::json config;
  std::optional<pert::ConditionReport> conditions;
  std::optional<analysis::SpectralReport> spectral;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<Check> checks;
  std::vector<Table> tables;
  double seconds = 0.0;  // wall time; never written to files
  RunStatus status = RunStatus::Pass;
  /// Status the scenario is designed to produce; unset accepts Pass or
  /// HypothesesViolated.
  std::optional<RunStatus> expected;

  bool as_expected() const;
};

/// Recomputes the status from the checks.
RunStatus status_from_checks(const std::vector<Check>& checks);

struct ScenarioInfo {
  std::string id;
  std::string description;
  std::vector<int> default_n;
};

const std::vector<ScenarioInfo>& registry();

/// Runs at the first configured size (or the scenario default). Throws
/// UnknownScenario.
RunReport run_scenario(const ScenarioConfig& config);

struct SweepReport {
  std::string scenario;
  std::vector<RunReport> runs;
  Table trend;
  std::vector<Check> checks;
  RunStatus status = RunStatus::Pass;
  bool as_expected() const;
};

/// Runs every configured size (at least two), concurrently up to
/// RIESZ_LAB_THREADS, and adds the refinement trend with empirical orders.
SweepReport run_sweep(const ScenarioConfig& config);

/// Writes <id>_n<N>.json, CSV tables and <id>_n<N>_summary.txt into out_dir
/// according to formats. Returns the written paths. Throws IoFailure.
std::vector<std::string> emit_report(const RunReport& report, const std::string& out_dir,
                                     const std::vector<std::string>& formats);
std::vector<std::string> emit_sweep(const SweepReport& sweep, const std::string& out_dir,
                                    const std::vector<std::string>& formats);

/// One line per check: "PASS name value tolerance" (INFO for exploratory
/// checks), then "STATUS <status> expected <status>".
std::string summary_text(const std::vector<Check>& checks, RunStatus status, std::optional<RunStatus> expected);

nlohmann::json report_json(const RunReport& report);

/// log(e_i / e_{i+1}) / log(n_{i+1} / n_i) for consecutive entries.
std::vector<double> empirical_orders(const std::vector<int>& n, const std::vector<double>& errors);

}  // namespace riesz::cli
