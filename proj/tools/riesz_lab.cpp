#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "riesz/errors.hpp"
#include "riesz/scenario.hpp"

namespace {

using riesz::ErrorCode;
using riesz::LabError;
using riesz::cli::ScenarioConfig;

struct Overrides {
  std::string config_path;
  std::string scenario;
  std::vector<int> n;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::string> potential;
  std::optional<std::string> harmonic;
  std::vector<std::string> densities;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> count;
  std::optional<int> max_n;
  std::optional<bool> riesz;
  std::vector<std::string> formats;
};

void add_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--scenario,-s", o.scenario, "scenario id (see `list`)")->required();
  cmd->add_option("--n", o.n, "grid size(s); repeat or comma-separate")->delimiter(',');
  cmd->add_option("--alpha", o.alpha, "first perturbation strength");
  cmd->add_option("--beta", o.beta, "second perturbation strength");
  cmd->add_option("--potential", o.potential, "zero | const:<q0> | linear:<slope> | mathieu:<A> | csv:<path>");
  cmd->add_option("--harmonic", o.harmonic, "one | xy | x2-y2 | re_z<k>");
  cmd->add_option("--densities", o.densities, "density CSV files (x,sigma)")->delimiter(',');
  cmd->add_option("--out,-o", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--count", o.count, "instances for the oracle sweeps");
  cmd->add_option("--max-n", o.max_n, "largest oracle dimension");
  cmd->add_flag("--riesz,!--no-riesz", o.riesz, "compute the Riesz-basis metric");
  cmd->add_option("--format", o.formats, "structured,csv,summary")->delimiter(',');
}

ScenarioConfig resolve(const Overrides& o) {
  ScenarioConfig c;
  if (!o.config_path.empty()) {
    c = riesz::cli::load_config(o.config_path, o.scenario);
  }
  c.scenario = o.scenario;
  if (!o.n.empty()) c.n_values = o.n;
  if (o.alpha) c.alpha = o.alpha;
  if (o.beta) c.beta = o.beta;
  if (o.potential) c.potential = *o.potential;
  if (o.harmonic) c.harmonic = *o.harmonic;
  if (!o.densities.empty()) c.density_csv = o.densities;
  if (o.out) c.out_dir = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.count) c.count = o.count;
  if (o.max_n) c.max_n = o.max_n;
  if (o.riesz) c.riesz = o.riesz;
  if (!o.formats.empty()) c.formats = o.formats;
  riesz::cli::validate(c);
  return c;
}

bool usage_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownScenario:
    case ErrorCode::IoFailure:
    case ErrorCode::UnsupportedKind:
    case ErrorCode::BudgetExceeded:
      return true;
    default:
      return false;
  }
}

int run(const Overrides& o) {
  const ScenarioConfig c = resolve(o);
  const riesz::cli::RunReport r = riesz::cli::run_scenario(c);
  fmt::print("{} n={}\n{}", r.scenario, r.n, riesz::cli::summary_text(r.checks, r.status, r.expected));
  if (!c.out_dir.empty()) {
    for (const auto& path : riesz::cli::emit_report(r, c.out_dir, c.formats)) fmt::print("wrote {}\n", path);
  }
  return r.as_expected() ? 0 : 1;
}

int sweep(const Overrides& o) {
  const ScenarioConfig c = resolve(o);
  const riesz::cli::SweepReport s = riesz::cli::run_sweep(c);
  for (const auto& r : s.runs) {
    fmt::print("{} n={}\n{}", r.scenario, r.n, riesz::cli::summary_text(r.checks, r.status, r.expected));
  }
  fmt::print("{} trend\n{}", s.scenario, riesz::cli::summary_text(s.checks, s.status, std::nullopt));
  if (!c.out_dir.empty()) {
    for (const auto& path : riesz::cli::emit_sweep(s, c.out_dir, c.formats)) fmt::print("wrote {}\n", path);
  }
  return s.as_expected() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral experiments on restrictions of positive operators"};
  app.require_subcommand(1);
  Overrides run_opts;
  Overrides sweep_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "run one scenario at one grid size");
  add_options(run_cmd, run_opts);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run one scenario over several grid sizes");
  add_options(sweep_cmd, sweep_opts);
  CLI::App* list_cmd = app.add_subcommand("list", "list the scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& s : riesz::cli::registry()) fmt::print("{:<26} {}\n", s.id, s.description);
      return 0;
    }
    if (run_cmd->parsed()) return run(run_opts);
    return sweep(sweep_opts);
  } catch (const LabError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return usage_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
