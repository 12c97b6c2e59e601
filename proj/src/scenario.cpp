#include "riesz/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "riesz/io.hpp"
#include "riesz/laplace2d.hpp"
#include "riesz/numerical_range.hpp"
#include "riesz/oracle.hpp"
#include "riesz/parallel.hpp"
#include "riesz/sturm_liouville.hpp"

namespace riesz::cli {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Calibrated constants for O(h^2) checks.
constexpr double kAdjointCrosscheckConstant = 100.0;
constexpr double kDomainConditionConstant = 100.0;
constexpr double kRieszKappaLimit = 10.0;

double json_number(double v) { return v; }

nlohmann::json complex_list(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

Table eigenvalue_table(const Vector& eigs) {
  return {"eigenvalues", {"re", "im"}, {eigs.real(), eigs.imag()}};
}

const ScenarioInfo& info_for(const std::string& id) {
  for (const ScenarioInfo& s : registry()) {
    if (s.id == id) return s;
  }
  throw LabError(ErrorCode::UnknownScenario, "unknown scenario '" + id + "' (see `riesz_lab list`)");
}

int first_size(const ScenarioConfig& c) {
  return c.n_values.empty() ? info_for(c.scenario).default_n.front() : c.n_values.front();
}

void add(RunReport& r, std::string name, double value, std::string relation, double tol, CheckRole role) {
  r.checks.push_back(make_check(std::move(name), value, std::move(relation), tol, role));
}

// --- Sturm-Liouville pipelines -----------------------------------------------

struct Pipeline1D {
  sl::Grid1D grid;
  sl::Potential q;
  DenseOperator L;
  DenseOperator L_inverse;
  sl::FundamentalPair pair;
  pert::PerturbationSpec spec;
  DenseOperator K;
  DenseOperator KL;
  DenseOperator LK_inverse;
  DenseOperator LK_adjoint_inverse;
  pert::ConditionReport conditions;
  double factorization_residual = 0.0;
};

using SpecBuilder = std::function<pert::PerturbationSpec(const sl::FundamentalPair&, const DenseOperator&,
                                                         const sl::Grid1D&)>;

Pipeline1D build_pipeline_1d(const ScenarioConfig& config, int n, const SpecBuilder& make_spec) {
  sl::Grid1D grid(n);
  sl::Potential q = sl::Potential::parse(config.potential);
  DenseOperator l = sl::assemble_dirichlet_L(q, grid);
  DenseOperator l_inv = hermitian_inverse(l, config.tol.hermitian);
  sl::FundamentalPair pair = sl::solve_fundamental_ivp(q, grid);
  pert::PerturbationSpec spec = make_spec(pair, l_inv, grid);
  const double no_limit = std::numeric_limits<double>::infinity();
  DenseOperator k = pert::build_K(spec, grid, no_limit);
  DenseOperator kl = pert::build_KL(spec, l, no_limit);
  pert::ConditionReport cond = pert::verify_conditions(spec, l, q, grid, config.tol);
  const double fact = pert::factorization_residual(l_inv, k, kl);
  DenseOperator lk_inv = pert::assemble_LK_inverse(l_inv, k, kl, no_limit);
  DenseOperator lk_adj = pert::assemble_adjoint_inverse(l_inv, k);
  return {std::move(grid), std::move(q),      std::move(l),  std::move(l_inv), std::move(pair),
          std::move(spec), std::move(k),      std::move(kl), std::move(lk_inv), std::move(lk_adj),
          std::move(cond), fact};
}

void add_condition_checks(RunReport& r, const pert::ConditionReport& c, const Tolerances& tol) {
  add(r, "density_boundary_residual", c.density_boundary_residual, "<=", tol.endpoint, CheckRole::Hypothesis);
  add(r, "generator_kernel_residual", c.generator_kernel_residual, "<=", tol.kernel, CheckRole::Hypothesis);
  add(r, "kl_hermitian_residual", c.kl_hermitian_residual, "<=", tol.hermitian, CheckRole::Hypothesis);
  add(r, "dense_domain_margin", c.dense_domain_margin, ">", tol.invertibility, CheckRole::Hypothesis);
  add(r, "i_plus_kl_min_eig", c.i_plus_kl_min_eig, ">", tol.invertibility, CheckRole::Hypothesis);
  if (c.nonnegative_kl) {
    // KL >= 0 gives W(I + KL) in [1, inf).
    add(r, "i_plus_kl_min_eig_vs_one", c.i_plus_kl_min_eig, ">=", 1.0 - tol.psd, CheckRole::Conclusion);
  }
}

void add_spectral_checks(RunReport& r, const analysis::SpectralReport& s, const Tolerances& tol,
                         bool require_positive) {
  add(r, "max_imag_ratio", s.max_imag_ratio, "<=", tol.realness, CheckRole::Conclusion);
  if (require_positive) add(r, "min_real_part", s.min_real_part, ">", 0.0, CheckRole::Conclusion);
  add(r, "similarity_hermitian_residual", s.similarity_hermitian_residual, "<=", tol.similarity,
      CheckRole::Conclusion);
  add(r, "similarity_factorization_residual", s.similarity_factorization_residual, "<=", tol.similarity,
      CheckRole::Conclusion);
  add(r, "isospectrality_gap", s.isospectrality_gap, "<=", tol.isospectrality, CheckRole::Conclusion);
  if (s.adjoint_spectrum_gap) {
    add(r, "adjoint_spectrum_gap", *s.adjoint_spectrum_gap, "<=", tol.isospectrality, CheckRole::Conclusion);
  }
  if (s.riesz) {
    add(r, "riesz_kappa", s.riesz->kappa, "<=", kRieszKappaLimit, CheckRole::Conclusion);
    add(r, "biorthogonality_residual", s.riesz->biorthogonality_residual, "<=", 1e-6, CheckRole::Conclusion);
  }
}

void add_range_checks(RunReport& r, const DenseOperator& kl, const DenseOperator& l, const DenseOperator& l_inv,
                      const analysis::SpectralReport& s, const Tolerances& tol) {
  const analysis::RangeCertificates cert = analysis::numerical_range_certificates(kl, tol, &l_inv);
  r.metrics["range_certificates"] = {{"hermitian", cert.hermitian},
                                     {"kl_range_min", cert.kl_range_min},
                                     {"kl_range_max", cert.kl_range_max},
                                     {"zero_margin", cert.zero_margin},
                                     {"product_min_real", cert.product_min_real},
                                     {"pass", cert.pass},
                                     {"message", cert.message}};
  if (cert.offending_point) {
    r.metrics["range_certificates"]["offending_point"] = {cert.offending_point->real(), cert.offending_point->imag()};
  }
  if (!cert.hermitian || !r.conditions || !r.conditions->nonnegative_kl) return;
  add(r, "kl_range_min", cert.kl_range_min, ">=", -tol.psd * std::max(1.0, cert.kl_range_max),
      CheckRole::Conclusion);
  add(r, "zero_margin_i_plus_kl", cert.zero_margin, ">=", 1.0 - tol.psd, CheckRole::Conclusion);
  add(r, "product_min_real", cert.product_min_real, ">", 0.0, CheckRole::Conclusion);
  // Positivity transfer: every eigenvalue of L_K is at least min eig(L) / max eig(I + KL).
  const double l_min = hermitian_eigenvalues(l, tol.hermitian).minCoeff();
  const double bound = l_min / (1.0 + cert.kl_range_max);
  add(r, "positivity_transfer_ratio", s.min_real_part / bound, ">=", 1.0 - tol.realness, CheckRole::Conclusion);
}

// lambda_k(L) / lambda_max(I + KL) <= lambda_k(L_K) <= lambda_k(L), sorted ascending.
double ostrowski_violation(const Vector& lk_eigs, const RealVector& l_eigs, double ipk_max) {
  const Vector lk = analysis::sort_by_real(lk_eigs);
  RealVector l = l_eigs;
  std::sort(l.data(), l.data() + l.size());
  if (lk.size() != l.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < l.size(); ++k) {
    const double v = lk(k).real();
    worst = std::max({worst, (v - l(k)) / l(k), (l(k) / ipk_max - v) / l(k)});
  }
  return worst;
}

void finish_1d(RunReport& r, const ScenarioConfig& config, const Pipeline1D& p, bool compute_riesz) {
  r.conditions = p.conditions;
  add_condition_checks(r, p.conditions, config.tol);
  add(r, "factorization_residual", p.factorization_residual, "<=", config.tol.factorization, CheckRole::Conclusion);
  analysis::ReportOptions opts;
  opts.compute_riesz = compute_riesz;
  opts.kappa_limit = kRieszKappaLimit;
  r.spectral = analysis::analyze_restriction(p.L_inverse, p.KL, p.LK_inverse, &p.LK_adjoint_inverse, config.tol, opts);
  add_spectral_checks(r, *r.spectral, config.tol, false);
  add_range_checks(r, p.KL, p.L, p.L_inverse, *r.spectral, config.tol);
  r.metrics["wronskian_residual"] = p.pair.wronskian_residual;
  r.tables.push_back(eigenvalue_table(r.spectral->eigenvalues_LK));
}

RunReport run_sl_unperturbed(const ScenarioConfig& config, int n) {
  RunReport r;
  r.expected = RunStatus::Pass;
  const Pipeline1D p = build_pipeline_1d(config, n, [](const sl::FundamentalPair& pair, const DenseOperator&,
                                                       const sl::Grid1D& grid) {
    const Vector zero = Vector::Zero(grid.n() + 2);
    return pert::make_general({pert::to_complex(pair.c), pert::to_complex(pair.s)}, {zero, zero});
  });
  finish_1d(r, config, p, config.riesz.value_or(true));

  const Vector& eigs = r.spectral->eigenvalues_LK;
  const double lambda1 = eigs(0).real();
  const double exact = kPi * kPi;
  r.metrics["lambda1"] = lambda1;
  r.metrics["lambda1_abs_error"] = std::abs(lambda1 - exact);
  add(r, "lambda1_rel_error", std::abs(lambda1 - exact) / exact, "<=", 1e-3, CheckRole::Conclusion);

  if (p.q.is_zero()) {
    const RealVector closed = sl::dirichlet_eigenvalues_closed_form(n);
    const RealVector direct = hermitian_eigenvalues(p.L, config.tol.hermitian);
    add(r, "closed_form_spectrum_gap", (direct - closed).cwiseAbs().maxCoeff(), "<=", 1e-9, CheckRole::Conclusion);
  }
  if (r.spectral->riesz) {
    add(r, "riesz_kappa_minus_one", r.spectral->riesz->kappa - 1.0, "<=", 1e-8, CheckRole::Conclusion);
  }
  return r;
}

RunReport run_sl_special(const ScenarioConfig& config, int n) {
  RunReport r;
  r.expected = RunStatus::Pass;
  const double alpha = config.alpha.value_or(1.0);
  const double beta = config.beta.value_or(1.0);
  const Pipeline1D p =
      build_pipeline_1d(config, n, [&](const sl::FundamentalPair& pair, const DenseOperator& l_inv, const sl::Grid1D&) {
        return pert::make_special(pair, l_inv, alpha, beta);
      });
  finish_1d(r, config, p, config.riesz.value_or(true));

  if (p.conditions.nonnegative_kl) {
    const double ipk_max = 1.0 + r.metrics["range_certificates"]["kl_range_max"].get<double>();
    const double v = ostrowski_violation(r.spectral->eigenvalues_LK, hermitian_eigenvalues(p.L, config.tol.hermitian),
                                         ipk_max);
    add(r, "ostrowski_bracket_violation", v, "<=", 1e-8, CheckRole::Conclusion);
  }

  const pert::AdjointCoefficients ab = pert::closed_form_ab(p.pair, alpha, beta, p.grid);
  const double a0 = ab.a(0);
  const double b1 = ab.b(ab.b.size() - 1);
  r.metrics["a0"] = a0;
  r.metrics["b1"] = b1;
  r.metrics["ab_denominator"] = ab.denominator;
  r.tables.push_back({"ab", {"x", "a", "b"}, {p.grid.nodes(), ab.a, ab.b}});
  if (p.q.is_zero() && alpha == 1.0 && beta == 1.0) {
    add(r, "a0_vs_closed_form", std::abs(a0 + 16.0 / 29.0), "<=", 5e-3, CheckRole::Conclusion);
    add(r, "b1_vs_closed_form", std::abs(b1 - 28.0 / 29.0), "<=", 5e-3, CheckRole::Conclusion);
  }
  const DenseOperator direct = pert::assemble_adjoint_direct(p.q, ab.a, ab.b, p.grid);
  const double h = p.grid.h();
  add(r, "adjoint_direct_crosscheck", pert::adjoint_crosscheck_error(direct, p.LK_adjoint_inverse, p.grid), "<=",
      kAdjointCrosscheckConstant * h * h, CheckRole::Conclusion);
  return r;
}

Vector default_density(const sl::Grid1D& grid, int k) {
  Vector v(grid.n() + 2);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::sin(k * kPi * grid.nodes()(i));
  v(0) = 0.0;
  v(v.size() - 1) = 0.0;
  return v;
}

RunReport run_sl_custom_sigma(const ScenarioConfig& config, int n) {
  RunReport r;
  const double alpha = config.alpha.value_or(1.0);
  const double beta = config.beta.value_or(1.0);
  const Pipeline1D p = build_pipeline_1d(
      config, n, [&](const sl::FundamentalPair& pair, const DenseOperator& l_inv, const sl::Grid1D& grid) {
        if (config.density_csv.empty()) {
          return pert::make_general({pert::to_complex(pair.c), pert::to_complex(pair.s)},
                                    {alpha * default_density(grid, 1), beta * default_density(grid, 2)});
        }
        pert::PerturbationConfig pc;
        pc.mode = "general";
        pc.density_csv = config.density_csv;
        return pert::materialize(pc, pair, l_inv, grid);
      });
  finish_1d(r, config, p, config.riesz.value_or(true));
  return r;
}

RunReport run_sl_violated_nonhermitian(const ScenarioConfig& config, int n) {
  RunReport r;
  r.expected = RunStatus::HypothesesViolated;
  const Pipeline1D p = build_pipeline_1d(
      config, n, [](const sl::FundamentalPair& pair, const DenseOperator& l_inv, const sl::Grid1D& grid) {
        return pert::make_general(
            {pert::to_complex(pair.c), pert::to_complex(pair.s)},
            {pert::density_from_inverse(l_inv, pert::to_complex(pair.s)), Vector::Zero(grid.n() + 2)});
      });
  finish_1d(r, config, p, config.riesz.value_or(true));
  r.metrics["reasons"] = p.conditions.reasons;
  return r;
}

RunReport run_sl_violated_indefinite(const ScenarioConfig& config, int n) {
  RunReport r;
  r.expected = RunStatus::HypothesesViolated;
  const double alpha = config.alpha.value_or(-1.5);
  const double beta = config.beta.value_or(0.0);
  const Pipeline1D p = build_pipeline_1d(
      config, n, [&](const sl::FundamentalPair& pair, const DenseOperator& l_inv, const sl::Grid1D&) {
        const Vector c = pert::to_complex(pair.c);
        const Vector s = pert::to_complex(pair.s);
        return pert::make_general({c, s}, {alpha * pert::density_from_inverse(l_inv, c),
                                           beta * pert::density_from_inverse(l_inv, s)});
      });
  finish_1d(r, config, p, config.riesz.value_or(true));
  r.metrics["reasons"] = p.conditions.reasons;
  return r;
}

// --- Laplace 2D -----------------------------------------------------------------

RunReport run_laplace2d(const ScenarioConfig& config, int n) {
  RunReport r;
  r.expected = RunStatus::Pass;
  const double alpha = config.alpha.value_or(1.0);
  const lap2d::Grid2D grid(n);
  const lap2d::HarmonicFunction phi = lap2d::harmonic_basis(grid, config.harmonic);
  const DenseOperator l = lap2d::assemble_dirichlet_laplacian_2d(grid);
  const DenseOperator l_inv = hermitian_inverse(l, config.tol.hermitian);
  const lap2d::Rank1Perturbation pert2 = lap2d::build_rank1_K_2d(phi, alpha, l, l_inv);

  const double phi_scale = std::max(1.0, phi.samples.cwiseAbs().maxCoeff());
  r.conditions = pert::evaluate_conditions(pert2.KL, phi.harmonicity_residual / phi_scale, 0.0, config.tol);
  add_condition_checks(r, *r.conditions, config.tol);
  add(r, "kl_identity_residual", pert2.kl_identity_residual, "<=", 1e-10, CheckRole::Conclusion);

  const double fact = pert::factorization_residual(l_inv, pert2.K, pert2.KL);
  add(r, "factorization_residual", fact, "<=", config.tol.factorization, CheckRole::Conclusion);
  const DenseOperator lk_inv =
      pert::assemble_LK_inverse(l_inv, pert2.K, pert2.KL, std::numeric_limits<double>::infinity());
  const DenseOperator lk_adj = pert::assemble_adjoint_inverse(l_inv, pert2.K);

  analysis::ReportOptions opts;
  opts.require_positive = true;
  opts.compute_riesz = config.riesz.value_or(false);
  opts.kappa_limit = kRieszKappaLimit;
  r.spectral = analysis::analyze_restriction(l_inv, pert2.KL, lk_inv, &lk_adj, config.tol, opts);
  add_spectral_checks(r, *r.spectral, config.tol, true);

  // Rank-1 adjoint identity: (-Delta_h + correction)^-1 against (L^-1 + K)^*.
  const DenseOperator direct = lap2d::adjoint_action_2d(phi, alpha, grid);
  const DenseOperator direct_inv = inverse(direct);
  add(r, "adjoint_identity_residual", operator_norm(direct_inv - lk_adj) / operator_norm(lk_adj), "<=", 1e-10,
      CheckRole::Conclusion);

  double domain = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Vector f = lap2d::random_smooth_field(grid, config.seed + k);
    domain = std::max(domain, lap2d::domain_condition_residual(grid, phi, alpha, lk_inv, f));
  }
  const double h = grid.h();
  add(r, "domain_condition_residual", domain, "<=", kDomainConditionConstant * h * h, CheckRole::Conclusion);

  const RealVector closed = lap2d::dirichlet_eigenvalues_2d(grid);
  const RealVector direct_eigs = hermitian_eigenvalues(l, config.tol.hermitian);
  add(r, "laplacian_closed_form_gap",
      ((direct_eigs - closed).array().abs() / closed.array().max(1.0)).maxCoeff(), "<=", 1e-9,
      CheckRole::Conclusion);
  // 0.5% at nx = 31, scaled as h^2 elsewhere.
  const double two_pi2 = 2.0 * kPi * kPi;
  const double lambda_tol = 5e-3 * std::pow(32.0 * h, 2);
  add(r, "unperturbed_lambda11_rel_error", std::abs(direct_eigs(0) - two_pi2) / two_pi2, "<=", lambda_tol,
      CheckRole::Conclusion);
  if (alpha == 0.0) {
    add(r, "lambda11_rel_error", std::abs(r.spectral->eigenvalues_LK(0).real() - two_pi2) / two_pi2, "<=",
        lambda_tol, CheckRole::Conclusion);
  }

  if (phi.kind == lap2d::HarmonicKind::One) {
    // Modes with an even index are orthogonal to phi = 1 and keep their eigenvalue.
    const Vector& eigs = r.spectral->eigenvalues_LK;
    double worst = 0.0;
    for (int k = 1; k <= grid.ny(); ++k) {
      for (int m = 1; m <= grid.nx(); ++m) {
        if (m % 2 == 1 && k % 2 == 1) continue;
        const double sm = std::sin(m * kPi * h / 2.0);
        const double sk = std::sin(k * kPi * h / 2.0);
        const double lam = 4.0 / (h * h) * (sm * sm + sk * sk);
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < eigs.size(); ++i) best = std::min(best, std::abs(eigs(i) - lam));
        worst = std::max(worst, best / lam);
      }
    }
    add(r, "preserved_mode_gap", worst, "<=", 1e-9, CheckRole::Conclusion);
  }

  r.metrics["phi_norm_sq"] = pert2.phi_norm_sq;
  r.metrics["harmonicity_residual"] = phi.harmonicity_residual;
  r.metrics["harmonic"] = phi.name();
  r.tables.push_back(eigenvalue_table(r.spectral->eigenvalues_LK));
  RealVector xs(grid.size());
  RealVector ys(grid.size());
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      xs(grid.index(i, j)) = grid.x(i);
      ys(grid.index(i, j)) = grid.y(j);
    }
  }
  r.tables.push_back({"harmonic", {"x", "y", "phi"}, {xs, ys, phi.samples}});
  return r;
}

// --- Oracle sweeps ----------------------------------------------------------

Table sweep_table(const std::vector<oracle::SweepRow>& rows, const std::string& name) {
  const auto m = static_cast<Eigen::Index>(rows.size());
  RealVector seed(m), n(m), min_eig(m), imag(m), kappa(m), verdict(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    seed(i) = static_cast<double>(row.seed);
    n(i) = row.n;
    min_eig(i) = row.min_eig_i_plus_m;
    imag(i) = row.max_imag_ratio;
    kappa(i) = row.kappa;
    verdict(i) = static_cast<double>(row.verdict);
  }
  return {name, {"seed", "n", "min_eig_i_plus_m", "max_imag_ratio", "kappa", "verdict"},
          {seed, n, min_eig, imag, kappa, verdict}};
}

RunReport run_oracle_sweep(const ScenarioConfig& config) {
  RunReport r;
  r.expected = RunStatus::Pass;
  const int count = config.count.value_or(1000);
  const int max_n = config.max_n.value_or(8);
  const int threads = worker_count(count);
  constexpr double kTol = 1e-9;
  r.n = max_n;

  const auto valid = oracle::run_sweep(oracle::Family::Valid, count, max_n, config.seed, kTol, threads);
  int violations = 0;
  int hypothesis_misses = 0;
  for (const auto& row : valid) {
    violations += row.verdict == oracle::Verdict::ViolationFound;
    hypothesis_misses += row.verdict == oracle::Verdict::HypothesisViolated;
  }
  add(r, "valid_family_violations", violations, "==", 0.0, CheckRole::Conclusion);
  add(r, "valid_family_rejected_instances", hypothesis_misses, "==", 0.0, CheckRole::Conclusion);

  constexpr int kViolatedSeeds = 100;
  const auto bad = oracle::run_sweep(oracle::Family::Violated, kViolatedSeeds, max_n, config.seed, kTol, threads);
  int flagged = 0;
  int nonreal = 0;
  for (const auto& row : bad) {
    flagged += row.verdict == oracle::Verdict::HypothesisViolated;
    nonreal += row.nonreal;
  }
  add(r, "violated_family_flagged", flagged, "==", kViolatedSeeds, CheckRole::Conclusion);
  add(r, "violated_family_nonreal_instances", nonreal, ">=", 1.0, CheckRole::Exploratory);
  const auto skew =
      oracle::run_sweep(oracle::Family::NonHermitianViolated, kViolatedSeeds, max_n, config.seed, kTol, threads);
  int skew_nonreal = 0;
  for (const auto& row : skew) skew_nonreal += row.nonreal;
  add(r, "nonhermitian_family_nonreal_instances", skew_nonreal, ">=", 1.0, CheckRole::Exploratory);

  r.tables.push_back(sweep_table(valid, "valid"));
  r.tables.push_back(sweep_table(bad, "violated"));
  r.metrics["count"] = count;
  r.metrics["max_n"] = max_n;
  return r;
}

RunReport run_williams_sweep(const ScenarioConfig& config) {
  RunReport r;
  r.expected = RunStatus::Pass;
  const int count = config.count.value_or(200);
  const int max_n = config.max_n.value_or(6);
  const int threads = worker_count(count);
  r.n = max_n;
  const auto reps = oracle::williams_sweep(count, max_n, config.seed, 1e-9, threads);
  int violations = 0;
  int inconclusive = 0;
  RealVector seed(count), n(count), shift(count), margin(count), angles(count), verdict(count);
  for (int i = 0; i < count; ++i) {
    const auto& rep = reps[static_cast<std::size_t>(i)];
    violations += rep.verdict == oracle::InclusionVerdict::Violation;
    inconclusive += rep.verdict == oracle::InclusionVerdict::Inconclusive;
    seed(i) = static_cast<double>(rep.seed);
    n(i) = rep.n;
    shift(i) = rep.shift;
    margin(i) = rep.margin_A;
    angles(i) = rep.angles_used;
    verdict(i) = static_cast<double>(rep.verdict);
  }
  add(r, "certified_violations", violations, "==", 0.0, CheckRole::Conclusion);
  add(r, "inconclusive_instances", inconclusive, "==", 0.0, CheckRole::Exploratory);

  // W(aT + b) = a W(T) + b on random matrices and random a, b.
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double affine = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int dim = 2 + k % 7;
    const DenseOperator t = oracle::random_complex_operator(dim, config.seed * 7919 + static_cast<std::uint64_t>(k));
    const Complex a(normal(rng), normal(rng));
    const Complex b(normal(rng), normal(rng));
    affine = std::max(affine, oracle::affine_range_residual(t, a, b));
  }
  add(r, "affine_range_residual", affine, "<=", 1e-10, CheckRole::Conclusion);
  r.tables.push_back({"williams", {"seed", "n", "shift", "margin_A", "angles", "verdict"},
                      {seed, n, shift, margin, angles, verdict}});
  return r;
}

// --- Goursat cross-check ----------------------------------------------------

struct Reference {
  double c1;
  double s1;
};

Reference reference_values(const sl::Potential& q) {
  if (const auto q0 = q.constant_value()) {
    if (*q0 > 0.0) {
      const double k = std::sqrt(*q0);
      return {std::cosh(k), std::sinh(k) / k};
    }
    if (*q0 < 0.0) {
      const double k = std::sqrt(-*q0);
      return {std::cos(k), std::sin(k) / k};
    }
    return {1.0, 1.0};
  }
  const sl::FundamentalPair fine = sl::solve_fundamental_ivp(q, sl::Grid1D(4000), 8);
  return {fine.c_end.value1, fine.s_end.value1};
}

RunReport run_goursat(const ScenarioConfig& config, int m) {
  RunReport r;
  r.expected = RunStatus::Pass;
  const sl::Potential q = sl::Potential::parse(config.potential);
  const sl::TransmutationKernel kernel = sl::solve_goursat_kernel(q, m);
  const sl::Grid1D grid(m - 1);
  const sl::FundamentalPair pair = sl::fundamental_from_kernel(kernel, grid);
  const Reference ref = reference_values(q);
  const double c1 = pair.c_end.value1;
  const double s1 = pair.s_end.value1;
  r.metrics["c1"] = c1;
  r.metrics["s1"] = s1;
  r.metrics["c1_reference"] = ref.c1;
  r.metrics["s1_reference"] = ref.s1;
  r.metrics["c1_error"] = std::abs(c1 - ref.c1);
  r.metrics["picard_iterations"] = kernel.picard_iterations();
  r.metrics["wronskian_residual"] = pair.wronskian_residual;
  // 1e-4 at mesh 200, scaled as h^2 elsewhere.
  const double mesh_tol = 1e-4 * std::pow(200.0 / m, 2);
  add(r, "c1_error", std::abs(c1 - ref.c1), "<=", mesh_tol, CheckRole::Conclusion);
  add(r, "s1_error", std::abs(s1 - ref.s1), "<=", mesh_tol, CheckRole::Conclusion);

  // Diagonal identity K(x, x) = H(x, 0) = 1/2 int_0^x q, against a fine quadrature.
  constexpr int kFine = 64;
  double diag = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double x = static_cast<double>(i) / m;
    double integral = 0.0;
    const int panels = kFine * std::max(i, 1);
    for (int k = 0; k < panels; ++k) {
      const double a = x * k / panels;
      const double b = x * (k + 1) / panels;
      integral += (b - a) / 6.0 * (q(a) + 4.0 * q(0.5 * (a + b)) + q(b));
    }
    diag = std::max(diag, std::abs(kernel.K(x, x) - 0.5 * integral));
  }
  const double h = 1.0 / m;
  add(r, "diagonal_identity_residual", diag, "<=", h * h, CheckRole::Conclusion);
  if (q.is_zero()) add(r, "zero_potential_kernel_max", kernel.table().cwiseAbs().maxCoeff(), "==", 0.0,
                       CheckRole::Conclusion);
  r.tables.push_back({"fundamental", {"x", "c", "s"}, {grid.nodes(), pair.c, pair.s}});
  return r;
}

std::string relation_failure_text(const Check& c) { return c.pass ? "PASS" : "FAIL"; }

void write_table(const std::string& path, const Table& t) { io::write_csv(path, t.header, t.columns); }

bool wants(const std::vector<std::string>& formats, const std::string& f) {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

}  // namespace

// --- Config -------------------------------------------------------------------

void validate(const ScenarioConfig& c) {
  const Tolerances& t = c.tol;
  for (double v : {t.realness, t.hermitian, t.psd, t.invertibility, t.similarity, t.isospectrality, t.endpoint,
                   t.kernel, t.factorization}) {
    if (!(v > 0.0)) throw LabError(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
  for (std::size_t i = 1; i < c.n_values.size(); ++i) {
    if (c.n_values[i] <= c.n_values[i - 1]) {
      throw LabError(ErrorCode::InvalidArgument, "grid sizes must be strictly increasing");
    }
  }
  for (int n : c.n_values) {
    if (n < 2) throw LabError(ErrorCode::InvalidArgument, "grid sizes must be at least 2");
  }
  for (const auto& f : c.formats) {
    if (f != "structured" && f != "csv" && f != "summary") {
      throw LabError(ErrorCode::InvalidArgument, "unknown format '" + f + "'");
    }
  }
}

void apply_json(const nlohmann::json& s, ScenarioConfig& c) {
  try {
    if (s.contains("n")) {
      c.n_values = s["n"].is_array() ? s["n"].get<std::vector<int>>() : std::vector<int>{s["n"].get<int>()};
    }
    if (s.contains("potential")) c.potential = s["potential"].get<std::string>();
    if (s.contains("harmonic")) c.harmonic = s["harmonic"].get<std::string>();
    if (s.contains("alpha")) c.alpha = s["alpha"].get<double>();
    if (s.contains("beta")) c.beta = s["beta"].get<double>();
    if (s.contains("densities")) c.density_csv = s["densities"].get<std::vector<std::string>>();
    if (s.contains("out")) c.out_dir = s["out"].get<std::string>();
    if (s.contains("seed")) c.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("count")) c.count = s["count"].get<int>();
    if (s.contains("max_n")) c.max_n = s["max_n"].get<int>();
    if (s.contains("riesz")) c.riesz = s["riesz"].get<bool>();
    if (s.contains("formats")) c.formats = s["formats"].get<std::vector<std::string>>();
    if (s.contains("tolerances")) {
      const auto& t = s["tolerances"];
      Tolerances& tol = c.tol;
      tol.realness = t.value("realness", tol.realness);
      tol.hermitian = t.value("hermitian", tol.hermitian);
      tol.psd = t.value("psd", tol.psd);
      tol.invertibility = t.value("invertibility", tol.invertibility);
      tol.similarity = t.value("similarity", tol.similarity);
      tol.isospectrality = t.value("isospectrality", tol.isospectrality);
      tol.endpoint = t.value("endpoint", tol.endpoint);
      tol.kernel = t.value("kernel", tol.kernel);
      tol.factorization = t.value("factorization", tol.factorization);
    }
  } catch (const nlohmann::json::exception& e) {
    throw LabError(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
}

ScenarioConfig load_config(const std::string& path, const std::string& scenario) {
  std::ifstream in(path);
  if (!in) throw LabError(ErrorCode::IoFailure, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LabError(ErrorCode::InvalidArgument, "config '" + path + "': " + e.what());
  }
  ScenarioConfig c;
  c.scenario = scenario;
  if (j.contains("defaults")) apply_json(j["defaults"], c);
  if (!scenario.empty() && j.contains(scenario)) apply_json(j[scenario], c);
  validate(c);
  return c;
}

nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json j{{"scenario", c.scenario},
                   {"n", c.n_values},
                   {"potential", c.potential},
                   {"harmonic", c.harmonic},
                   {"seed", c.seed},
                   {"densities", c.density_csv},
                   {"formats", c.formats},
                   {"tolerances",
                    {{"realness", c.tol.realness},
                     {"hermitian", c.tol.hermitian},
                     {"psd", c.tol.psd},
                     {"invertibility", c.tol.invertibility},
                     {"similarity", c.tol.similarity},
                     {"isospectrality", c.tol.isospectrality},
                     {"endpoint", c.tol.endpoint},
                     {"kernel", c.tol.kernel},
                     {"factorization", c.tol.factorization}}}};
  if (c.alpha) j["alpha"] = *c.alpha;
  if (c.beta) j["beta"] = *c.beta;
  if (c.count) j["count"] = *c.count;
  if (c.max_n) j["max_n"] = *c.max_n;
  if (c.riesz) j["riesz"] = *c.riesz;
  return j;
}

// --- Checks and status ----------------------------------------------------------

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Pass: return "Pass";
    case RunStatus::HypothesesViolated: return "HypothesesViolated";
    case RunStatus::ConclusionFailed: return "ConclusionFailed";
  }
  return "Unknown";
}

Check make_check(std::string name, double value, std::string relation, double tolerance, CheckRole role) {
  bool pass = false;
  if (relation == "<=") {
    pass = value <= tolerance;
  } else if (relation == ">=") {
    pass = value >= tolerance;
  } else if (relation == ">") {
    pass = value > tolerance;
  } else if (relation == "==") {
    pass = value == tolerance;
  } else {
    throw LabError(ErrorCode::InvalidArgument, "unknown relation '" + relation + "'");
  }
  return {std::move(name), value, tolerance, std::move(relation), role, pass};
}

RunStatus status_from_checks(const std::vector<Check>& checks) {
  bool hypotheses = true;
  bool conclusions = true;
  for (const Check& c : checks) {
    if (c.role == CheckRole::Hypothesis) hypotheses = hypotheses && c.pass;
    if (c.role == CheckRole::Conclusion) conclusions = conclusions && c.pass;
  }
  if (!hypotheses) return RunStatus::HypothesesViolated;
  return conclusions ? RunStatus::Pass : RunStatus::ConclusionFailed;
}

bool RunReport::as_expected() const {
  if (expected) return status == *expected;
  return status != RunStatus::ConclusionFailed;
}

bool SweepReport::as_expected() const {
  for (const RunReport& r : runs) {
    if (!r.as_expected()) return false;
  }
  for (const Check& c : checks) {
    if (c.role == CheckRole::Conclusion && !c.pass) return false;
  }
  return true;
}

const std::vector<ScenarioInfo>& registry() {
  static const std::vector<ScenarioInfo> kRegistry{
      {"sl_unperturbed", "Dirichlet Sturm-Liouville operator, K = 0", {200}},
      {"sl_special", "rank-2 perturbation sigma = (alpha L^-1 c, beta L^-1 s)", {200}},
      {"sl_custom_sigma", "general densities from CSV (default: sin pi x, sin 2 pi x)", {200}},
      {"sl_violated_nonhermitian", "sigma_1 = L^-1 s, sigma_2 = 0: KL not Hermitian", {200}},
      {"sl_violated_indefinite", "sigma_1 = alpha L^-1 c with alpha = -1.5: I + KL indefinite", {200}},
      {"laplace2d_special", "unit square, rank-1 K = phi <., alpha L^-1 phi>, phi harmonic", {31}},
      {"oracle_sweep", "random L > 0, M >= 0 instances and the violated family", {8}},
      {"williams_sweep", "sigma(A^-1 B) in W(B)/W(A) on random pairs; W(aT+b) = aW(T)+b", {6}},
      {"goursat_crosscheck", "transmutation kernel reconstruction of c(1), s(1)", {200}},
  };
  return kRegistry;
}

RunReport run_scenario(const ScenarioConfig& requested) {
  validate(requested);
  const ScenarioInfo& info = info_for(requested.scenario);
  ScenarioConfig config = requested;
  if (config.potential.empty()) config.potential = info.id == "goursat_crosscheck" ? "const:1" : "zero";
  const int n = first_size(config);
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  const std::string& id = info.id;
  if (id == "sl_unperturbed") {
    r = run_sl_unperturbed(config, n);
  } else if (id == "sl_special") {
    r = run_sl_special(config, n);
  } else if (id == "sl_custom_sigma") {
    r = run_sl_custom_sigma(config, n);
  } else if (id == "sl_violated_nonhermitian") {
    r = run_sl_violated_nonhermitian(config, n);
  } else if (id == "sl_violated_indefinite") {
    r = run_sl_violated_indefinite(config, n);
  } else if (id == "laplace2d_special") {
    r = run_laplace2d(config, n);
  } else if (id == "oracle_sweep") {
    ScenarioConfig c = config;
    if (!c.max_n && !c.n_values.empty()) c.max_n = n;
    r = run_oracle_sweep(c);
  } else if (id == "williams_sweep") {
    ScenarioConfig c = config;
    if (!c.max_n && !c.n_values.empty()) c.max_n = n;
    r = run_williams_sweep(c);
  } else {
    r = run_goursat(config, n);
  }
  r.scenario = id;
  if (r.n == 0) r.n = n;
  r.config = to_json(config);
  r.status = status_from_checks(r.checks);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<double> empirical_orders(const std::vector<int>& n, const std::vector<double>& errors) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < n.size() && i + 1 < errors.size(); ++i) {
    out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(static_cast<double>(n[i + 1]) / n[i]));
  }
  return out;
}

SweepReport run_sweep(const ScenarioConfig& config) {
  validate(config);
  const ScenarioInfo& info = info_for(config.scenario);
  std::vector<int> sizes = config.n_values;
  if (sizes.empty()) {
    if (info.id == "sl_unperturbed") sizes = {50, 100, 200};
    if (info.id == "sl_special") sizes = {100, 200, 400};
    if (info.id == "goursat_crosscheck") sizes = {50, 100, 200};
  }
  if (sizes.size() < 2) throw LabError(ErrorCode::InvalidArgument, "a sweep needs at least two grid sizes");

  SweepReport sweep;
  sweep.scenario = info.id;
  sweep.runs.resize(sizes.size());
  const int count = static_cast<int>(sizes.size());
  parallel_for(count, worker_count(count), [&](int i) {
    ScenarioConfig c = config;
    c.n_values = {sizes[static_cast<std::size_t>(i)]};
    sweep.runs[static_cast<std::size_t>(i)] = run_scenario(c);
  });

  std::string metric = "max_imag_ratio";
  if (info.id == "sl_unperturbed") metric = "lambda1_abs_error";
  if (info.id == "sl_special") metric = "riesz_kappa";
  if (info.id == "goursat_crosscheck") metric = "c1_error";
  std::vector<double> values;
  RealVector n_col(count), metric_col(count), order_col(count), kappa_col(count), imag_col(count);
  for (int i = 0; i < count; ++i) {
    const RunReport& r = sweep.runs[static_cast<std::size_t>(i)];
    double v = kNaN;
    if (r.metrics.contains(metric)) {
      v = r.metrics[metric].get<double>();
    } else if (metric == "riesz_kappa" && r.spectral && r.spectral->riesz) {
      v = r.spectral->riesz->kappa;
    } else if (r.spectral) {
      v = r.spectral->max_imag_ratio;
    }
    values.push_back(v);
    n_col(i) = r.n;
    metric_col(i) = v;
    kappa_col(i) = r.spectral && r.spectral->riesz ? r.spectral->riesz->kappa : kNaN;
    imag_col(i) = r.spectral ? r.spectral->max_imag_ratio : kNaN;
  }
  const std::vector<double> orders = empirical_orders(sizes, values);
  order_col(0) = kNaN;
  for (int i = 1; i < count; ++i) order_col(i) = orders[static_cast<std::size_t>(i - 1)];
  sweep.trend = {"trend", {"n", metric, "order", "riesz_kappa", "max_imag_ratio"},
                 {n_col, metric_col, order_col, kappa_col, imag_col}};

  if (info.id == "sl_unperturbed") {
    for (std::size_t i = 0; i < orders.size(); ++i) {
      sweep.checks.push_back(make_check(fmt::format("lambda1_order_{}_{}", sizes[i], sizes[i + 1]),
                                        std::abs(orders[i] - 2.0), "<=", 0.3, CheckRole::Conclusion));
    }
  } else if (info.id == "sl_special") {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    sweep.checks.push_back(make_check("riesz_kappa_max", *hi, "<=", kRieszKappaLimit, CheckRole::Conclusion));
    sweep.checks.push_back(make_check("riesz_kappa_variation", *hi / *lo - 1.0, "<=", 0.2, CheckRole::Conclusion));
  } else if (info.id == "goursat_crosscheck") {
    for (std::size_t i = 0; i < orders.size(); ++i) {
      sweep.checks.push_back(make_check(fmt::format("c1_order_{}_{}", sizes[i], sizes[i + 1]), orders[i], ">=",
                                        1.8, CheckRole::Conclusion));
    }
  }

  bool violated = false;
  bool failed = false;
  for (const RunReport& r : sweep.runs) {
    failed = failed || r.status == RunStatus::ConclusionFailed;
    violated = violated || r.status == RunStatus::HypothesesViolated;
  }
  for (const Check& c : sweep.checks) failed = failed || (c.role == CheckRole::Conclusion && !c.pass);
  sweep.status = failed ? RunStatus::ConclusionFailed : violated ? RunStatus::HypothesesViolated : RunStatus::Pass;
  return sweep;
}

// --- Reports -------------------------------------------------------------------

std::string summary_text(const std::vector<Check>& checks, RunStatus status, std::optional<RunStatus> expected) {
  std::string out;
  for (const Check& c : checks) {
    const std::string tag = c.role == CheckRole::Exploratory ? "INFO" : relation_failure_text(c);
    out += fmt::format("{} {} {} {}\n", tag, c.name, io::format_double(c.value), io::format_double(c.tolerance));
  }
  out += fmt::format("STATUS {} expected {}\n", to_string(status),
                     expected ? std::string(to_string(*expected)) : std::string("Pass|HypothesesViolated"));
  return out;
}

nlohmann::json report_json(const RunReport& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario;
  j["n"] = r.n;
  j["config"] = r.config;
  j["status"] = to_string(r.status);
  j["expected"] = r.expected ? nlohmann::json(to_string(*r.expected)) : nlohmann::json(nullptr);
  j["as_expected"] = r.as_expected();
  if (r.conditions) {
    const auto& c = *r.conditions;
    j["conditions"] = {{"kl_hermitian_residual", json_number(c.kl_hermitian_residual)},
                       {"i_plus_kl_min_eig", c.i_plus_kl_min_eig},
                       {"kl_min_eig", c.kl_min_eig},
                       {"dense_domain_margin", c.dense_domain_margin},
                       {"generator_kernel_residual", c.generator_kernel_residual},
                       {"density_boundary_residual", c.density_boundary_residual},
                       {"positive_factor", c.positive_factor},
                       {"nonnegative_kl", c.nonnegative_kl},
                       {"verdict", pert::to_string(c.verdict)},
                       {"reasons", c.reasons}};
  }
  if (r.spectral) {
    const auto& s = *r.spectral;
    nlohmann::json sj{{"eigenvalues_LK", complex_list(s.eigenvalues_LK)},
                      {"discarded", s.discarded},
                      {"eig_residual", s.eig_residual},
                      {"max_imag_ratio", s.max_imag_ratio},
                      {"min_real_part", s.min_real_part},
                      {"similarity_hermitian_residual", s.similarity_hermitian_residual},
                      {"similarity_factorization_residual", s.similarity_factorization_residual},
                      {"isospectrality_gap", s.isospectrality_gap},
                      {"real_spectrum", s.real_spectrum},
                      {"riesz_basis", s.riesz_basis},
                      {"similar_to_hermitian", s.similar_to_hermitian},
                      {"adjoint_consistent", s.adjoint_consistent}};
    if (s.adjoint_spectrum_gap) sj["adjoint_spectrum_gap"] = *s.adjoint_spectrum_gap;
    if (s.riesz) {
      sj["riesz"] = {{"kappa", s.riesz->kappa},
                     {"kappa_adjoint", s.riesz->kappa_adjoint},
                     {"biorthogonality_residual", s.riesz->biorthogonality_residual},
                     {"min_pairing", s.riesz->min_pairing},
                     {"near_defective", s.riesz->near_defective},
                     {"note", s.riesz->note}};
    }
    j["spectral"] = sj;
  }
  j["metrics"] = r.metrics;
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"tolerance", c.tolerance},
                      {"relation", c.relation},
                      {"role", c.role == CheckRole::Hypothesis   ? "hypothesis"
                               : c.role == CheckRole::Conclusion ? "conclusion"
                                                                 : "exploratory"},
                      {"pass", c.pass}});
  }
  j["checks"] = checks;
  return j;
}

std::vector<std::string> emit_report(const RunReport& report, const std::string& out_dir,
                                     const std::vector<std::string>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw LabError(ErrorCode::IoFailure, "cannot create '" + out_dir + "': " + ec.message());
  const std::string stem = (std::filesystem::path(out_dir) / fmt::format("{}_n{}", report.scenario, report.n)).string();
  std::vector<std::string> written;
  if (wants(formats, "structured")) {
    io::write_text(stem + ".json", report_json(report).dump(2) + "\n");
    written.push_back(stem + ".json");
  }
  if (wants(formats, "csv")) {
    for (const Table& t : report.tables) {
      const std::string path = stem + "_" + t.name + ".csv";
      write_table(path, t);
      written.push_back(path);
    }
  }
  if (wants(formats, "summary")) {
    io::write_text(stem + "_summary.txt", summary_text(report.checks, report.status, report.expected));
    written.push_back(stem + "_summary.txt");
  }
  return written;
}

std::vector<std::string> emit_sweep(const SweepReport& sweep, const std::string& out_dir,
                                    const std::vector<std::string>& formats) {
  std::vector<std::string> written;
  for (const RunReport& r : sweep.runs) {
    const auto files = emit_report(r, out_dir, formats);
    written.insert(written.end(), files.begin(), files.end());
  }
  const std::string stem = (std::filesystem::path(out_dir) / sweep.scenario).string();
  if (wants(formats, "csv")) {
    write_table(stem + "_trend.csv", sweep.trend);
    written.push_back(stem + "_trend.csv");
  }
  if (wants(formats, "summary")) {
    io::write_text(stem + "_sweep_summary.txt", summary_text(sweep.checks, sweep.status, std::nullopt));
    written.push_back(stem + "_sweep_summary.txt");
  }
  return written;
}

}  // namespace riesz::cli
