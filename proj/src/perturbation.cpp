#include "riesz/perturbation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "riesz/io.hpp"

namespace riesz::pert {

namespace {

Vector pad_interior(const Vector& inner) {
  Vector full = Vector::Zero(inner.size() + 2);
  full.segment(1, inner.size()) = inner;
  return full;
}

Vector interpolate_onto(const RealVector& xs, const RealVector& ys, const RealVector& nodes) {
  Vector out(nodes.size());
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    const double t = nodes(i);
    if (t <= xs(0)) {
      out(i) = ys(0);
    } else if (t >= xs(xs.size() - 1)) {
      out(i) = ys(ys.size() - 1);
    } else {
      const auto it = std::upper_bound(xs.data(), xs.data() + xs.size(), t);
      const Eigen::Index k = static_cast<Eigen::Index>(it - xs.data());
      const double a = (t - xs(k - 1)) / (xs(k) - xs(k - 1));
      out(i) = (1.0 - a) * ys(k - 1) + a * ys(k);
    }
  }
  return out;
}

void check_endpoints(const PerturbationSpec& spec, double tol) {
  const double r = spec.density_boundary_residual();
  if (r > tol) {
    throw LabError(ErrorCode::EndpointViolation,
                   fmt::format("density endpoint magnitude {:.3e} exceeds {:.1e}; R(K*) is not in D(L)", r, tol));
  }
}

void check_shapes(const PerturbationSpec& spec, Eigen::Index full_size) {
  if (spec.generators.size() != spec.densities.size()) {
    throw LabError(ErrorCode::InvalidArgument, "perturbation needs one density per generator");
  }
  for (std::size_t i = 0; i < spec.rank(); ++i) {
    if (spec.generators[i].size() != full_size || spec.densities[i].size() != full_size) {
      throw LabError(ErrorCode::InvalidArgument, "generator/density samples must cover all grid nodes");
    }
  }
}

}  // namespace

double PerturbationSpec::density_boundary_residual() const {
  double r = 0.0;
  for (const Vector& d : densities) {
    if (d.size() == 0) continue;
    r = std::max({r, std::abs(d(0)), std::abs(d(d.size() - 1))});
  }
  return r;
}

Vector interior(const Vector& full) { return full.segment(1, full.size() - 2); }

Vector to_complex(const RealVector& v) { return v.cast<Complex>(); }

Vector density_from_inverse(const DenseOperator& l_inverse, const Vector& v) {
  if (v.size() != l_inverse.dim() + 2) {
    throw LabError(ErrorCode::InvalidArgument, "density_from_inverse needs samples on all nodes");
  }
  return pad_interior(l_inverse.apply(interior(v)));
}

PerturbationSpec make_special(const sl::FundamentalPair& pair, const DenseOperator& l_inverse, double alpha,
                              double beta) {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw LabError(ErrorCode::InvalidArgument, "special mode requires alpha, beta >= 0");
  }
  const Vector c = to_complex(pair.c);
  const Vector s = to_complex(pair.s);
  PerturbationSpec spec;
  spec.generators = {c, s};
  spec.densities = {alpha * density_from_inverse(l_inverse, c), beta * density_from_inverse(l_inverse, s)};
  spec.mode = SpecialMode{alpha, beta};
  return spec;
}

PerturbationSpec make_general(std::vector<Vector> generators, std::vector<Vector> densities) {
  PerturbationSpec spec;
  spec.generators = std::move(generators);
  spec.densities = std::move(densities);
  spec.mode = GeneralMode{};
  if (spec.generators.size() != spec.densities.size()) {
    throw LabError(ErrorCode::InvalidArgument, "perturbation needs one density per generator");
  }
  return spec;
}

void to_json(nlohmann::json& j, const PerturbationConfig& c) {
  j = nlohmann::json{{"mode", c.mode}};
  if (c.mode == "special") {
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
  } else {
    j["densities"] = c.density_csv;
  }
}

void from_json(const nlohmann::json& j, PerturbationConfig& c) {
  c.mode = j.value("mode", std::string("special"));
  if (c.mode == "special") {
    c.alpha = j.value("alpha", 1.0);
    c.beta = j.value("beta", 1.0);
  } else if (c.mode == "general") {
    c.density_csv = j.at("densities").get<std::vector<std::string>>();
  } else {
    throw LabError(ErrorCode::InvalidArgument, "perturbation mode must be 'special' or 'general'");
  }
}

PerturbationSpec materialize(const PerturbationConfig& config, const sl::FundamentalPair& pair,
                             const DenseOperator& l_inverse, const sl::Grid1D& grid) {
  if (config.mode == "special") return make_special(pair, l_inverse, config.alpha, config.beta);
  if (config.density_csv.size() > 2) {
    throw LabError(ErrorCode::InvalidArgument, "Ker L^ is two-dimensional: at most two densities");
  }
  std::vector<Vector> gens{to_complex(pair.c), to_complex(pair.s)};
  std::vector<Vector> dens;
  for (const std::string& path : config.density_csv) {
    const io::CsvTable t = io::read_csv(path);
    if (t.columns.size() < 2) throw LabError(ErrorCode::IoFailure, "'" + path + "' needs columns x, sigma");
    dens.push_back(interpolate_onto(t.columns[0], t.columns[1], grid.nodes()));
  }
  while (dens.size() < 2) dens.push_back(Vector::Zero(grid.n() + 2));
  return make_general(std::move(gens), std::move(dens));
}

DenseOperator build_K(const PerturbationSpec& spec, const sl::Grid1D& grid, double endpoint_tol) {
  check_shapes(spec, grid.n() + 2);
  check_endpoints(spec, endpoint_tol);
  const RealVector w = grid.operator_weights();
  Matrix k = Matrix::Zero(grid.n(), grid.n());
  for (std::size_t i = 0; i < spec.rank(); ++i) {
    // <f, sigma> = sum_j w_j f_j conj(sigma_j); sigma vanishes at the ends, so
    // the interior sum is the full quadrature.
    const Vector wsigma = w.asDiagonal() * interior(spec.densities[i]);
    k += interior(spec.generators[i]) * wsigma.adjoint();
  }
  return {std::move(k), w, "K"};
}

DenseOperator build_KL(const PerturbationSpec& spec, const DenseOperator& l, double endpoint_tol) {
  check_shapes(spec, l.dim() + 2);
  check_endpoints(spec, endpoint_tol);
  const DenseOperator l_adj = l.adjoint();
  const RealVector& w = l.weight();
  Matrix kl = Matrix::Zero(l.dim(), l.dim());
  for (std::size_t i = 0; i < spec.rank(); ++i) {
    const Vector l_sigma = l_adj.apply(interior(spec.densities[i]));
    const Vector wl = w.asDiagonal() * l_sigma;
    kl += interior(spec.generators[i]) * wl.adjoint();
  }
  return {std::move(kl), w, "KL"};
}

std::string_view to_string(HypothesisVerdict v) {
  switch (v) {
    case HypothesisVerdict::NonnegativeKL: return "NonnegativeKL";
    case HypothesisVerdict::PositiveFactor: return "PositiveFactor";
    case HypothesisVerdict::Violated: return "Violated";
  }
  return "Unknown";
}

namespace {

RealVector hermitian_part_eigenvalues(const DenseOperator& a) {
  const DenseOperator herm = a.with_entries(0.5 * (a.entries() + a.adjoint().entries()), "Re(" + a.label() + ")");
  return hermitian_eigenvalues(herm, 1e-8);
}

double smallest_singular_value(const DenseOperator& a) {
  const Matrix b = to_unitary_frame(a);
  if (a.is_real()) return Eigen::BDCSVD<RealMatrix>(b.real()).singularValues().minCoeff();
  return Eigen::BDCSVD<Matrix>(b).singularValues().minCoeff();
}

}  // namespace

ConditionReport evaluate_conditions(const DenseOperator& kl, double generator_kernel_residual,
                                    double density_boundary_residual, const Tolerances& tol) {
  ConditionReport r;
  r.generator_kernel_residual = generator_kernel_residual;
  r.density_boundary_residual = density_boundary_residual;
  r.kl_hermitian_residual = hermitian_residual(kl);

  const DenseOperator id = DenseOperator::identity(kl.weight());
  const DenseOperator i_plus_kl = id + kl;
  const RealVector kl_eigs = hermitian_part_eigenvalues(kl);
  const RealVector ipk_eigs = hermitian_part_eigenvalues(i_plus_kl);
  r.kl_min_eig = kl_eigs.minCoeff();
  r.i_plus_kl_min_eig = ipk_eigs.minCoeff();
  r.dense_domain_margin = smallest_singular_value(id + kl.adjoint());

  const double kl_scale = std::max(1.0, kl_eigs.cwiseAbs().maxCoeff());
  const double ipk_scale = std::max(1.0, ipk_eigs.cwiseAbs().maxCoeff());

  const bool range_ok = density_boundary_residual <= tol.endpoint;
  const bool kernel_ok = generator_kernel_residual <= tol.kernel;
  const bool hermitian_ok = r.kl_hermitian_residual <= tol.hermitian;
  const bool dense_ok = r.dense_domain_margin > tol.invertibility * ipk_scale;
  const bool kl_psd = r.kl_min_eig >= -tol.psd * kl_scale;
  const bool ipk_pd = r.i_plus_kl_min_eig >= tol.invertibility * ipk_scale;

  if (!range_ok) {
    r.reasons.push_back(fmt::format("density_boundary_residual {:.3e} > {:.1e} (R(K*) not in D(L))",
                                    density_boundary_residual, tol.endpoint));
  }
  if (!kernel_ok) {
    r.reasons.push_back(fmt::format("generator_kernel_residual {:.3e} > {:.1e} (R(K) not in Ker L^)",
                                    generator_kernel_residual, tol.kernel));
  }
  if (!hermitian_ok) {
    r.reasons.push_back(fmt::format("kl_hermitian_residual {:.3e} > {:.1e}", r.kl_hermitian_residual, tol.hermitian));
  }
  if (!dense_ok) {
    r.reasons.push_back(fmt::format("dense_domain_margin {:.3e}: Ker(I + K*L*) is not trivial", r.dense_domain_margin));
  }
  if (!ipk_pd) {
    r.reasons.push_back(fmt::format("i_plus_kl_min_eig {:.6g} is not positive", r.i_plus_kl_min_eig));
  }
  if (!kl_psd) r.reasons.push_back(fmt::format("kl_min_eig {:.6g} < 0 (KL >= 0 fails)", r.kl_min_eig));

  const bool structural = range_ok && kernel_ok && hermitian_ok && dense_ok;
  r.nonnegative_kl = structural && kl_psd;
  r.positive_factor = structural && ipk_pd;
  if (r.nonnegative_kl && !r.positive_factor) {
    throw LabError(ErrorCode::ImplicationFailed,
                   fmt::format("KL >= 0 but min eig(I+KL) = {:.6g}; W(I+KL) = 1 + W(KL) is contradicted",
                               r.i_plus_kl_min_eig));
  }
  r.verdict = r.nonnegative_kl ? HypothesisVerdict::NonnegativeKL
              : r.positive_factor ? HypothesisVerdict::PositiveFactor
                            : HypothesisVerdict::Violated;
  return r;
}

ConditionReport verify_conditions(const PerturbationSpec& spec, const DenseOperator& l,
                                          const sl::Potential& q, const sl::Grid1D& grid, const Tolerances& tol) {
  check_shapes(spec, grid.n() + 2);
  const RealVector w = grid.operator_weights();
  double kernel_residual = 0.0;
  for (const Vector& g : spec.generators) {
    const double gnorm = weighted_norm(g, grid.weights());
    if (gnorm == 0.0) continue;
    const RealVector re = sl::maximal_action(q, grid, g.real());
    const RealVector im = sl::maximal_action(q, grid, g.imag());
    const double act = std::sqrt((w.array() * (re.array().square() + im.array().square())).sum());
    kernel_residual = std::max(kernel_residual, act / gnorm);
  }
  // Violated endpoint data is a verdict here, not an error.
  const DenseOperator kl = build_KL(spec, l, std::numeric_limits<double>::infinity());
  return evaluate_conditions(kl, kernel_residual, spec.density_boundary_residual(), tol);
}

double factorization_residual(const DenseOperator& l_inverse, const DenseOperator& k, const DenseOperator& kl) {
  const DenseOperator sum = l_inverse + k;
  const DenseOperator factored = (DenseOperator::identity(kl.weight()) + kl) * l_inverse;
  return operator_norm(sum - factored) / operator_norm(sum);
}

DenseOperator assemble_LK_inverse(const DenseOperator& l_inverse, const DenseOperator& k, const DenseOperator& kl,
                                  double tol) {
  const double r = factorization_residual(l_inverse, k, kl);
  if (!(r <= tol)) {
    throw LabError(ErrorCode::FactorizationMismatch,
                   fmt::format("(L^-1 + K) vs (I + KL) L^-1 residual {:.3e} exceeds {:.1e}", r, tol));
  }
  return l_inverse.with_entries(l_inverse.entries() + k.entries(), "L_K^-1");
}

DenseOperator assemble_adjoint_inverse(const DenseOperator& l_inverse, const DenseOperator& k) {
  const DenseOperator adj = l_inverse.adjoint() + k.adjoint();
  return adj.with_entries(adj.entries(), "(L_K^*)^-1");
}

GramData gram_from_pair(const sl::FundamentalPair& pair, const sl::Grid1D& grid) {
  return {sl::inner_product(pair.c, pair.c, grid), sl::inner_product(pair.s, pair.s, grid),
          sl::inner_product(pair.c, pair.s, grid), pair.c_end.value1, pair.s_end.value1};
}

AdjointCoefficients closed_form_ab(const GramData& g, const RealVector& c, const RealVector& s, double alpha,
                                   double beta) {
  const double den = (1.0 + alpha * g.cc) * (1.0 + beta * g.ss) - alpha * beta * g.cs * g.cs;
  if (!(std::abs(den) > 1e-12)) {
    throw LabError(ErrorCode::DegenerateDenominator, fmt::format("a/b denominator {:.3e} vanishes", den));
  }
  AdjointCoefficients out;
  out.denominator = den;
  out.a = (alpha * beta * g.cs * s - alpha * (1.0 + beta * g.ss) * c) / den;
  const double c_coef = alpha * (g.c1 * (1.0 + beta * g.ss) - beta * g.s1 * g.cs);
  const double s_coef = -beta * (alpha * g.c1 * g.cs - g.s1 * (1.0 + alpha * g.cc));
  out.b = (c_coef * c + s_coef * s) / den;
  return out;
}

AdjointCoefficients closed_form_ab(const sl::FundamentalPair& pair, double alpha, double beta,
                                   const sl::Grid1D& grid) {
  return closed_form_ab(gram_from_pair(pair, grid), pair.c, pair.s, alpha, beta);
}

DenseOperator assemble_adjoint_direct(const sl::Potential& q, const RealVector& a, const RealVector& b,
                                      const sl::Grid1D& grid, EndpointStencil stencil) {
  const int n = grid.n();
  if (a.size() != n + 2 || b.size() != n + 2) {
    throw LabError(ErrorCode::InvalidArgument, "a, b must be sampled on all nodes");
  }
  const double h = grid.h();
  RealVector d0 = RealVector::Zero(n);
  RealVector d1 = RealVector::Zero(n);
  if (stencil == EndpointStencil::SecondOrder) {
    // v(0) = v(1) = 0 folded in.
    d0(0) = 4.0 / (2.0 * h);
    d0(1) = -1.0 / (2.0 * h);
    d1(n - 1) = -4.0 / (2.0 * h);
    d1(n - 2) = 1.0 / (2.0 * h);
  } else {
    d0(0) = 1.0 / h;
    d1(n - 1) = -1.0 / h;
  }
  const DenseOperator l = sl::assemble_dirichlet_L(q, grid);
  const RealMatrix rank2 = a.segment(1, n) * d0.transpose() + b.segment(1, n) * d1.transpose();
  return l.with_entries(l.entries() + rank2.cast<Complex>(), "L_K^*");
}

double adjoint_crosscheck_error(const DenseOperator& direct, const DenseOperator& pipeline_adjoint_inverse,
                                const sl::Grid1D& grid) {
  const RealVector x = grid.interior_nodes();
  const RealVector w = grid.operator_weights();
  const double pi = std::numbers::pi;
  std::vector<RealVector> probes;
  for (int k = 1; k <= 3; ++k) probes.push_back((k * pi * x).array().sin().matrix());
  probes.push_back((x.array() * (1.0 - x.array())).matrix());
  Matrix rhs(grid.n(), static_cast<Eigen::Index>(probes.size()));
  for (std::size_t j = 0; j < probes.size(); ++j) rhs.col(static_cast<Eigen::Index>(j)) = probes[j].cast<Complex>();
  const Matrix direct_sol = solve(direct, rhs);
  const Matrix pipeline_sol = pipeline_adjoint_inverse.entries() * rhs;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
    const double num = weighted_norm(direct_sol.col(j) - pipeline_sol.col(j), w);
    worst = std::max(worst, num / weighted_norm(pipeline_sol.col(j), w));
  }
  return worst;
}

}  // namespace riesz::pert
