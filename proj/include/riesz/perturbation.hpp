#pragma once

// Finite-rank perturbations K with range in the kernel of the maximal
// operator: K f = sum_i g_i <f, sigma_i>. Builds K, KL, the restriction
// inverse L^-1 + K and its adjoint, and checks the similarity hypotheses.

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "riesz/linalg.hpp"
#include "riesz/sturm_liouville.hpp"
#include "riesz/tolerances.hpp"

namespace riesz::pert {

struct GeneralMode {};

/// sigma_1 = alpha L^-1 c, sigma_2 = beta L^-1 s.
struct SpecialMode {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Generators and densities are sampled on all n+2 nodes of the grid.
struct PerturbationSpec {
  std::vector<Vector> generators;
  std::vector<Vector> densities;
  std::variant<GeneralMode, SpecialMode> mode = GeneralMode{};

  std::size_t rank() const { return generators.size(); }
  /// max_i max(|sigma_i(0)|, |sigma_i(1)|)
  double density_boundary_residual() const;
};

/// Special-mode spec for the fundamental pair; requires alpha, beta >= 0.
PerturbationSpec make_special(const sl::FundamentalPair& pair, const DenseOperator& l_inverse, double alpha,
                              double beta);
PerturbationSpec make_general(std::vector<Vector> generators, std::vector<Vector> densities);

/// L^-1 applied to the interior samples of v, padded with zero endpoints.
Vector density_from_inverse(const DenseOperator& l_inverse, const Vector& v);

/// Interior samples of a full-grid vector.
Vector interior(const Vector& full);
Vector to_complex(const RealVector& v);

/// Config-file view of a spec: {"mode": "special", "alpha": a, "beta": b}
/// or {"mode": "general", "densities": ["sigma1.csv", "sigma2.csv"]}.
struct PerturbationConfig {
  std::string mode = "special";
  double alpha = 1.0;
  double beta = 1.0;
  std::vector<std::string> density_csv;
};

void to_json(nlohmann::json& j, const PerturbationConfig& c);
void from_json(const nlohmann::json& j, PerturbationConfig& c);

/// Turns a config into a spec on the given grid. General-mode densities are
/// (x, sigma) CSV tables interpolated linearly onto the nodes.
PerturbationSpec materialize(const PerturbationConfig& config, const sl::FundamentalPair& pair,
                             const DenseOperator& l_inverse, const sl::Grid1D& grid);

/// (Kf)_j = sum_i g_i(x_j) <f, sigma_i>. Throws EndpointViolation.
DenseOperator build_K(const PerturbationSpec& spec, const sl::Grid1D& grid, double endpoint_tol = 1e-10);

/// (KL)y = sum_i g_i <y, L^* sigma_i>, i.e. KL on D(L) extended by continuity.
DenseOperator build_KL(const PerturbationSpec& spec, const DenseOperator& l, double endpoint_tol = 1e-10);

enum class HypothesisVerdict { NonnegativeKL, PositiveFactor, Violated };

std::string_view to_string(HypothesisVerdict v);

struct ConditionReport {
  double kl_hermitian_residual = 0.0;
  double i_plus_kl_min_eig = 0.0;
  /// Min eigenvalue of the Hermitian part of KL (the left end of Re W(KL)).
  double kl_min_eig = 0.0;
  /// Smallest singular value of I + (KL)^*.
  double dense_domain_margin = 0.0;
  double generator_kernel_residual = 0.0;
  double density_boundary_residual = 0.0;
  bool positive_factor = false;
  bool nonnegative_kl = false;
  HypothesisVerdict verdict = HypothesisVerdict::Violated;
  std::vector<std::string> reasons;
};

/// Verdicts from KL plus the two structural residuals. Shared by the 1D and
/// 2D pipelines. Throws ImplicationFailed if KL >= 0 holds while I + KL > 0
/// does not (which would contradict W(I+KL) = 1 + W(KL)).
ConditionReport evaluate_conditions(const DenseOperator& kl, double generator_kernel_residual,
                                    double density_boundary_residual, const Tolerances& tol);

ConditionReport verify_conditions(const PerturbationSpec& spec, const DenseOperator& l,
                                          const sl::Potential& q, const sl::Grid1D& grid,
                                          const Tolerances& tol = {});

/// ||(L^-1 + K) - (I + KL) L^-1||_w / ||L^-1 + K||_w
double factorization_residual(const DenseOperator& l_inverse, const DenseOperator& k, const DenseOperator& kl);

/// L^-1 + K, after checking the factored form (I + KL) L^-1 agrees within
/// tol. Throws FactorizationMismatch.
DenseOperator assemble_LK_inverse(const DenseOperator& l_inverse, const DenseOperator& k, const DenseOperator& kl,
                                  double tol = 1e-11);

/// (L^-1 + K)^* = L^-1 + sum_i sigma_i <., g_i>.
DenseOperator assemble_adjoint_inverse(const DenseOperator& l_inverse, const DenseOperator& k);

struct GramData {
  double cc = 0.0;  // ||c||^2
  double ss = 0.0;  // ||s||^2
  double cs = 0.0;  // (c, s)
  double c1 = 0.0;  // c(1)
  double s1 = 0.0;  // s(1)
};

GramData gram_from_pair(const sl::FundamentalPair& pair, const sl::Grid1D& grid);

struct AdjointCoefficients {
  RealVector a;
  RealVector b;
  double denominator = 0.0;
};

/// Closed forms for a(x), b(x) in L_K^* v = -v'' + q v + a v'(0) + b v'(1).
/// Throws DegenerateDenominator.
AdjointCoefficients closed_form_ab(const GramData& gram, const RealVector& c, const RealVector& s, double alpha,
                                   double beta);
AdjointCoefficients closed_form_ab(const sl::FundamentalPair& pair, double alpha, double beta,
                                   const sl::Grid1D& grid);

enum class EndpointStencil {
  SecondOrder,       // v'(0) ~ (4 v_1 - v_2) / 2h, v'(1) ~ (v_{n-1} - 4 v_n) / 2h
  SummationByParts,  // v'(0) ~ v_1 / h, v'(1) ~ -v_n / h
};

/// -D^2 + q with v(0) = v(1) = 0, plus a(x_i) v'(0) + b(x_i) v'(1).
DenseOperator assemble_adjoint_direct(const sl::Potential& q, const RealVector& a, const RealVector& b,
                                      const sl::Grid1D& grid, EndpointStencil stencil = EndpointStencil::SecondOrder);

/// max over smooth probes f (sin k pi x for k = 1..3, x(1-x)) of
/// ||direct^-1 f - P f||_w / ||P f||_w.
double adjoint_crosscheck_error(const DenseOperator& direct, const DenseOperator& pipeline_adjoint_inverse,
                                const sl::Grid1D& grid);

}  // namespace riesz::pert
