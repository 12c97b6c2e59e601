#pragma once

// Verdicts on an assembled restriction L_K: its spectrum, realness and
// positivity, eigenvector conditioning, the similarity C = S L^-1 S with
// S = (I + KL)^{1/2}, and numerical-range certificates for KL.

#include <optional>
#include <string>
#include <vector>

#include "riesz/linalg.hpp"
#include "riesz/tolerances.hpp"

namespace riesz::analysis {

struct RestrictionSpectrum {
  Vector eigenvalues;        // lambda = 1/mu, sorted by real part
  EigDecomposition inverse;  // full decomposition of L_K^-1
  int discarded = 0;         // mu below the invertibility floor
};

/// Eigenvalues of lk_inverse mapped by mu -> 1/mu. Values with
/// |mu| <= floor * max|mu| are dropped and counted; throws SingularOperator
/// when nothing survives.
RestrictionSpectrum spectrum_of_restriction(const DenseOperator& lk_inverse, double floor = 1e-10);

struct RealnessVerdict {
  bool pass = false;
  double max_imag_ratio = 0.0;  // max |Im l| / max(|l|, 1)
  double min_real_part = 0.0;
  Complex worst;  // eigenvalue attaining max_imag_ratio, or min Re when positivity fails
  std::string message;
};

RealnessVerdict realness_verdict(const Vector& eigenvalues, double tol, bool require_positive);

struct RieszMetric {
  double kappa = 0.0;          // right eigenvectors, columns normalized
  double kappa_adjoint = 0.0;  // left eigenvectors from the adjoint, columns normalized
  double biorthogonality_residual = 0.0;
  double min_pairing = 0.0;  // min |<v_i, w_i>| over unit v_i, w_i
  bool near_defective = false;
  std::string note;
};

/// Left eigenvectors are taken from the adjoint's decomposition, matched to
/// the right ones by nearest conjugate eigenvalue and scaled to
/// <v_i, w_i> = 1. NearDefective (a flag, not an error) when a residual
/// exceeds 1e-8 or a pairing drops below 1e-6.
RieszMetric riesz_basis_metric(const EigDecomposition& right, const EigDecomposition& adjoint,
                               const RealVector& weight);
RieszMetric riesz_basis_metric(const DenseOperator& lk_inverse, const DenseOperator& lk_adjoint_inverse);

struct SimilarityResult {
  DenseOperator S;
  DenseOperator C;
  double hermitian_residual = 0.0;      // ||C - C^H|| / ||C||
  double factorization_residual = 0.0;  // ||L_K^-1 - S C S^-1|| / ||L_K^-1||
  double isospectrality_gap = 0.0;      // Hausdorff distance, sigma(C) vs sigma(L_K^-1)
  RealVector spectrum_C;
};

/// Throws NotPositiveDefinite unless I + KL is Hermitian positive definite.
/// lk_inverse_spectrum, when given, spares a second eigendecomposition.
SimilarityResult similarity_transform(const DenseOperator& l_inverse, const DenseOperator& kl,
                                      const DenseOperator& lk_inverse, const Tolerances& tol = {},
                                      const std::optional<Vector>& lk_inverse_spectrum = std::nullopt);

struct RangeCertificates {
  bool hermitian = false;
  bool kl_nonnegative = false;  // W(KL) in [-tol, inf)
  double kl_range_min = 0.0;
  double kl_range_max = 0.0;
  bool zero_excluded = false;  // 0 not in W(I + KL)
  double zero_margin = 0.0;    // 1 + kl_range_min by translation
  bool product_positive = false;  // sigma(L^-1 (I + KL)) in (0, inf)
  double product_min_real = 0.0;
  bool pass = false;
  std::optional<Complex> offending_point;
  std::string message;
};

/// Hermitian KL: range endpoints from the Hermitian eigenvalues. Otherwise
/// a rotation sweep locates a boundary point with nonzero imaginary part and
/// the certificate fails. The product check runs when l_inverse is given.
RangeCertificates numerical_range_certificates(const DenseOperator& kl, const Tolerances& tol = {},
                                               const DenseOperator* l_inverse = nullptr);

/// max(sup_a inf_b |a - b|, sup_b inf_a |a - b|)
double hausdorff_distance(const Vector& a, const Vector& b);

/// Greedy nearest-neighbour pairing of two spectra sorted by real part;
/// returns the largest paired distance.
double matched_distance(const Vector& a, const Vector& b);

Vector sort_by_real(Vector v);

struct SpectralReport {
  Vector eigenvalues_LK;
  int discarded = 0;
  double eig_residual = 0.0;
  double max_imag_ratio = 0.0;
  double min_real_part = 0.0;
  std::optional<RieszMetric> riesz;
  double similarity_hermitian_residual = 0.0;
  double similarity_factorization_residual = 0.0;
  double isospectrality_gap = 0.0;
  std::optional<double> adjoint_spectrum_gap;  // sigma(adjoint) vs conj sigma(L_K^-1)

  bool real_spectrum = false;     // realness (and positivity when required)
  bool riesz_basis = false;       // eigenvectors well conditioned
  bool similar_to_hermitian = false;
  bool adjoint_consistent = false;
};

struct ReportOptions {
  bool require_positive = false;
  bool compute_riesz = true;
  /// Riesz metric verdict threshold on kappa.
  double kappa_limit = 1e6;
};

/// Full analysis of L_K^-1 = L^-1 + K. lk_adjoint_inverse may be null, in
/// which case the Riesz metric and the adjoint check are skipped.
SpectralReport analyze_restriction(const DenseOperator& l_inverse, const DenseOperator& kl,
                                   const DenseOperator& lk_inverse, const DenseOperator* lk_adjoint_inverse,
                                   const Tolerances& tol = {}, const ReportOptions& options = {});

}  // namespace riesz::analysis
