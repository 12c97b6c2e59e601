#pragma once

// Finite-dimensional ground truth: L Hermitian positive definite, M = KL
// Hermitian positive semidefinite, and the restriction L_K = L (I + M)^-1.
// Also the spectral inclusion sigma(A^-1 B) in W(B)/W(A) on random pairs.

#include <cstdint>
#include <string>
#include <vector>

#include "riesz/linalg.hpp"

namespace riesz::oracle {

enum class Construction { EigenvalueSampled, Gram, Diagonal };

std::string_view to_string(Construction c);

struct OracleInstance {
  int n = 0;
  DenseOperator L;
  DenseOperator M;  // plays KL
  DenseOperator K;  // M L^-1
  std::uint64_t seed = 0;
  Construction construction = Construction::EigenvalueSampled;
};

inline constexpr int kMaxOracleDim = 12;

/// n in 2..12. L = Q diag(l) Q^T with l log-uniform in [1, 1e4]; M likewise
/// on [1e-2, 1e2], and with probability 1/2 some of its eigenvalues are
/// zeroed. Gram builds M = G G^T from a random n x r factor. Diagonal keeps
/// Q = I for both. Throws InvalidArgument.
OracleInstance random_instance(int n, std::uint64_t seed, Construction construction);

/// Instance from given operators (any size, shared weights); K = M L^-1.
OracleInstance make_instance(DenseOperator l, DenseOperator m, std::uint64_t seed = 0);

/// ||K L - M|| / max(1, ||M||)
double construction_residual(const OracleInstance& inst);

enum class Verdict { Pass, HypothesisViolated, ViolationFound };

std::string_view to_string(Verdict v);

struct OracleReport {
  double min_eig_L = 0.0;
  double min_eig_i_plus_m = 0.0;
  double m_hermitian_residual = 0.0;
  Vector eigenvalues;  // of L (I + M)^-1, descending modulus
  double max_imag_ratio = 0.0;
  double min_real = 0.0;
  double eig_residual = 0.0;  // relative to ||L_K||
  double kappa = 0.0;
  double kappa_bound = 0.0;  // min(kappa(I+M), sqrt(n kappa(I+M)))
  double similarity_hermitian_residual = 0.0;  // S^-1 L_K^-1 S
  bool hypotheses_hold = false;
  bool has_nonreal_pair = false;
  Verdict verdict = Verdict::HypothesisViolated;
  std::string message;
};

/// Checks realness, positivity, diagonalizability, the conditioning bound and
/// Hermiticity of S^-1 L_K^-1 S with S = (I + M)^{1/2}. Instances outside the
/// hypothesis class (L not PD, M not Hermitian or I + M not PD) are reported
/// as HypothesisViolated with the spectrum still computed.
OracleReport verify_conclusions(const OracleInstance& inst, double tol = 1e-9);

/// M <- M - (1 + eps) I with eps = min eig(M) + 1/2, so min eig(I + M) = -1/2.
OracleInstance violated_instance(int n, std::uint64_t seed);

/// As violated_instance plus a skew-symmetric part of unit scale, leaving
/// the Hermitian class.
OracleInstance nonhermitian_violated_instance(int n, std::uint64_t seed);

struct SweepRow {
  std::uint64_t seed = 0;
  int n = 0;
  double min_eig_i_plus_m = 0.0;
  double max_imag_ratio = 0.0;
  double kappa = 0.0;
  Verdict verdict = Verdict::Pass;
  bool nonreal = false;
};

enum class Family { Valid, Violated, NonHermitianViolated };

/// Seeds first_seed .. first_seed + count - 1, n = 2 + seed mod (max_n - 1).
/// Valid instances alternate the eigenvalue-sampled and Gram constructions.
std::vector<SweepRow> run_sweep(Family family, int count, int max_n, std::uint64_t first_seed, double tol,
                                int threads);

/// seed, n, min_eig_i_plus_m, max_imag_ratio, kappa, verdict
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

enum class InclusionVerdict { Certified, Violation, Inconclusive };

std::string_view to_string(InclusionVerdict v);

struct InclusionReport {
  int n = 0;
  std::uint64_t seed = 0;
  double shift = 0.0;          // added to A so that 0 is outside W(A)
  double margin_A = 0.0;       // certified dist(0, W(A))
  int eigenvalues = 0;
  int certified = 0;
  int angles_used = 0;
  double worst_excess = 0.0;   // largest outer excess over the witnesses
  double worst_gap = 0.0;      // largest inner-hull distance over the witnesses
  InclusionVerdict verdict = InclusionVerdict::Inconclusive;
};

/// For each eigenpair (lambda, x) of A^-1 B the witness w_a = (Ax,x)/(x,x)
/// lies in W(A) and lambda w_a = (Bx,x)/(x,x) in W(B). Membership is
/// certified by the inner hull, violation by the outer support half-planes,
/// both at tol * max(1, ||.||); the sweep density doubles up to 4096 angles.
InclusionReport williams_inclusion_check(int n, std::uint64_t seed, double tol = 1e-9);

/// Same check for given A, B (0 must already be outside W(A)).
InclusionReport williams_inclusion_check(const DenseOperator& a, const DenseOperator& b, double tol = 1e-9);

std::vector<InclusionReport> williams_sweep(int count, int max_n, std::uint64_t first_seed, double tol, int threads);

/// max over sampled t of |h_{aT+b}(t) - |a| h_T(t - arg a) - Re(e^{-it} b)|
/// relative to max(1, |a| ||T|| + |b|).
double affine_range_residual(const DenseOperator& t, Complex a, Complex b, int n_angles = 64);

/// Random complex n x n matrix with unit weights.
DenseOperator random_complex_operator(int n, std::uint64_t seed);

}  // namespace riesz::oracle
