#pragma once

// Dense linear-algebra substrate. Every operator carries the quadrature
// weights of its grid; adjoints, norms, Hermiticity and definiteness are
// all taken in the weighted inner product <f,g> = sum_i w_i f_i conj(g_i).

#include <Eigen/Dense>

#include <complex>
#include <string>

#include "riesz/errors.hpp"

namespace riesz {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

class DenseOperator {
 public:
  DenseOperator(Matrix entries, RealVector weight, std::string label = {});

  static DenseOperator identity(const RealVector& weight, std::string label = "I");
  static DenseOperator zero(const RealVector& weight, std::string label = "0");

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  const RealVector& weight() const { return weight_; }
  const std::string& label() const { return label_; }

  /// True when every imaginary part is exactly zero.
  bool is_real() const;

  /// Adjoint with respect to the weighted inner product: W^-1 A^H W.
  DenseOperator adjoint() const;

  /// Same grid, new entries.
  DenseOperator with_entries(Matrix entries, std::string label) const;

  Vector apply(const Vector& v) const { return entries_ * v; }

  DenseOperator operator+(const DenseOperator& rhs) const;
  DenseOperator operator-(const DenseOperator& rhs) const;
  DenseOperator operator*(const DenseOperator& rhs) const;
  DenseOperator scaled(Complex factor) const;

 private:
  void require_same_grid(const DenseOperator& rhs, const char* op) const;

  Matrix entries_;
  RealVector weight_;
  std::string label_;
};

struct EigDecomposition {
  Vector values;   // complex eigenvalues
  Matrix vectors;  // right eigenvectors, unit weighted norm, column j <-> values(j)
  double residual = 0.0;  // max_j ||A v_j - lambda_j v_j||_w
};

enum class Definiteness { Indefinite, PositiveSemidefinite, PositiveDefinite };

std::string_view to_string(Definiteness d);

struct PsdResult {
  Definiteness verdict = Definiteness::Indefinite;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

// --- weighted geometry helpers -------------------------------------------

Complex weighted_inner(const Vector& f, const Vector& g, const RealVector& weight);
double weighted_norm(const Vector& f, const RealVector& weight);

/// D A D^-1 with D = diag(sqrt(w)); weighted notions become Euclidean ones.
Matrix to_unitary_frame(const DenseOperator& a);
DenseOperator from_unitary_frame(const Matrix& b, const RealVector& weight, std::string label);

/// Largest singular value (Euclidean).
double spectral_norm(const Matrix& m);
/// Weighted operator norm ||A||_w.
double operator_norm(const DenseOperator& a);

// --- operations ------------------------------------------------------------

inline constexpr double kDefaultSingularFloor = 1e-14;

/// Solves A X = B by partial-pivot LU. Throws SingularOperator when the
/// estimated smallest singular value drops below relative_floor * ||A||_1.
Matrix solve(const DenseOperator& a, const Matrix& b, double relative_floor = kDefaultSingularFloor);
DenseOperator inverse(const DenseOperator& a, double relative_floor = kDefaultSingularFloor);
/// Inverse of a Hermitian operator, projected onto the Hermitian part to
/// remove the asymmetry left by LU. Throws NotHermitian.
DenseOperator hermitian_inverse(const DenseOperator& a, double hermitian_tol = 1e-10,
                                double relative_floor = kDefaultSingularFloor);

/// General eigensolver (Hessenberg reduction + shifted QR). Values in
/// descending modulus. Real input takes the real Schur path; input that is
/// Hermitian to rounding goes to the Hermitian solver.
EigDecomposition eig_general(const DenseOperator& a);
Vector eigenvalues_general(const DenseOperator& a);

/// Hermitian eigensolver in the weighted geometry; values ascending, vectors
/// weighted-orthonormal. Throws NotHermitian if hermitian_residual(a) > tol.
EigDecomposition eig_hermitian(const DenseOperator& a, double tol = 1e-10);
RealVector hermitian_eigenvalues(const DenseOperator& a, double tol = 1e-10);

/// ||A - A^H_w||_w / max(1, ||A||_w).
double hermitian_residual(const DenseOperator& a);

/// Thresholds are tol * max(1, ||A||_w): PSD iff min eig >= -threshold,
/// PositiveDefinite iff min eig >= +threshold.
PsdResult psd_check(const DenseOperator& a, double tol);

/// Principal square root. Eigenvalues in [-clip*||A||, 0) are clipped to 0;
/// anything more negative is rejected as NotPositiveDefinite.
DenseOperator sqrt_psd(const DenseOperator& a, double hermitian_tol = 1e-10, double clip = 1e-12);
/// Inverse square root; eigenvalues below invertibility_floor*||A|| are rejected.
DenseOperator inv_sqrt_psd(const DenseOperator& a, double hermitian_tol = 1e-10,
                           double invertibility_floor = 1e-10);

/// sigma_max / sigma_min of V after normalizing each column to unit weighted
/// norm, measured in the weighted geometry.
double condition_number(const Matrix& v, const RealVector& weight);
double condition_number(const Matrix& v);

}  // namespace riesz
