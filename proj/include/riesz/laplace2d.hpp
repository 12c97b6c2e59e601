#pragma once

// Dirichlet problem for -Laplace on the unit square: 5-point operator,
// harmonic generators and the rank-1 perturbation K f = phi <f, psi>.

#include <cstdint>
#include <string>

#include "riesz/linalg.hpp"

namespace riesz::lap2d {

/// nx = ny interior nodes per axis, h = 1/(nx+1). Node (i, j) has
/// coordinates ((i+1)h, (j+1)h) and index j*nx + i.
class Grid2D {
 public:
  Grid2D(int nx, int ny);
  explicit Grid2D(int n) : Grid2D(n, n) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int size() const { return nx_ * ny_; }
  double h() const { return h_; }
  int index(int i, int j) const { return j * nx_ + i; }
  double x(int i) const { return (i + 1) * h_; }
  double y(int j) const { return (j + 1) * h_; }
  /// h^2 per interior node.
  RealVector weights() const { return RealVector::Constant(size(), h_ * h_); }

 private:
  int nx_;
  int ny_;
  double h_;
};

inline constexpr int kMaxDenseNodes2D = 4096;

/// (4u_ij - u_{i+-1,j} - u_{i,j+-1}) / h^2 with zero boundary values.
/// Throws BudgetExceeded when nx*ny > 4096.
DenseOperator assemble_dirichlet_laplacian_2d(const Grid2D& grid);

/// (4/h^2)(sin^2(m pi h/2) + sin^2(k pi h/2)), ascending.
RealVector dirichlet_eigenvalues_2d(const Grid2D& grid);

/// sin(m pi x) sin(k pi y) on the interior nodes.
RealVector dirichlet_mode(const Grid2D& grid, int m, int k);

enum class HarmonicKind { One, XY, XSquaredMinusYSquared, RealPower };

struct HarmonicFunction {
  HarmonicKind kind = HarmonicKind::One;
  int degree = 0;  // k for RealPower
  RealVector samples;
  /// max over interior nodes of |5-point Laplacian of phi|, using the exact
  /// boundary values.
  double harmonicity_residual = 0.0;

  double value(double x, double y) const;
  std::string name() const;
};

/// kind: "one", "xy", "x2-y2" or "re_z<k>" (Re (x+iy)^k, k >= 1).
/// Throws UnsupportedKind.
HarmonicFunction harmonic_basis(const Grid2D& grid, const std::string& kind);
HarmonicFunction harmonic_basis(const Grid2D& grid, HarmonicKind kind, int degree = 0);

struct Rank1Perturbation {
  DenseOperator K;
  DenseOperator KL;
  Vector psi;  // alpha L^-1 phi
  double alpha = 0.0;
  double phi_norm_sq = 0.0;
  /// ||KL - alpha phi <., phi>|| / max(1, ||alpha phi <., phi>||)
  double kl_identity_residual = 0.0;
};

/// psi = alpha L^-1 phi, K = phi <., psi>, KL = phi <., L^* psi>.
/// Throws InvalidArgument for alpha < 0 and FactorizationMismatch when KL
/// disagrees with alpha phi <., phi> beyond 1e-8.
Rank1Perturbation build_rank1_K_2d(const HarmonicFunction& phi, double alpha, const DenseOperator& l,
                                   const DenseOperator& l_inverse);

/// -Delta_h + (alpha phi / (1 + alpha ||phi||^2)) <Delta_h ., phi>.
DenseOperator adjoint_action_2d(const HarmonicFunction& phi, double alpha, const Grid2D& grid);

/// For u = lk_inverse f: max over the boundary ring of
/// |u_b - alpha phi_b <u, phi> / (1 + alpha ||phi||^2)| / max|u|, where u_b is
/// the one-ring extrapolation 2u_1 - u_2.
double domain_condition_residual(const Grid2D& grid, const HarmonicFunction& phi, double alpha,
                                 const DenseOperator& lk_inverse, const Vector& f);

/// Random combination of sin(m pi x) sin(k pi y), m, k <= 4.
Vector random_smooth_field(const Grid2D& grid, std::uint64_t seed);

/// Writes x, y, phi over the interior nodes.
void write_harmonic_csv(const std::string& path, const Grid2D& grid, const HarmonicFunction& phi);

}  // namespace riesz::lap2d
