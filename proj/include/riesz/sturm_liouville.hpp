#pragma once

// Sturm-Liouville problem -y'' + q y = f on (0,1): grids, potentials, the
// fundamental pair (c, s) spanning the kernel of the maximal operator, the
// transmutation kernel, and the Dirichlet reference operator L.

#include <functional>
#include <optional>
#include <string>

#include "riesz/linalg.hpp"

namespace riesz::sl {

enum class Quadrature { Trapezoid, Simpson };

/// Uniform grid x_i = i*h, i = 0..n+1, with n interior nodes.
class Grid1D {
 public:
  explicit Grid1D(int n, Quadrature rule = Quadrature::Trapezoid);

  int n() const { return n_; }
  double h() const { return h_; }
  Quadrature rule() const { return rule_; }
  /// All n+2 nodes, endpoints included.
  const RealVector& nodes() const { return nodes_; }
  /// Quadrature weights on all n+2 nodes.
  const RealVector& weights() const { return weights_; }
  /// Weights of the discrete operators on interior nodes: h each (the
  /// trapezoid weights, whatever rule() says), so that L is self-adjoint.
  RealVector operator_weights() const { return RealVector::Constant(n_, h_); }
  RealVector interior_nodes() const { return nodes_.segment(1, n_); }

 private:
  int n_;
  double h_;
  Quadrature rule_;
  RealVector nodes_;
  RealVector weights_;
};

/// Real potential q. Evaluated exactly for closed forms, piecewise linearly
/// for tables.
class Potential {
 public:
  static Potential zero();
  static Potential constant(double q0);
  static Potential linear(double slope);
  /// q(x) = amplitude * cos(2 pi x)
  static Potential mathieu(double amplitude);
  static Potential table(RealVector x, RealVector q);
  static Potential from_csv(const std::string& path);
  /// "zero", "const:<q0>", "linear:<slope>", "mathieu:<A>", "csv:<path>".
  static Potential parse(const std::string& descriptor);

  double operator()(double x) const { return eval_(x); }
  RealVector sample(const RealVector& x) const;
  const std::string& descriptor() const { return descriptor_; }
  bool is_zero() const { return descriptor_ == "zero"; }
  /// Constant value when the potential is zero or constant.
  std::optional<double> constant_value() const { return constant_; }

 private:
  Potential(std::string descriptor, std::function<double(double)> eval, std::optional<double> constant)
      : descriptor_(std::move(descriptor)), eval_(std::move(eval)), constant_(constant) {}

  std::string descriptor_;
  std::function<double(double)> eval_;
  std::optional<double> constant_;
};

struct EndpointData {
  double value0 = 0.0;
  double deriv0 = 0.0;
  double value1 = 0.0;
  double deriv1 = 0.0;
};

/// c(0)=1, c'(0)=0, s(0)=0, s'(0)=1; sampled on all grid nodes.
struct FundamentalPair {
  RealVector c;
  RealVector s;
  RealVector dc;
  RealVector ds;
  EndpointData c_end;
  EndpointData s_end;
  double wronskian_residual = 0.0;  // max_i |c s' - c' s - 1|
};

/// Goursat solution in characteristic coordinates xi = (x+t)/2, eta = (x-t)/2,
/// tabulated on the triangle xi, eta >= 0, xi + eta <= 1 with step 1/m.
class TransmutationKernel {
 public:
  TransmutationKernel(int m, RealMatrix table, int iterations, double last_delta)
      : m_(m), table_(std::move(table)), iterations_(iterations), last_delta_(last_delta) {}

  int mesh() const { return m_; }
  const RealMatrix& table() const { return table_; }
  int picard_iterations() const { return iterations_; }
  double last_delta() const { return last_delta_; }

  /// Piecewise-linear interpolation on the triangulated mesh.
  double H(double xi, double eta) const;
  /// K(x,t) = H((x+t)/2, (x-t)/2) for |t| <= x <= 1.
  double K(double x, double t) const { return H(0.5 * (x + t), 0.5 * (x - t)); }
  double K_even(double x, double t) const { return K(x, t) + K(x, -t); }
  double K_odd(double x, double t) const { return K(x, t) - K(x, -t); }

 private:
  int m_;
  RealMatrix table_;
  int iterations_;
  double last_delta_;
};

/// Classical RK4 on (y, y')' = (y', q y) with `substeps` steps per grid cell.
FundamentalPair solve_fundamental_ivp(const Potential& q, const Grid1D& grid, int substeps = 4);

struct GoursatOptions {
  double tolerance = 1e-12;
  int max_iterations = 100;
};

/// Picard iteration for H = 1/2 int_0^xi q + int_0^xi int_0^eta q(a+b) H(a,b) db da.
/// Throws NoConvergence when the budget runs out; requires m >= 8.
TransmutationKernel solve_goursat_kernel(const Potential& q, int m, GoursatOptions options = {});

/// c(x) = 1 + int_0^x K(x,t;0) dt, s(x) = x + int_0^x K(x,t;inf) t dt.
FundamentalPair fundamental_from_kernel(const TransmutationKernel& kernel, const Grid1D& grid);

/// Dirichlet operator on interior nodes: (-u_{i+1} + 2u_i - u_{i-1})/h^2 + q_i u_i.
DenseOperator assemble_dirichlet_L(const Potential& q, const Grid1D& grid);

/// Raw differential action (-D^2 + q) g on interior nodes, using the
/// endpoint values of g (no boundary condition imposed).
RealVector maximal_action(const Potential& q, const Grid1D& grid, const RealVector& g);

/// sum_i w_i f_i conj(g_i) over all n+2 nodes.
double inner_product(const RealVector& f, const RealVector& g, const Grid1D& grid);
Complex inner_product(const Vector& f, const Vector& g, const Grid1D& grid);

/// Closed-form Dirichlet eigenvalues 4/h^2 sin^2(k pi h/2), k = 1..n.
RealVector dirichlet_eigenvalues_closed_form(int n);

/// Writes x, c, s.
void write_fundamental_csv(const std::string& path, const FundamentalPair& pair, const Grid1D& grid);

}  // namespace riesz::sl
