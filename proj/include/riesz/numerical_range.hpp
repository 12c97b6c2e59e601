#pragma once

#include <vector>

#include "riesz/linalg.hpp"

namespace riesz {

/// Polygonal sandwich of the numerical range W(A) = {<Ax,x> : ||x||_w = 1}
/// from Johnson's rotation sweep. For each angle t the top eigenpair of the
/// Hermitian part of e^{-it}A gives a support value h(t) (outer half-plane
/// Re(e^{-it} z) <= h(t)) and a boundary point of W(A) (inner hull vertex).
struct NumericalRangeEstimate {
  std::vector<double> angles;
  std::vector<double> support_values;
  std::vector<Complex> boundary_points;
  std::vector<Complex> inner_hull;  // convex hull of boundary_points, counter-clockwise

  /// Certified lower bound on dist(0, W(A)); 0 when the outer polygon reaches 0.
  double margin = 0.0;
  /// Distance from 0 to the inner hull, an upper bound on dist(0, W(A)).
  double margin_upper = 0.0;
  bool contains_zero = true;

  /// max_t Re(e^{-it} z) - h(t); positive means z is certainly outside W(A).
  double outer_excess(Complex z) const;
  /// Distance from z to the inner hull; 0 means z is certainly inside W(A).
  double inner_distance(Complex z) const;
};

/// Requires n_angles >= 4.
NumericalRangeEstimate numerical_range_boundary(const DenseOperator& a, int n_angles = 256);

/// h(t) = max Re(e^{-it} W(A)), the top eigenvalue of the Hermitian part of e^{-it}A.
double support_function(const DenseOperator& a, double theta);

/// Rayleigh quotient <Ax,x>_w / <x,x>_w.
Complex rayleigh_quotient(const DenseOperator& a, const Vector& x);

std::vector<Complex> convex_hull(std::vector<Complex> points);
double distance_to_convex_polygon(Complex z, const std::vector<Complex>& hull);

}  // namespace riesz
