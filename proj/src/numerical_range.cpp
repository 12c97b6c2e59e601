#include "riesz/numerical_range.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace riesz {

namespace {

double cross(Complex o, Complex a, Complex b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

double segment_distance(Complex z, Complex a, Complex b) {
  const Complex ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(z - a);
  const double t = std::clamp(((z - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
  return std::abs(z - (a + t * ab));
}

}  // namespace

std::vector<Complex> convex_hull(std::vector<Complex> points) {
  std::sort(points.begin(), points.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;
  // Andrew's monotone chain.
  std::vector<Complex> hull(2 * points.size());
  std::size_t k = 0;
  for (const Complex& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

double distance_to_convex_polygon(Complex z, const std::vector<Complex>& hull) {
  if (hull.empty()) return std::numeric_limits<double>::infinity();
  if (hull.size() == 1) return std::abs(z - hull[0]);
  if (hull.size() >= 3) {
    bool inside = true;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      if (cross(hull[i], hull[(i + 1) % hull.size()], z) < 0.0) {
        inside = false;
        break;
      }
    }
    if (inside) return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    best = std::min(best, segment_distance(z, hull[i], hull[(i + 1) % hull.size()]));
  }
  return best;
}

double NumericalRangeEstimate::outer_excess(Complex z) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const Complex rot = std::polar(1.0, -angles[k]);
    worst = std::max(worst, (rot * z).real() - support_values[k]);
  }
  return worst;
}

double NumericalRangeEstimate::inner_distance(Complex z) const { return distance_to_convex_polygon(z, inner_hull); }

Complex rayleigh_quotient(const DenseOperator& a, const Vector& x) {
  return weighted_inner(a.apply(x), x, a.weight()) / weighted_inner(x, x, a.weight());
}

double support_function(const DenseOperator& a, double theta) {
  const Matrix b = to_unitary_frame(a);
  const Complex rot = std::polar(1.0, -theta);
  const Matrix herm = 0.5 * (rot * b + std::conj(rot) * b.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw LabError(ErrorCode::NoConvergence, "support_function: eig failed");
  return es.eigenvalues().maxCoeff();
}

NumericalRangeEstimate numerical_range_boundary(const DenseOperator& a, int n_angles) {
  if (n_angles < 4) throw LabError(ErrorCode::InvalidArgument, "numerical_range_boundary needs n_angles >= 4");
  const Matrix b = to_unitary_frame(a);
  const Matrix bh = b.adjoint();
  NumericalRangeEstimate out;
  out.angles.reserve(static_cast<std::size_t>(n_angles));
  for (int k = 0; k < n_angles; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / n_angles;
    const Complex rot = std::polar(1.0, -theta);
    const Matrix herm = 0.5 * (rot * b + std::conj(rot) * bh);
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
    if (es.info() != Eigen::Success) {
      throw LabError(ErrorCode::NoConvergence, "numerical_range_boundary: Hermitian part eig failed");
    }
    const Eigen::Index top = herm.rows() - 1;
    const Vector x = es.eigenvectors().col(top);
    out.angles.push_back(theta);
    out.support_values.push_back(es.eigenvalues()(top));
    out.boundary_points.push_back(x.dot(b * x));  // x^H B x, x unit
  }
  out.inner_hull = convex_hull(out.boundary_points);

  // dist(0, W) = max(0, max_t -h(t)); over the sampled angles this is a lower bound.
  double lower = 0.0;
  double scale = 1.0;
  for (double h : out.support_values) {
    lower = std::max(lower, -h);
    scale = std::max(scale, std::abs(h));
  }
  // Rounding in the Hermitian eigensolver is of order eps*||A||.
  out.margin = lower > 64.0 * std::numeric_limits<double>::epsilon() * scale ? lower : 0.0;
  out.margin_upper = out.inner_distance(Complex(0.0, 0.0));
  out.contains_zero = !(out.margin > 0.0);
  return out;
}

}  // namespace riesz
