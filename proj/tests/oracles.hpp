#pragma once

// Independent reference computations for the unit tests. None of them go
// through the library's solvers.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle_ref {

using cd = std::complex<double>;

/// Thomas algorithm for sub/main/super diagonals a, b, c (a[0], c[n-1] unused).
inline std::vector<double> thomas_solve(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                        std::vector<double> d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

/// Characteristic polynomial det(zI - A) by Faddeev-LeVerrier; coefficients
/// from z^n down to z^0 (leading 1).
inline std::vector<cd> faddeev_leverrier(const Eigen::MatrixXcd& a) {
  const auto n = a.rows();
  std::vector<cd> coeff(static_cast<std::size_t>(n) + 1);
  coeff[0] = 1.0;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + coeff[static_cast<std::size_t>(k - 1)] * Eigen::MatrixXcd::Identity(n, n);
    coeff[static_cast<std::size_t>(k)] = -(a * m).trace() / static_cast<double>(k);
  }
  return coeff;
}

/// Roots of a monic polynomial by Durand-Kerner iteration.
inline std::vector<cd> durand_kerner(const std::vector<cd>& coeff, int iterations = 2000) {
  const std::size_t n = coeff.size() - 1;
  auto eval = [&](cd z) {
    cd v = 0.0;
    for (const cd& c : coeff) v = v * z + c;
    return v;
  };
  double radius = 0.0;
  for (std::size_t i = 1; i <= n; ++i) radius = std::max(radius, std::abs(coeff[i]));
  radius = 1.0 + radius;
  std::vector<cd> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::polar(0.9 * radius, 0.4 + 2.0 * std::numbers::pi * i / n);
  for (int it = 0; it < iterations; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cd den = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) den *= z[i] - z[j];
      }
      const cd step = eval(z[i]) / den;
      z[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15 * radius) break;
  }
  // Newton polish on the original polynomial.
  for (cd& r : z) {
    for (int k = 0; k < 3; ++k) {
      cd p = 0.0;
      cd dp = 0.0;
      for (const cd& c : coeff) {
        dp = dp * r + p;
        p = p * r + c;
      }
      if (std::abs(dp) > 0.0) r -= p / dp;
    }
  }
  return z;
}

/// Support function of the elliptical numerical range of [[p, r], [0, t]]:
/// foci p and t, minor axis |r|.
inline double ellipse_support(cd p, cd r, cd t, double theta) {
  const cd center = 0.5 * (p + t);
  const double major = 0.5 * std::sqrt(std::norm(t - p) + std::norm(r));
  const double minor = 0.5 * std::abs(r);
  const double phi = std::abs(t - p) > 0.0 ? std::arg(t - p) : 0.0;
  const double c = std::cos(theta - phi);
  const double s = std::sin(theta - phi);
  return std::real(std::exp(cd(0.0, -theta)) * center) + std::sqrt(major * major * c * c + minor * minor * s * s);
}

/// Largest distance from a point of `a` to its nearest point in `b`.
inline double one_sided_distance(const std::vector<cd>& a, const std::vector<cd>& b) {
  double worst = 0.0;
  for (const cd& x : a) {
    double best = INFINITY;
    for (const cd& y : b) best = std::min(best, std::abs(x - y));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace oracle_ref
