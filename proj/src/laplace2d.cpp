#include "riesz/laplace2d.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>

#include "riesz/io.hpp"

namespace riesz::lap2d {

namespace {

constexpr double kPi = std::numbers::pi;

// Value of phi on the closed square, including the boundary ring.
double sample_full(const HarmonicFunction& phi, const Grid2D& grid, int i, int j) {
  return phi.value(i * grid.h(), j * grid.h());
}

}  // namespace

Grid2D::Grid2D(int nx, int ny) : nx_(nx), ny_(ny), h_(1.0 / (nx + 1)) {
  if (nx < 2 || ny < 2) throw LabError(ErrorCode::InvalidArgument, "Grid2D needs at least 2 nodes per axis");
  if (nx != ny) throw LabError(ErrorCode::InvalidArgument, "Grid2D cells must be square: nx == ny");
}

DenseOperator assemble_dirichlet_laplacian_2d(const Grid2D& grid) {
  if (grid.size() > kMaxDenseNodes2D) {
    throw LabError(ErrorCode::BudgetExceeded,
                   fmt::format("{}x{} grid exceeds the dense budget of {} nodes", grid.nx(), grid.ny(),
                               kMaxDenseNodes2D));
  }
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  RealMatrix a = RealMatrix::Zero(grid.size(), grid.size());
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const int p = grid.index(i, j);
      a(p, p) = 4.0 * inv_h2;
      if (i > 0) a(p, grid.index(i - 1, j)) = -inv_h2;
      if (i + 1 < grid.nx()) a(p, grid.index(i + 1, j)) = -inv_h2;
      if (j > 0) a(p, grid.index(i, j - 1)) = -inv_h2;
      if (j + 1 < grid.ny()) a(p, grid.index(i, j + 1)) = -inv_h2;
    }
  }
  return {a.cast<Complex>(), grid.weights(), "L"};
}

RealVector dirichlet_eigenvalues_2d(const Grid2D& grid) {
  const double h = grid.h();
  RealVector out(grid.size());
  for (int k = 1; k <= grid.ny(); ++k) {
    for (int m = 1; m <= grid.nx(); ++m) {
      const double sm = std::sin(m * kPi * h / 2.0);
      const double sk = std::sin(k * kPi * h / 2.0);
      out(grid.index(m - 1, k - 1)) = 4.0 / (h * h) * (sm * sm + sk * sk);
    }
  }
  std::sort(out.data(), out.data() + out.size());
  return out;
}

RealVector dirichlet_mode(const Grid2D& grid, int m, int k) {
  RealVector out(grid.size());
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      out(grid.index(i, j)) = std::sin(m * kPi * grid.x(i)) * std::sin(k * kPi * grid.y(j));
    }
  }
  return out;
}

double HarmonicFunction::value(double x, double y) const {
  switch (kind) {
    case HarmonicKind::One: return 1.0;
    case HarmonicKind::XY: return x * y;
    case HarmonicKind::XSquaredMinusYSquared: return x * x - y * y;
    case HarmonicKind::RealPower: return std::pow(Complex(x, y), degree).real();
  }
  return 0.0;
}

std::string HarmonicFunction::name() const {
  switch (kind) {
    case HarmonicKind::One: return "one";
    case HarmonicKind::XY: return "xy";
    case HarmonicKind::XSquaredMinusYSquared: return "x2-y2";
    case HarmonicKind::RealPower: return fmt::format("re_z{}", degree);
  }
  return "unknown";
}

HarmonicFunction harmonic_basis(const Grid2D& grid, HarmonicKind kind, int degree) {
  if (kind == HarmonicKind::RealPower && degree < 1) {
    throw LabError(ErrorCode::UnsupportedKind, "Re (x+iy)^k needs k >= 1");
  }
  HarmonicFunction phi;
  phi.kind = kind;
  phi.degree = kind == HarmonicKind::RealPower ? degree : 0;
  phi.samples.resize(grid.size());
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  double residual = 0.0;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const int fi = i + 1;
      const int fj = j + 1;
      const double c = sample_full(phi, grid, fi, fj);
      phi.samples(grid.index(i, j)) = c;
      const double lap = (sample_full(phi, grid, fi + 1, fj) + sample_full(phi, grid, fi - 1, fj) +
                          sample_full(phi, grid, fi, fj + 1) + sample_full(phi, grid, fi, fj - 1) - 4.0 * c) *
                         inv_h2;
      residual = std::max(residual, std::abs(lap));
    }
  }
  phi.harmonicity_residual = residual;
  return phi;
}

HarmonicFunction harmonic_basis(const Grid2D& grid, const std::string& kind) {
  if (kind == "one") return harmonic_basis(grid, HarmonicKind::One);
  if (kind == "xy") return harmonic_basis(grid, HarmonicKind::XY);
  if (kind == "x2-y2") return harmonic_basis(grid, HarmonicKind::XSquaredMinusYSquared);
  if (kind.rfind("re_z", 0) == 0) {
    int k = 0;
    const char* first = kind.data() + 4;
    const char* last = kind.data() + kind.size();
    const auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec == std::errc() && ptr == last && first != last) return harmonic_basis(grid, HarmonicKind::RealPower, k);
  }
  throw LabError(ErrorCode::UnsupportedKind,
                 "harmonic kind '" + kind + "' is not one of: one, xy, x2-y2, re_z<k>");
}

Rank1Perturbation build_rank1_K_2d(const HarmonicFunction& phi, double alpha, const DenseOperator& l,
                                   const DenseOperator& l_inverse) {
  if (!(alpha >= 0.0)) throw LabError(ErrorCode::InvalidArgument, "rank-1 perturbation needs alpha >= 0");
  if (phi.samples.size() != l.dim()) throw LabError(ErrorCode::InvalidArgument, "phi does not match the grid");
  const RealVector& w = l.weight();
  const Vector phi_c = phi.samples.cast<Complex>();

  Rank1Perturbation out{DenseOperator::zero(w, "K"), DenseOperator::zero(w, "KL"), Vector(), alpha, 0.0, 0.0};
  out.phi_norm_sq = weighted_norm(phi_c, w) * weighted_norm(phi_c, w);
  out.psi = alpha * l_inverse.apply(phi_c);

  const Vector w_psi = w.asDiagonal() * out.psi;
  out.K = l.with_entries(phi_c * w_psi.adjoint(), "K");
  const Vector w_lpsi = w.asDiagonal() * l.adjoint().apply(out.psi);
  out.KL = l.with_entries(phi_c * w_lpsi.adjoint(), "KL");

  const Vector w_phi = w.asDiagonal() * phi_c;
  const DenseOperator expected = l.with_entries(alpha * phi_c * w_phi.adjoint(), "alpha phi<.,phi>");
  out.kl_identity_residual = operator_norm(out.KL - expected) / std::max(1.0, operator_norm(expected));
  if (!(out.kl_identity_residual <= 1e-8)) {
    throw LabError(ErrorCode::FactorizationMismatch,
                   fmt::format("KL differs from alpha phi <., phi> by {:.3e}", out.kl_identity_residual));
  }
  return out;
}

DenseOperator adjoint_action_2d(const HarmonicFunction& phi, double alpha, const Grid2D& grid) {
  const DenseOperator l = assemble_dirichlet_laplacian_2d(grid);
  const RealVector w = grid.weights();
  const Vector phi_c = phi.samples.cast<Complex>();
  const double norm_sq = std::pow(weighted_norm(phi_c, w), 2);
  // <Delta_h v, phi> = -<v, L phi> (L symmetric under constant weights).
  const Vector functional = w.asDiagonal() * l.adjoint().apply(phi_c);
  const Complex factor = alpha / (1.0 + alpha * norm_sq);
  const Matrix correction = -factor * phi_c * functional.adjoint();
  return l.with_entries(l.entries() + correction, "L_K^*");
}

double domain_condition_residual(const Grid2D& grid, const HarmonicFunction& phi, double alpha,
                                 const DenseOperator& lk_inverse, const Vector& f) {
  const Vector u = lk_inverse.apply(f);
  const RealVector w = grid.weights();
  const Vector phi_c = phi.samples.cast<Complex>();
  const double norm_sq = std::pow(weighted_norm(phi_c, w), 2);
  const Complex pairing = weighted_inner(u, phi_c, w) * (alpha / (1.0 + alpha * norm_sq));
  const int nx = grid.nx();
  const int ny = grid.ny();
  double worst = 0.0;
  auto check = [&](Complex u1, Complex u2, double bx, double by) {
    const Complex trace = 2.0 * u1 - u2;
    worst = std::max(worst, std::abs(trace - phi.value(bx, by) * pairing));
  };
  for (int j = 0; j < ny; ++j) {
    check(u(grid.index(0, j)), u(grid.index(1, j)), 0.0, grid.y(j));
    check(u(grid.index(nx - 1, j)), u(grid.index(nx - 2, j)), 1.0, grid.y(j));
  }
  for (int i = 0; i < nx; ++i) {
    check(u(grid.index(i, 0)), u(grid.index(i, 1)), grid.x(i), 0.0);
    check(u(grid.index(i, ny - 1)), u(grid.index(i, ny - 2)), grid.x(i), 1.0);
  }
  return worst / std::max(u.cwiseAbs().maxCoeff(), 1e-300);
}

Vector random_smooth_field(const Grid2D& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RealVector f = RealVector::Zero(grid.size());
  for (int k = 1; k <= 4; ++k) {
    for (int m = 1; m <= 4; ++m) f += normal(rng) * dirichlet_mode(grid, m, k);
  }
  // A constant offset keeps f from vanishing on the boundary.
  f.array() += normal(rng);
  return f.cast<Complex>();
}

void write_harmonic_csv(const std::string& path, const Grid2D& grid, const HarmonicFunction& phi) {
  RealVector xs(grid.size());
  RealVector ys(grid.size());
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      xs(grid.index(i, j)) = grid.x(i);
      ys(grid.index(i, j)) = grid.y(j);
    }
  }
  io::write_csv(path, {"x", "y", "phi"}, {xs, ys, phi.samples});
}

}  // namespace riesz::lap2d
