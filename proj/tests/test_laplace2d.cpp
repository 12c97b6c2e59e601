#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "riesz/analysis.hpp"
#include "riesz/laplace2d.hpp"
#include "riesz/perturbation.hpp"

using namespace riesz;
using test_util::error_code;

namespace {

constexpr double kPi = std::numbers::pi;

struct Setup2D {
  lap2d::Grid2D grid;
  lap2d::HarmonicFunction phi;
  DenseOperator L;
  DenseOperator Linv;
  lap2d::Rank1Perturbation pert;
};

Setup2D setup(int n, const std::string& kind, double alpha = 1.0) {
  lap2d::Grid2D g(n);
  auto phi = lap2d::harmonic_basis(g, kind);
  DenseOperator l = lap2d::assemble_dirichlet_laplacian_2d(g);
  DenseOperator li = hermitian_inverse(l);
  auto p = lap2d::build_rank1_K_2d(phi, alpha, l, li);
  return {g, std::move(phi), std::move(l), std::move(li), std::move(p)};
}

}  // namespace

TEST_CASE("square grid geometry") {
  const lap2d::Grid2D g(7);
  CHECK(g.h() == doctest::Approx(0.125));
  CHECK(g.size() == 49);
  CHECK(g.index(2, 3) == 23);
  CHECK(g.x(0) == doctest::Approx(0.125));
  CHECK(g.weights().sum() == doctest::Approx(49.0 / 64.0));
  CHECK(error_code([] { lap2d::Grid2D(1); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { lap2d::Grid2D(4, 5); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { (void)lap2d::assemble_dirichlet_laplacian_2d(lap2d::Grid2D(65)); }) ==
        ErrorCode::BudgetExceeded);
}

TEST_CASE("5-point Laplacian spectrum and modes") {
  const lap2d::Grid2D g(15);
  const DenseOperator l = lap2d::assemble_dirichlet_laplacian_2d(g);
  CHECK(hermitian_residual(l) == 0.0);
  const RealVector closed = lap2d::dirichlet_eigenvalues_2d(g);
  RealVector eigs = hermitian_eigenvalues(l);
  std::sort(eigs.data(), eigs.data() + eigs.size());
  CHECK(((eigs - closed).array().abs() / closed.array()).maxCoeff() <= 1e-9);
  for (int m : {1, 2, 5}) {
    for (int k : {1, 3, 4}) {
      const RealVector v = lap2d::dirichlet_mode(g, m, k);
      const double sm = std::sin(m * kPi * g.h() / 2.0);
      const double sk = std::sin(k * kPi * g.h() / 2.0);
      const double lambda = 4.0 / (g.h() * g.h()) * (sm * sm + sk * sk);
      const Vector lv = l.apply(v.cast<Complex>());
      CHECK((lv - lambda * v.cast<Complex>()).norm() <= 1e-9 * lambda * v.norm());
    }
  }
  CHECK(std::abs(closed(0) - 2.0 * kPi * kPi) / (2.0 * kPi * kPi) <= 5e-3);
}

TEST_CASE("harmonic generators") {
  const lap2d::Grid2D g(15);
  for (const char* kind : {"one", "xy", "x2-y2", "re_z3"}) {
    const auto phi = lap2d::harmonic_basis(g, kind);
    CAPTURE(kind);
    CHECK(phi.harmonicity_residual <= 1e-9);
    CHECK(phi.name() == kind);
  }
  const auto xy = lap2d::harmonic_basis(g, "xy");
  CHECK(xy.samples(g.index(3, 5)) == doctest::Approx(g.x(3) * g.y(5)));
  CHECK(xy.value(1.0, 0.5) == doctest::Approx(0.5));
  // Degree four is no longer reproduced exactly by the stencil.
  CHECK(lap2d::harmonic_basis(g, "re_z4").harmonicity_residual > 1e-6);
  CHECK(error_code([&] { (void)lap2d::harmonic_basis(g, "cosh"); }) == ErrorCode::UnsupportedKind);
  CHECK(error_code([&] { (void)lap2d::harmonic_basis(g, "re_z0"); }) == ErrorCode::UnsupportedKind);
}

TEST_CASE("rank-one perturbation: K, KL and the factorization") {
  for (const char* kind : {"one", "xy"}) {
    const Setup2D s = setup(11, kind, 1.5);
    CAPTURE(kind);
    CHECK(s.pert.kl_identity_residual <= 1e-10);
    CHECK(hermitian_residual(s.pert.KL) <= 1e-10);
    Eigen::JacobiSVD<Matrix> svd(to_unitary_frame(s.pert.KL));
    CHECK(svd.singularValues()(1) <= 1e-10 * svd.singularValues()(0));
    CHECK(pert::factorization_residual(s.Linv, s.pert.K, s.pert.KL) <= 1e-11);
    CHECK(s.pert.phi_norm_sq == doctest::Approx(std::pow(weighted_norm(s.phi.samples.cast<Complex>(),
                                                                       s.grid.weights()), 2)));
  }
  CHECK(error_code([] { (void)setup(5, "one", -1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("closed-form adjoint matches (L^-1 + K)^*") {
  for (const char* kind : {"one", "xy", "x2-y2"}) {
    const Setup2D s = setup(13, kind, 1.0);
    const DenseOperator adj = pert::assemble_adjoint_inverse(s.Linv, s.pert.K);
    const DenseOperator direct = inverse(lap2d::adjoint_action_2d(s.phi, 1.0, s.grid));
    CAPTURE(kind);
    CHECK(operator_norm(direct - adj) / operator_norm(adj) <= 1e-10);
  }
}

TEST_CASE("constant generator preserves the modes with an even index") {
  const Setup2D s = setup(15, "one");
  const DenseOperator lk = s.Linv + s.pert.K;
  const Vector eigs = analysis::spectrum_of_restriction(lk).eigenvalues;
  const double h = s.grid.h();
  for (int m = 1; m <= 15; ++m) {
    for (int k = 1; k <= 15; ++k) {
      if (m % 2 == 1 && k % 2 == 1) continue;
      const double sm = std::sin(m * kPi * h / 2.0);
      const double sk = std::sin(k * kPi * h / 2.0);
      const double lambda = 4.0 / (h * h) * (sm * sm + sk * sk);
      double best = 1e300;
      for (Eigen::Index i = 0; i < eigs.size(); ++i) best = std::min(best, std::abs(eigs(i) - lambda));
      CHECK(best / lambda <= 1e-9);
    }
  }
  // The lowest eigenvalue is pushed down by the positive perturbation.
  CHECK(eigs(0).real() < lap2d::dirichlet_eigenvalues_2d(s.grid)(0));
}

TEST_CASE("perturbed spectrum is real and positive") {
  for (const char* kind : {"one", "xy"}) {
    const Setup2D s = setup(15, kind);
    const DenseOperator lk = s.Linv + s.pert.K;
    const DenseOperator adj = pert::assemble_adjoint_inverse(s.Linv, s.pert.K);
    analysis::ReportOptions opts;
    opts.require_positive = true;
    const auto r = analysis::analyze_restriction(s.Linv, s.pert.KL, lk, &adj, Tolerances{}, opts);
    CAPTURE(kind);
    CHECK(r.real_spectrum);
    CHECK(r.max_imag_ratio <= 1e-8);
    CHECK(r.min_real_part > 0.0);
    CHECK(r.similarity_hermitian_residual <= 1e-10);
    CHECK(r.isospectrality_gap <= 1e-8);
  }
}

TEST_CASE("domain condition residual shrinks under refinement") {
  std::vector<double> res;
  for (int n : {7, 15}) {
    const Setup2D s = setup(n, "one");
    const DenseOperator lk = s.Linv + s.pert.K;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      worst = std::max(worst, lap2d::domain_condition_residual(s.grid, s.phi, 1.0, lk,
                                                               lap2d::random_smooth_field(s.grid, seed)));
    }
    res.push_back(worst);
    CHECK(worst <= 100.0 * s.grid.h() * s.grid.h());
  }
  CHECK(res[0] / res[1] >= 4.0);
}

TEST_CASE("zero strength leaves the Laplacian unchanged") {
  const Setup2D s = setup(9, "xy", 0.0);
  CHECK(s.pert.K.entries().norm() == 0.0);
  const DenseOperator direct = lap2d::adjoint_action_2d(s.phi, 0.0, s.grid);
  CHECK(operator_norm(direct - s.L) == 0.0);
}
