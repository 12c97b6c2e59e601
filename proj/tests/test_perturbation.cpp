#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "helpers.hpp"
#include "riesz/perturbation.hpp"

using namespace riesz;
using test_util::error_code;

namespace {

struct Setup {
  sl::Grid1D grid;
  sl::Potential q;
  DenseOperator L;
  DenseOperator Linv;
  sl::FundamentalPair pair;
};

Setup setup(int n, const std::string& potential = "zero") {
  sl::Grid1D g(n);
  sl::Potential q = sl::Potential::parse(potential);
  DenseOperator l = sl::assemble_dirichlet_L(q, g);
  DenseOperator li = hermitian_inverse(l);
  sl::FundamentalPair p = sl::solve_fundamental_ivp(q, g);
  return {std::move(g), std::move(q), std::move(l), std::move(li), std::move(p)};
}

pert::PerturbationSpec nonhermitian_spec(const Setup& s) {
  return pert::make_general({pert::to_complex(s.pair.c), pert::to_complex(s.pair.s)},
                            {pert::density_from_inverse(s.Linv, pert::to_complex(s.pair.s)),
                             Vector::Zero(s.grid.n() + 2)});
}

pert::PerturbationSpec scaled_c_spec(const Setup& s, double alpha) {
  const Vector c = pert::to_complex(s.pair.c);
  return pert::make_general({c, pert::to_complex(s.pair.s)},
                            {alpha * pert::density_from_inverse(s.Linv, c), Vector::Zero(s.grid.n() + 2)});
}

constexpr double kNoEndpointCheck = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("K and KL agree with their defining sums") {
  const Setup s = setup(30, "const:2");
  const pert::PerturbationSpec spec = pert::make_special(s.pair, s.Linv, 1.0, 0.5);
  const DenseOperator k = pert::build_K(spec, s.grid);
  const RealVector w = s.grid.operator_weights();
  const Vector f = test_util::random_matrix(30, 3).col(0);
  Vector expected = Vector::Zero(30);
  for (std::size_t i = 0; i < spec.rank(); ++i) {
    expected += pert::interior(spec.generators[i]) * weighted_inner(f, pert::interior(spec.densities[i]), w);
  }
  CHECK((k.apply(f) - expected).norm() <= 1e-12 * expected.norm());
  // Discretely, KL is exactly the product of K and L.
  const DenseOperator kl = pert::build_KL(spec, s.L);
  CHECK(operator_norm(kl - (k * s.L)) <= 1e-10 * operator_norm(kl));
}

TEST_CASE("densities must vanish at the endpoints") {
  const Setup s = setup(20);
  Vector bad = pert::density_from_inverse(s.Linv, pert::to_complex(s.pair.c));
  bad(0) = 0.3;
  const auto spec = pert::make_general({pert::to_complex(s.pair.c)}, {bad});
  CHECK(spec.density_boundary_residual() == doctest::Approx(0.3));
  CHECK(error_code([&] { (void)pert::build_K(spec, s.grid); }) == ErrorCode::EndpointViolation);
  CHECK(error_code([&] { (void)pert::build_KL(spec, s.L); }) == ErrorCode::EndpointViolation);
  CHECK(error_code([&] { (void)pert::make_general({pert::to_complex(s.pair.c)}, {}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code([&] { (void)pert::make_special(s.pair, s.Linv, -1.0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("special perturbation satisfies both sets of hypotheses") {
  const Setup s = setup(80);
  const auto spec = pert::make_special(s.pair, s.Linv, 1.0, 1.0);
  const pert::ConditionReport c = pert::verify_conditions(spec, s.L, s.q, s.grid);
  CHECK(c.kl_hermitian_residual <= 1e-10);
  CHECK(c.kl_min_eig >= -1e-10);
  CHECK(c.i_plus_kl_min_eig >= 1.0 - 1e-10);
  CHECK(c.generator_kernel_residual <= 1e-10);
  CHECK(c.density_boundary_residual == 0.0);
  CHECK(c.dense_domain_margin > 0.5);
  CHECK(c.positive_factor);
  CHECK(c.nonnegative_kl);
  CHECK(c.verdict == pert::HypothesisVerdict::NonnegativeKL);
  CHECK(c.reasons.empty());
}

TEST_CASE("non-Hermitian KL is flagged") {
  const Setup s = setup(200);
  const pert::ConditionReport c = pert::verify_conditions(nonhermitian_spec(s), s.L, s.q, s.grid);
  CHECK(c.kl_hermitian_residual > 0.1);
  CHECK(c.kl_hermitian_residual == doctest::Approx(0.286).epsilon(0.02));
  CHECK_FALSE(c.positive_factor);
  CHECK_FALSE(c.nonnegative_kl);
  CHECK(c.verdict == pert::HypothesisVerdict::Violated);
  REQUIRE_FALSE(c.reasons.empty());
  CHECK(c.reasons.front().find("kl_hermitian_residual") != std::string::npos);
}

TEST_CASE("indefinite I + KL is flagged while Hermiticity holds") {
  const Setup s = setup(100);
  const pert::ConditionReport c = pert::verify_conditions(scaled_c_spec(s, -1.5), s.L, s.q, s.grid);
  CHECK(c.kl_hermitian_residual <= 1e-10);
  CHECK(c.i_plus_kl_min_eig < 0.0);
  CHECK(c.verdict == pert::HypothesisVerdict::Violated);
  // A mild negative strength keeps I + KL positive definite while KL >= 0 fails.
  const pert::ConditionReport mild = pert::verify_conditions(scaled_c_spec(s, -0.5), s.L, s.q, s.grid);
  CHECK(mild.positive_factor);
  CHECK_FALSE(mild.nonnegative_kl);
  CHECK(mild.verdict == pert::HypothesisVerdict::PositiveFactor);
}

TEST_CASE("generators outside the kernel are flagged") {
  const Setup s = setup(60);
  Vector g(62);
  for (int i = 0; i < 62; ++i) g(i) = std::sin(std::numbers::pi * s.grid.nodes()(i));
  const auto spec = pert::make_general({g}, {pert::density_from_inverse(s.Linv, g)});
  const pert::ConditionReport c = pert::verify_conditions(spec, s.L, s.q, s.grid);
  CHECK(c.generator_kernel_residual > 1.0);
  CHECK(c.verdict == pert::HypothesisVerdict::Violated);
}

TEST_CASE("evaluate_conditions on synthetic operators") {
  const RealVector w = RealVector::Constant(3, 0.1);
  const DenseOperator psd(Vector(Eigen::Vector3cd(0.0, 1.0, 2.0)).asDiagonal().toDenseMatrix(), w);
  const auto ok = pert::evaluate_conditions(psd, 0.0, 0.0, Tolerances{});
  CHECK(ok.nonnegative_kl);
  CHECK(ok.i_plus_kl_min_eig == doctest::Approx(1.0));
  const DenseOperator neg(Vector(Eigen::Vector3cd(-2.0, 1.0, 2.0)).asDiagonal().toDenseMatrix(), w);
  const auto bad = pert::evaluate_conditions(neg, 0.0, 0.0, Tolerances{});
  CHECK_FALSE(bad.positive_factor);
  CHECK(bad.i_plus_kl_min_eig == doctest::Approx(-1.0));
}

TEST_CASE("factorization of the restriction inverse") {
  const Setup s = setup(120, "mathieu:2");
  const auto spec = pert::make_special(s.pair, s.Linv, 2.0, 0.5);
  const DenseOperator k = pert::build_K(spec, s.grid);
  const DenseOperator kl = pert::build_KL(spec, s.L);
  CHECK(pert::factorization_residual(s.Linv, k, kl) <= 1e-11);
  const DenseOperator lk = pert::assemble_LK_inverse(s.Linv, k, kl);
  CHECK(operator_norm(lk - (s.Linv + k)) == 0.0);
  const DenseOperator wrong = kl.scaled(2.0);
  CHECK(error_code([&] { (void)pert::assemble_LK_inverse(s.Linv, k, wrong); }) ==
        ErrorCode::FactorizationMismatch);
}

TEST_CASE("adjoint inverse is the weighted adjoint of L^-1 + K") {
  for (const char* q : {"zero", "const:1", "linear:3"}) {
    const Setup s = setup(40, q);
    const auto spec = pert::make_special(s.pair, s.Linv, 1.0, 2.0);
    const DenseOperator k = pert::build_K(spec, s.grid);
    const DenseOperator adj = pert::assemble_adjoint_inverse(s.Linv, k);
    CHECK(operator_norm(adj - (s.Linv + k).adjoint()) <= 1e-12 * operator_norm(adj));
  }
}

TEST_CASE("closed-form adjoint coefficients with exact inner products") {
  // q = 0: c = 1, s = x, so ||c||^2 = 1, ||s||^2 = 1/3, (c, s) = 1/2.
  const sl::Grid1D g(200);
  const RealVector c = RealVector::Ones(202);
  const RealVector x = g.nodes();
  const pert::AdjointCoefficients ab = pert::closed_form_ab({1.0, 1.0 / 3.0, 0.5, 1.0, 1.0}, c, x, 1.0, 1.0);
  CHECK(std::abs(ab.a(0) + 16.0 / 29.0) <= 1e-10);
  CHECK(std::abs(ab.b(201) - 28.0 / 29.0) <= 1e-10);
  CHECK(ab.denominator == doctest::Approx(29.0 / 12.0));
}

TEST_CASE("closed-form adjoint coefficients with quadrature inner products") {
  const Setup s = setup(200);
  const pert::AdjointCoefficients ab = pert::closed_form_ab(s.pair, 1.0, 1.0, s.grid);
  CHECK(std::abs(ab.a(0) + 16.0 / 29.0) <= 5e-3);
  CHECK(std::abs(ab.b(201) - 28.0 / 29.0) <= 5e-3);
}

TEST_CASE("degenerate denominator is rejected") {
  // (1 + cc)(1 + ss) - cs^2 = 0 with cc = ss = 1, cs = 2.
  const RealVector v = RealVector::Ones(4);
  CHECK(error_code([&] { (void)pert::closed_form_ab({1.0, 1.0, 2.0, 1.0, 1.0}, v, v, 1.0, 1.0); }) ==
        ErrorCode::DegenerateDenominator);
}

TEST_CASE("summation-by-parts adjoint reproduces the pipeline inverse") {
  const Setup s = setup(40);
  const auto spec = pert::make_special(s.pair, s.Linv, 1.0, 1.0);
  const DenseOperator adj = pert::assemble_adjoint_inverse(s.Linv, pert::build_K(spec, s.grid));
  const int n = s.grid.n();
  const double h = s.grid.h();
  const RealVector ci = s.pair.c.segment(1, n);
  const RealVector si = s.pair.s.segment(1, n);
  const pert::GramData interior{h * ci.dot(ci), h * si.dot(si), h * ci.dot(si), s.pair.c(n + 1), s.pair.s(n + 1)};
  const auto ab = pert::closed_form_ab(interior, s.pair.c, s.pair.s, 1.0, 1.0);
  const DenseOperator direct =
      pert::assemble_adjoint_direct(s.q, ab.a, ab.b, s.grid, pert::EndpointStencil::SummationByParts);
  CHECK(operator_norm(inverse(direct) - adj) <= 1e-12 * operator_norm(adj));
}

TEST_CASE("second-order adjoint assembly converges at second order on smooth data") {
  std::vector<double> err;
  for (int n : {99, 199, 399}) {
    const Setup s = setup(n);
    const auto spec = pert::make_special(s.pair, s.Linv, 1.0, 1.0);
    const DenseOperator adj = pert::assemble_adjoint_inverse(s.Linv, pert::build_K(spec, s.grid));
    const auto ab = pert::closed_form_ab(s.pair, 1.0, 1.0, s.grid);
    err.push_back(pert::adjoint_crosscheck_error(pert::assemble_adjoint_direct(s.q, ab.a, ab.b, s.grid), adj, s.grid));
  }
  CHECK(err[0] / err[1] >= 3.5);
  CHECK(err[1] / err[2] >= 3.5);
}

TEST_CASE("general-mode densities from CSV") {
  const Setup s = setup(50);
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "riesz_sigma_test.csv";
  {
    std::ofstream out(path);
    out << "x,sigma\n";
    for (int i = 0; i <= 100; ++i) {
      const double x = i / 100.0;
      out << x << "," << std::sin(std::numbers::pi * x) << "\n";
    }
  }
  pert::PerturbationConfig cfg;
  cfg.mode = "general";
  cfg.density_csv = {path.string()};
  const auto spec = pert::materialize(cfg, s.pair, s.Linv, s.grid);
  CHECK(spec.rank() == 2);
  CHECK(spec.densities[1].norm() == 0.0);
  const double mid = std::sin(std::numbers::pi * s.grid.nodes()(25));
  CHECK(std::abs(spec.densities[0](25).real() - mid) <= 1e-3);
  cfg.density_csv = {path.string(), path.string(), path.string()};
  CHECK(error_code([&] { (void)pert::materialize(cfg, s.pair, s.Linv, s.grid); }) == ErrorCode::InvalidArgument);
  std::filesystem::remove(path);

  pert::PerturbationConfig special;
  special.alpha = 2.0;
  nlohmann::json j = special;
  CHECK(j.get<pert::PerturbationConfig>().alpha == 2.0);
  CHECK(j["mode"] == "special");
}

TEST_CASE("endpoint check can be deferred to the condition report") {
  const Setup s = setup(20);
  Vector bad = pert::density_from_inverse(s.Linv, pert::to_complex(s.pair.c));
  bad(21) = 0.1;
  const auto spec = pert::make_general({pert::to_complex(s.pair.c)}, {bad});
  CHECK_NOTHROW((void)pert::build_K(spec, s.grid, kNoEndpointCheck));
  const auto c = pert::verify_conditions(spec, s.L, s.q, s.grid);
  CHECK(c.density_boundary_residual == doctest::Approx(0.1));
  CHECK(c.verdict == pert::HypothesisVerdict::Violated);
}
