#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "helpers.hpp"
#include "oracles.hpp"
#include "riesz/sturm_liouville.hpp"

using namespace riesz;
using test_util::error_code;

namespace {

constexpr double kPi = std::numbers::pi;

double ivp_c1(const sl::Potential& q) { return sl::solve_fundamental_ivp(q, sl::Grid1D(2000), 8).c_end.value1; }

}  // namespace

TEST_CASE("grid nodes and quadrature weights") {
  const sl::Grid1D g(9);
  CHECK(g.h() == doctest::Approx(0.1));
  CHECK(g.nodes()(0) == 0.0);
  CHECK(g.nodes()(10) == 1.0);
  CHECK(g.weights().sum() == doctest::Approx(1.0));
  CHECK(g.operator_weights().size() == 9);
  const sl::Grid1D simpson(9, sl::Quadrature::Simpson);
  CHECK(simpson.weights().sum() == doctest::Approx(1.0));
  const sl::Grid1D odd(10, sl::Quadrature::Simpson);
  RealVector cubic = odd.nodes().array().cube();
  CHECK(odd.weights().dot(cubic) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(error_code([] { sl::Grid1D(1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("potential descriptors") {
  CHECK(sl::Potential::parse("zero").is_zero());
  CHECK(sl::Potential::parse("const:2.5")(0.3) == 2.5);
  CHECK(sl::Potential::parse("const:2.5").constant_value() == 2.5);
  CHECK(sl::Potential::parse("linear:3")(0.5) == doctest::Approx(1.5));
  CHECK(sl::Potential::parse("mathieu:2")(0.0) == doctest::Approx(2.0));
  CHECK(error_code([] { (void)sl::Potential::parse("bogus"); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { (void)sl::Potential::parse("const:abc"); }) == ErrorCode::InvalidArgument);
  const auto path = std::filesystem::temp_directory_path() / "riesz_potential_test.csv";
  {
    std::ofstream out(path);
    out << "x,q\n0,0\n0.5,1\n1,0\n";
  }
  const sl::Potential table = sl::Potential::parse("csv:" + path.string());
  CHECK(table(0.25) == doctest::Approx(0.5));
  CHECK(table(0.5) == doctest::Approx(1.0));
  std::filesystem::remove(path);
  CHECK(error_code([] { (void)sl::Potential::parse("csv:/nonexistent/q.csv"); }) == ErrorCode::IoFailure);
}

TEST_CASE("Dirichlet operator: stencil, symmetry and closed-form spectrum") {
  const sl::Grid1D g(50);
  const DenseOperator l = sl::assemble_dirichlet_L(sl::Potential::zero(), g);
  const double inv_h2 = 1.0 / (g.h() * g.h());
  CHECK(l.entries()(3, 3).real() == doctest::Approx(2.0 * inv_h2));
  CHECK(l.entries()(3, 4).real() == doctest::Approx(-inv_h2));
  CHECK(l.entries()(3, 5).real() == 0.0);
  CHECK(hermitian_residual(l) == 0.0);
  RealVector eigs = hermitian_eigenvalues(l);
  std::sort(eigs.data(), eigs.data() + eigs.size());
  for (int k = 1; k <= 50; ++k) {
    const double s = std::sin(k * kPi * g.h() / 2.0);
    CHECK(std::abs(eigs(k - 1) - 4.0 * inv_h2 * s * s) <= 1e-9);
  }
  const RealVector closed = sl::dirichlet_eigenvalues_closed_form(50);
  CHECK((eigs - closed).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("Dirichlet solve agrees with the Thomas algorithm") {
  const sl::Grid1D g(60);
  const sl::Potential q = sl::Potential::linear(4.0);
  const DenseOperator l = sl::assemble_dirichlet_L(q, g);
  const int n = g.n();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  std::vector<double> lo(n, -inv_h2), mid(n), up(n, -inv_h2), rhs(n);
  Vector f(n);
  for (int i = 0; i < n; ++i) {
    const double x = g.nodes()(i + 1);
    mid[static_cast<std::size_t>(i)] = 2.0 * inv_h2 + q(x);
    rhs[static_cast<std::size_t>(i)] = std::exp(x);
    f(i) = std::exp(x);
  }
  const auto expected = oracle_ref::thomas_solve(lo, mid, up, rhs);
  const Vector u = hermitian_inverse(l).apply(f);
  for (int i = 0; i < n; ++i) CHECK(std::abs(u(i) - expected[static_cast<std::size_t>(i)]) <= 1e-12);
}

TEST_CASE("lowest eigenvalue converges to pi^2 at second order") {
  std::vector<double> err;
  for (int n : {50, 100, 200}) {
    RealVector e = hermitian_eigenvalues(sl::assemble_dirichlet_L(sl::Potential::zero(), sl::Grid1D(n)));
    err.push_back(std::abs(e.minCoeff() - kPi * kPi));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double order = std::log2(err[i] / err[i + 1]);
    CHECK(std::abs(order - 2.0) <= 0.3);
  }
}

TEST_CASE("fundamental pair for q = 0 is (1, x)") {
  const sl::Grid1D g(30);
  const sl::FundamentalPair p = sl::solve_fundamental_ivp(sl::Potential::zero(), g);
  CHECK((p.c.array() - 1.0).abs().maxCoeff() <= 1e-14);
  CHECK((p.s - g.nodes()).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(p.wronskian_residual <= 1e-14);
}

TEST_CASE("fundamental pair for constant potentials") {
  const sl::Grid1D g(200);
  const sl::FundamentalPair pos = sl::solve_fundamental_ivp(sl::Potential::constant(1.0), g);
  CHECK(pos.c_end.value1 == doctest::Approx(std::cosh(1.0)).epsilon(1e-10));
  CHECK(pos.s_end.value1 == doctest::Approx(std::sinh(1.0)).epsilon(1e-10));
  CHECK(pos.c_end.deriv1 == doctest::Approx(std::sinh(1.0)).epsilon(1e-10));
  const sl::FundamentalPair neg = sl::solve_fundamental_ivp(sl::Potential::constant(-4.0), g);
  CHECK(neg.c_end.value1 == doctest::Approx(std::cos(2.0)).epsilon(1e-9));
  CHECK(neg.s_end.value1 == doctest::Approx(std::sin(2.0) / 2.0).epsilon(1e-9));
  CHECK(neg.wronskian_residual <= 1e-10);
}

TEST_CASE("fundamental pair spans the kernel of the maximal operator") {
  const sl::Grid1D g(400);
  const sl::Potential q = sl::Potential::mathieu(3.0);
  const sl::FundamentalPair p = sl::solve_fundamental_ivp(q, g);
  const RealVector rc = sl::maximal_action(q, g, p.c);
  const RealVector rs = sl::maximal_action(q, g, p.s);
  // The three-point stencil is exact up to O(h^2).
  CHECK(rc.cwiseAbs().maxCoeff() <= 1e-3);
  CHECK(rs.cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("transmutation kernel vanishes identically for q = 0") {
  const sl::TransmutationKernel k = sl::solve_goursat_kernel(sl::Potential::zero(), 64);
  CHECK(k.table().cwiseAbs().maxCoeff() == 0.0);
  const sl::FundamentalPair p = sl::fundamental_from_kernel(k, sl::Grid1D(63));
  CHECK(p.c_end.value1 == 1.0);
  CHECK(p.s_end.value1 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("transmutation kernel reconstructs c and s") {
  const sl::TransmutationKernel k = sl::solve_goursat_kernel(sl::Potential::constant(1.0), 200);
  CHECK(k.K(0.6, 0.6) == doctest::Approx(0.3).epsilon(1e-12));
  const sl::FundamentalPair p = sl::fundamental_from_kernel(k, sl::Grid1D(199));
  CHECK(std::abs(p.c_end.value1 - std::cosh(1.0)) <= 1e-4);
  CHECK(std::abs(p.s_end.value1 - std::sinh(1.0)) <= 1e-4);
  CHECK(error_code([] { (void)sl::solve_goursat_kernel(sl::Potential::zero(), 4); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("kernel reconstruction converges at second order for a variable potential") {
  const sl::Potential q = sl::Potential::mathieu(2.0);
  const double ref = ivp_c1(q);
  std::vector<double> err;
  for (int m : {50, 100, 200}) {
    const auto k = sl::solve_goursat_kernel(q, m);
    err.push_back(std::abs(sl::fundamental_from_kernel(k, sl::Grid1D(m - 1)).c_end.value1 - ref));
  }
  CHECK(err[1] < err[0]);
  CHECK(err[2] < err[1]);
  CHECK(std::log2(err[1] / err[2]) >= 1.8);
}

TEST_CASE("inner products use the full-grid quadrature") {
  const sl::Grid1D g(99);
  const RealVector ones = RealVector::Ones(101);
  CHECK(sl::inner_product(ones, g.nodes(), g) == doctest::Approx(0.5).epsilon(1e-14));
  const RealVector short_v = RealVector::Ones(99);
  CHECK(error_code([&] { (void)sl::inner_product(short_v, short_v, g); }) == ErrorCode::InvalidArgument);
}
