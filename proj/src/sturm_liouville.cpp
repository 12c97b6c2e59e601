#include "riesz/sturm_liouville.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

#include "riesz/io.hpp"

namespace riesz::sl {

Grid1D::Grid1D(int n, Quadrature rule) : n_(n), h_(0.0), rule_(rule) {
  if (n < 2) throw LabError(ErrorCode::InvalidArgument, "Grid1D needs at least 2 interior nodes");
  const int intervals = n + 1;
  h_ = 1.0 / intervals;
  nodes_.resize(n + 2);
  for (int i = 0; i <= intervals; ++i) nodes_(i) = static_cast<double>(i) / intervals;
  weights_ = RealVector::Constant(n + 2, h_);
  if (rule == Quadrature::Trapezoid) {
    weights_(0) = weights_(n + 1) = 0.5 * h_;
    return;
  }
  // Composite Simpson; an odd interval count closes with the 3/8 rule.
  weights_.setZero();
  const int simpson_intervals = intervals % 2 == 0 ? intervals : intervals - 3;
  for (int i = 0; i < simpson_intervals; i += 2) {
    weights_(i) += h_ / 3.0;
    weights_(i + 1) += 4.0 * h_ / 3.0;
    weights_(i + 2) += h_ / 3.0;
  }
  if (simpson_intervals != intervals) {
    const int s = simpson_intervals;
    weights_(s) += 3.0 * h_ / 8.0;
    weights_(s + 1) += 9.0 * h_ / 8.0;
    weights_(s + 2) += 9.0 * h_ / 8.0;
    weights_(s + 3) += 3.0 * h_ / 8.0;
  }
}

Potential Potential::zero() {
  return {"zero", [](double) { return 0.0; }, 0.0};
}

Potential Potential::constant(double q0) {
  return {"const:" + io::format_double(q0), [q0](double) { return q0; }, q0};
}

Potential Potential::linear(double slope) {
  return {"linear:" + io::format_double(slope), [slope](double x) { return slope * x; }, std::nullopt};
}

Potential Potential::mathieu(double amplitude) {
  return {"mathieu:" + io::format_double(amplitude),
          [amplitude](double x) { return amplitude * std::cos(2.0 * std::numbers::pi * x); }, std::nullopt};
}

Potential Potential::table(RealVector x, RealVector q) {
  if (x.size() < 2 || x.size() != q.size()) {
    throw LabError(ErrorCode::InvalidArgument, "potential table needs >= 2 matching (x, q) samples");
  }
  if (!q.allFinite()) throw LabError(ErrorCode::InvalidArgument, "potential table has non-finite values");
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    if (!(x(i) > x(i - 1))) throw LabError(ErrorCode::InvalidArgument, "potential table x must increase");
  }
  auto eval = [x = std::move(x), q = std::move(q)](double t) {
    if (t <= x(0)) return q(0);
    const Eigen::Index last = x.size() - 1;
    if (t >= x(last)) return q(last);
    const auto it = std::upper_bound(x.data(), x.data() + x.size(), t);
    const Eigen::Index k = static_cast<Eigen::Index>(it - x.data());
    const double a = (t - x(k - 1)) / (x(k) - x(k - 1));
    return (1.0 - a) * q(k - 1) + a * q(k);
  };
  return {"table", std::move(eval), std::nullopt};
}

Potential Potential::from_csv(const std::string& path) {
  const io::CsvTable t = io::read_csv(path);
  if (t.columns.size() < 2) throw LabError(ErrorCode::IoFailure, "'" + path + "' needs columns x, q");
  Potential p = table(t.columns[0], t.columns[1]);
  p.descriptor_ = "csv:" + path;
  return p;
}

Potential Potential::parse(const std::string& descriptor) {
  const auto colon = descriptor.find(':');
  const std::string head = descriptor.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : descriptor.substr(colon + 1);
  auto number = [&]() {
    try {
      std::size_t used = 0;
      const double v = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      return v;
    } catch (const std::exception&) {
      throw LabError(ErrorCode::InvalidArgument, "bad potential parameter in '" + descriptor + "'");
    }
  };
  if (head == "zero" && arg.empty()) return zero();
  if (head == "const") return constant(number());
  if (head == "linear") return linear(number());
  if (head == "mathieu") return mathieu(number());
  if (head == "csv" && !arg.empty()) return from_csv(arg);
  throw LabError(ErrorCode::InvalidArgument, "unknown potential descriptor '" + descriptor + "'");
}

RealVector Potential::sample(const RealVector& x) const {
  RealVector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = eval_(x(i));
  if (!out.allFinite()) throw LabError(ErrorCode::InvalidArgument, "potential '" + descriptor_ + "' is not finite");
  return out;
}

namespace {

// State (c, c', s, s').
using State = Eigen::Vector4d;

State rhs(const Potential& q, double x, const State& y) {
  const double qx = q(x);
  return {y(1), qx * y(0), y(3), qx * y(2)};
}

double wronskian_residual(const FundamentalPair& p) {
  return ((p.c.array() * p.ds.array() - p.dc.array() * p.s.array()) - 1.0).abs().maxCoeff();
}

void fill_endpoints(FundamentalPair& p) {
  const Eigen::Index last = p.c.size() - 1;
  p.c_end = {p.c(0), p.dc(0), p.c(last), p.dc(last)};
  p.s_end = {p.s(0), p.ds(0), p.s(last), p.ds(last)};
}

}  // namespace

FundamentalPair solve_fundamental_ivp(const Potential& q, const Grid1D& grid, int substeps) {
  if (substeps < 1) throw LabError(ErrorCode::InvalidArgument, "substeps must be >= 1");
  const int total = grid.n() + 2;
  FundamentalPair p;
  p.c.resize(total);
  p.dc.resize(total);
  p.s.resize(total);
  p.ds.resize(total);
  State y(1.0, 0.0, 0.0, 1.0);
  p.c(0) = 1.0;
  p.dc(0) = 0.0;
  p.s(0) = 0.0;
  p.ds(0) = 1.0;
  const double k = grid.h() / substeps;
  for (int i = 1; i < total; ++i) {
    const double x0 = grid.nodes()(i - 1);
    for (int sub = 0; sub < substeps; ++sub) {
      const double x = x0 + sub * k;
      const State k1 = rhs(q, x, y);
      const State k2 = rhs(q, x + 0.5 * k, y + 0.5 * k * k1);
      const State k3 = rhs(q, x + 0.5 * k, y + 0.5 * k * k2);
      const State k4 = rhs(q, x + k, y + k * k3);
      y += (k / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!y.allFinite()) {
      throw LabError(ErrorCode::InvalidArgument, "fundamental solutions overflow for potential '" + q.descriptor() + "'");
    }
    p.c(i) = y(0);
    p.dc(i) = y(1);
    p.s(i) = y(2);
    p.ds(i) = y(3);
  }
  fill_endpoints(p);
  p.wronskian_residual = wronskian_residual(p);
  return p;
}

TransmutationKernel solve_goursat_kernel(const Potential& q, int m, GoursatOptions options) {
  if (m < 8) throw LabError(ErrorCode::InvalidArgument, "Goursat mesh must have m >= 8");
  const double d = 1.0 / m;
  RealVector qk(m + 1);
  for (int k = 0; k <= m; ++k) qk(k) = q(k * d);

  // Diagonal data F(xi_i) = 1/2 int_0^xi q, cumulative trapezoid.
  RealVector diag_data(m + 1);
  diag_data(0) = 0.0;
  for (int i = 1; i <= m; ++i) diag_data(i) = diag_data(i - 1) + 0.25 * d * (qk(i - 1) + qk(i));

  RealMatrix h = RealMatrix::Zero(m + 1, m + 1);
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; i + j <= m; ++j) h(i, j) = diag_data(i);
  }
  RealMatrix g(m + 1, m + 1);
  RealMatrix integral = RealMatrix::Zero(m + 1, m + 1);
  const double cell = 0.25 * d * d;
  double delta = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    for (int i = 0; i <= m; ++i) {
      for (int j = 0; i + j <= m; ++j) g(i, j) = qk(i + j) * h(i, j);
    }
    // 2D cumulative trapezoid over [0, xi_i] x [0, eta_j].
    for (int i = 1; i <= m; ++i) {
      for (int j = 1; i + j <= m; ++j) {
        integral(i, j) = integral(i - 1, j) + integral(i, j - 1) - integral(i - 1, j - 1) +
                         cell * (g(i - 1, j - 1) + g(i, j - 1) + g(i - 1, j) + g(i, j));
      }
    }
    delta = 0.0;
    for (int i = 0; i <= m; ++i) {
      for (int j = 0; i + j <= m; ++j) {
        const double next = diag_data(i) + integral(i, j);
        delta = std::max(delta, std::abs(next - h(i, j)));
        h(i, j) = next;
      }
    }
    if (!std::isfinite(delta)) break;
    if (delta <= options.tolerance) return {m, std::move(h), it, delta};
  }
  throw LabError(ErrorCode::NoConvergence,
                 "Goursat Picard iteration stalled at delta " + std::to_string(delta) + " after " +
                     std::to_string(it) + " iterations (mesh too coarse for q?)");
}

double TransmutationKernel::H(double xi, double eta) const {
  double u = std::max(xi, 0.0) * m_;
  double v = std::max(eta, 0.0) * m_;
  if (u + v > m_) {
    const double scale = m_ / (u + v);
    u *= scale;
    v *= scale;
  }
  const int i = std::min(static_cast<int>(std::floor(u)), m_);
  const int j = std::min(static_cast<int>(std::floor(v)), m_ - i);
  if (i + j >= m_) return table_(i, j);
  const double a = u - i;
  const double b = v - j;
  if (a + b <= 1.0) {
    return (1.0 - a - b) * table_(i, j) + a * table_(i + 1, j) + b * table_(i, j + 1);
  }
  return (1.0 - b) * table_(i + 1, j) + (1.0 - a) * table_(i, j + 1) + (a + b - 1.0) * table_(i + 1, j + 1);
}

FundamentalPair fundamental_from_kernel(const TransmutationKernel& kernel, const Grid1D& grid) {
  const int total = grid.n() + 2;
  const double h = grid.h();
  FundamentalPair p;
  p.c.resize(total);
  p.s.resize(total);
  for (int i = 0; i < total; ++i) {
    const double x = grid.nodes()(i);
    if (i == 0) {
      p.c(i) = 1.0;
      p.s(i) = 0.0;
      continue;
    }
    // Along the characteristic x = xi + eta: t = 2 xi - x, dt = 2 dxi.
    const int panels = std::max(2, static_cast<int>(std::ceil(x * kernel.mesh())));
    const double step = x / panels;
    double even = 0.0;
    double odd = 0.0;
    for (int k = 0; k <= panels; ++k) {
      const double xi = k * step;
      const double w = (k == 0 || k == panels) ? 0.5 * step : step;
      const double hv = kernel.H(xi, x - xi);
      even += w * hv;
      odd += w * hv * (2.0 * xi - x);
    }
    p.c(i) = 1.0 + 2.0 * even;
    p.s(i) = x + 2.0 * odd;
  }
  p.dc.resize(total);
  p.ds.resize(total);
  p.dc(0) = 0.0;
  p.ds(0) = 1.0;
  for (int i = 1; i < total - 1; ++i) {
    p.dc(i) = (p.c(i + 1) - p.c(i - 1)) / (2.0 * h);
    p.ds(i) = (p.s(i + 1) - p.s(i - 1)) / (2.0 * h);
  }
  const int e = total - 1;
  p.dc(e) = (3.0 * p.c(e) - 4.0 * p.c(e - 1) + p.c(e - 2)) / (2.0 * h);
  p.ds(e) = (3.0 * p.s(e) - 4.0 * p.s(e - 1) + p.s(e - 2)) / (2.0 * h);
  fill_endpoints(p);
  p.wronskian_residual = wronskian_residual(p);
  return p;
}

DenseOperator assemble_dirichlet_L(const Potential& q, const Grid1D& grid) {
  const int n = grid.n();
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  const RealVector qs = q.sample(grid.interior_nodes());
  RealMatrix l = RealMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    l(i, i) = 2.0 * inv_h2 + qs(i);
    if (i > 0) l(i, i - 1) = -inv_h2;
    if (i + 1 < n) l(i, i + 1) = -inv_h2;
  }
  return {l.cast<Complex>(), grid.operator_weights(), "L"};
}

RealVector maximal_action(const Potential& q, const Grid1D& grid, const RealVector& g) {
  const int n = grid.n();
  if (g.size() != n + 2) throw LabError(ErrorCode::InvalidArgument, "maximal_action needs samples on all nodes");
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  RealVector out(n);
  for (int i = 1; i <= n; ++i) {
    out(i - 1) = (-g(i + 1) + 2.0 * g(i) - g(i - 1)) * inv_h2 + q(grid.nodes()(i)) * g(i);
  }
  return out;
}

double inner_product(const RealVector& f, const RealVector& g, const Grid1D& grid) {
  if (f.size() != grid.n() + 2 || g.size() != grid.n() + 2) {
    throw LabError(ErrorCode::InvalidArgument, "inner_product needs samples on all nodes");
  }
  return (grid.weights().array() * f.array() * g.array()).sum();
}

Complex inner_product(const Vector& f, const Vector& g, const Grid1D& grid) {
  if (f.size() != grid.n() + 2 || g.size() != grid.n() + 2) {
    throw LabError(ErrorCode::InvalidArgument, "inner_product needs samples on all nodes");
  }
  return weighted_inner(f, g, grid.weights());
}

RealVector dirichlet_eigenvalues_closed_form(int n) {
  const double h = 1.0 / (n + 1);
  RealVector out(n);
  for (int k = 1; k <= n; ++k) {
    const double s = std::sin(k * std::numbers::pi * h / 2.0);
    out(k - 1) = 4.0 / (h * h) * s * s;
  }
  return out;
}

void write_fundamental_csv(const std::string& path, const FundamentalPair& pair, const Grid1D& grid) {
  io::write_csv(path, {"x", "c", "s"}, {grid.nodes(), pair.c, pair.s});
}

}  // namespace riesz::sl
