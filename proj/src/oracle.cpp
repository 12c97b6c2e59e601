#include "riesz/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "riesz/io.hpp"
#include "riesz/numerical_range.hpp"
#include "riesz/parallel.hpp"

namespace riesz::oracle {

namespace {

RealMatrix random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RealMatrix g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<RealMatrix> qr(g);
  return qr.householderQ();
}

RealVector log_uniform(int n, double lo_exp, double hi_exp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo_exp, hi_exp);
  RealVector v(n);
  for (int i = 0; i < n; ++i) v(i) = std::pow(10.0, u(rng));
  return v;
}

DenseOperator unit_operator(const RealMatrix& m, std::string label) {
  return {m.cast<Complex>(), RealVector::Ones(m.rows()), std::move(label)};
}

DenseOperator symmetrized(const DenseOperator& a) {
  return a.with_entries(0.5 * (a.entries() + a.adjoint().entries()), a.label());
}

RealVector hermitian_part_eigs(const DenseOperator& a) { return hermitian_eigenvalues(symmetrized(a), 1e-6); }

}  // namespace

std::string_view to_string(Construction c) {
  switch (c) {
    case Construction::EigenvalueSampled: return "eigenvalue-sampled";
    case Construction::Gram: return "gram";
    case Construction::Diagonal: return "diagonal";
  }
  return "unknown";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "Pass";
    case Verdict::HypothesisViolated: return "HypothesisViolated";
    case Verdict::ViolationFound: return "ViolationFound";
  }
  return "Unknown";
}

std::string_view to_string(InclusionVerdict v) {
  switch (v) {
    case InclusionVerdict::Certified: return "Certified";
    case InclusionVerdict::Violation: return "Violation";
    case InclusionVerdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

OracleInstance make_instance(DenseOperator l, DenseOperator m, std::uint64_t seed) {
  const DenseOperator k = m * inverse(l);
  const int n = static_cast<int>(l.dim());
  return {n, std::move(l), std::move(m), k.with_entries(k.entries(), "K"), seed, Construction::EigenvalueSampled};
}

OracleInstance random_instance(int n, std::uint64_t seed, Construction construction) {
  if (n < 2 || n > kMaxOracleDim) {
    throw LabError(ErrorCode::InvalidArgument, fmt::format("oracle dimension {} outside 2..{}", n, kMaxOracleDim));
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);

  const RealVector l_diag = log_uniform(n, 0.0, 4.0, rng);
  RealMatrix l;
  RealMatrix m;
  if (construction == Construction::Diagonal) {
    l = l_diag.asDiagonal();
  } else {
    const RealMatrix q = random_orthogonal(n, rng);
    l = q * l_diag.asDiagonal() * q.transpose();
  }

  const bool deficient = coin(rng);
  if (construction == Construction::Gram) {
    std::uniform_int_distribution<int> rank_dist(1, n - 1);
    const int r = deficient ? rank_dist(rng) : n;
    std::normal_distribution<double> normal(0.0, 1.0);
    RealMatrix g(n, r);
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
    }
    m = g * g.transpose();
  } else {
    RealVector m_diag = log_uniform(n, -2.0, 2.0, rng);
    if (deficient) {
      std::uniform_int_distribution<int> zeros(1, n - 1);
      const int count = zeros(rng);
      for (int i = 0; i < count; ++i) m_diag(i) = 0.0;
    }
    if (construction == Construction::Diagonal) {
      m = m_diag.asDiagonal();
    } else {
      const RealMatrix q = random_orthogonal(n, rng);
      m = q * m_diag.asDiagonal() * q.transpose();
    }
  }
  // Exact symmetry; the products above are symmetric only up to rounding.
  l = 0.5 * (l + l.transpose()).eval();
  m = 0.5 * (m + m.transpose()).eval();
  OracleInstance inst = make_instance(unit_operator(l, "L"), unit_operator(m, "M"), seed);
  inst.construction = construction;
  return inst;
}

double construction_residual(const OracleInstance& inst) {
  return operator_norm(inst.K * inst.L - inst.M) / std::max(1.0, operator_norm(inst.M));
}

OracleReport verify_conclusions(const OracleInstance& inst, double tol) {
  OracleReport r;
  const RealVector& w = inst.L.weight();
  const DenseOperator id = DenseOperator::identity(w);
  const DenseOperator ipm = id + inst.M;

  const bool l_hermitian = hermitian_residual(inst.L) <= 1e-10;
  r.min_eig_L = hermitian_part_eigs(inst.L).minCoeff();
  r.m_hermitian_residual = hermitian_residual(inst.M);
  const bool m_hermitian = r.m_hermitian_residual <= 1e-10;
  const RealVector ipm_eigs = hermitian_part_eigs(ipm);
  r.min_eig_i_plus_m = ipm_eigs.minCoeff();
  r.hypotheses_hold = l_hermitian && m_hermitian && r.min_eig_L > 0.0 &&
                      r.min_eig_i_plus_m > 1e-10 * std::max(1.0, ipm_eigs.cwiseAbs().maxCoeff());

  const DenseOperator lk = inst.L * inverse(ipm);
  const EigDecomposition eig = eig_general(lk);
  r.eigenvalues = eig.values;
  r.eig_residual = eig.residual / std::max(1.0, operator_norm(lk));
  r.min_real = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const Complex z = eig.values(i);
    const double ratio = std::abs(z.imag()) / std::max(std::abs(z), 1.0);
    r.max_imag_ratio = std::max(r.max_imag_ratio, ratio);
    r.min_real = std::min(r.min_real, z.real());
  }
  r.has_nonreal_pair = r.max_imag_ratio > tol;
  try {
    r.kappa = condition_number(eig.vectors, w);
  } catch (const LabError& e) {
    if (e.code() != ErrorCode::RankDeficient) throw;
    r.kappa = std::numeric_limits<double>::infinity();
  }

  if (!r.hypotheses_hold) {
    r.verdict = Verdict::HypothesisViolated;
    r.message = fmt::format("hypotheses fail: min eig(L) {:.4g}, M hermitian residual {:.3e}, min eig(I+M) {:.4g}",
                            r.min_eig_L, r.m_hermitian_residual, r.min_eig_i_plus_m);
    return r;
  }

  const double kappa_ipm = ipm_eigs.maxCoeff() / ipm_eigs.minCoeff();
  r.kappa_bound = std::min(kappa_ipm, std::sqrt(static_cast<double>(inst.n) * kappa_ipm));
  const DenseOperator s = sqrt_psd(ipm);
  const DenseOperator s_inv = inv_sqrt_psd(ipm);
  const DenseOperator lk_inverse = ipm * inverse(inst.L);
  r.similarity_hermitian_residual = hermitian_residual(s_inv * lk_inverse * s);

  std::vector<std::string> failures;
  if (r.max_imag_ratio > tol) failures.push_back(fmt::format("nonreal spectrum ({:.3e})", r.max_imag_ratio));
  if (!(r.min_real > 0.0)) failures.push_back(fmt::format("nonpositive eigenvalue {:.6g}", r.min_real));
  if (r.eig_residual > tol) failures.push_back(fmt::format("eigenvector residual {:.3e}", r.eig_residual));
  if (!(r.kappa <= r.kappa_bound * (1.0 + 1e-8) + tol)) {
    failures.push_back(fmt::format("kappa {:.6g} above bound {:.6g}", r.kappa, r.kappa_bound));
  }
  if (r.similarity_hermitian_residual > tol) {
    failures.push_back(fmt::format("S^-1 L_K^-1 S not Hermitian ({:.3e})", r.similarity_hermitian_residual));
  }
  r.verdict = failures.empty() ? Verdict::Pass : Verdict::ViolationFound;
  for (const auto& f : failures) r.message += (r.message.empty() ? "" : "; ") + f;
  return r;
}

OracleInstance violated_instance(int n, std::uint64_t seed) {
  OracleInstance base = random_instance(n, seed, Construction::EigenvalueSampled);
  const double m_min = hermitian_part_eigs(base.M).minCoeff();
  const double shift = 1.0 + m_min + 0.5;
  const DenseOperator m = base.M - DenseOperator::identity(base.M.weight()).scaled(shift);
  return make_instance(base.L, m.with_entries(m.entries(), "M"), seed);
}

OracleInstance nonhermitian_violated_instance(int n, std::uint64_t seed) {
  OracleInstance base = violated_instance(n, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  RealMatrix g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  const RealMatrix skew = g - g.transpose();
  const DenseOperator m = base.M.with_entries(base.M.entries() + skew.cast<Complex>(), "M");
  return make_instance(base.L, m, seed);
}

std::vector<SweepRow> run_sweep(Family family, int count, int max_n, std::uint64_t first_seed, double tol,
                                int threads) {
  if (max_n < 2 || max_n > kMaxOracleDim) {
    throw LabError(ErrorCode::InvalidArgument, fmt::format("sweep max_n {} outside 2..{}", max_n, kMaxOracleDim));
  }
  std::vector<SweepRow> rows(static_cast<std::size_t>(std::max(count, 0)));
  parallel_for(count, threads, [&](int i) {
    const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(i);
    const int n = 2 + static_cast<int>(seed % static_cast<std::uint64_t>(max_n - 1));
    OracleInstance inst = [&] {
      switch (family) {
        case Family::Violated: return violated_instance(n, seed);
        case Family::NonHermitianViolated: return nonhermitian_violated_instance(n, seed);
        case Family::Valid: break;
      }
      return random_instance(n, seed, seed % 2 == 0 ? Construction::EigenvalueSampled : Construction::Gram);
    }();
    const OracleReport rep = verify_conclusions(inst, tol);
    rows[static_cast<std::size_t>(i)] = {seed, n, rep.min_eig_i_plus_m, rep.max_imag_ratio, rep.kappa, rep.verdict,
                                         rep.has_nonreal_pair};
  });
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::string out = "seed,n,min_eig_i_plus_m,max_imag_ratio,kappa,verdict\n";
  for (const SweepRow& r : rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.seed, r.n, io::format_double(r.min_eig_i_plus_m),
                       io::format_double(r.max_imag_ratio), io::format_double(r.kappa), to_string(r.verdict));
  }
  io::write_text(path, out);
}

DenseOperator random_complex_operator(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) m(i, j) = Complex(normal(rng), normal(rng));
  }
  return {m, RealVector::Ones(n), "T"};
}

InclusionReport williams_inclusion_check(const DenseOperator& a, const DenseOperator& b, double tol) {
  InclusionReport rep;
  rep.n = static_cast<int>(a.dim());
  const DenseOperator quotient = a.with_entries(solve(a, b.entries()), "A^-1 B");
  const EigDecomposition eig = eig_general(quotient);
  rep.eigenvalues = static_cast<int>(eig.values.size());
  const double tol_a = tol * std::max(1.0, operator_norm(a));
  const double tol_b = tol * std::max(1.0, operator_norm(b));

  std::vector<Complex> wa(static_cast<std::size_t>(rep.eigenvalues));
  std::vector<Complex> wb(wa.size());
  for (int k = 0; k < rep.eigenvalues; ++k) {
    wa[static_cast<std::size_t>(k)] = rayleigh_quotient(a, eig.vectors.col(k));
    wb[static_cast<std::size_t>(k)] = eig.values(k) * wa[static_cast<std::size_t>(k)];
  }

  for (int angles = 256; angles <= 4096; angles *= 2) {
    const NumericalRangeEstimate ra = numerical_range_boundary(a, angles);
    const NumericalRangeEstimate rb = numerical_range_boundary(b, angles);
    rep.angles_used = angles;
    rep.margin_A = ra.margin;
    rep.certified = 0;
    rep.worst_excess = -std::numeric_limits<double>::infinity();
    rep.worst_gap = 0.0;
    bool violation = false;
    for (std::size_t k = 0; k < wa.size(); ++k) {
      const double ex = std::max(ra.outer_excess(wa[k]) / tol_a, rb.outer_excess(wb[k]) / tol_b);
      const double gap_a = ra.inner_distance(wa[k]);
      const double gap_b = rb.inner_distance(wb[k]);
      rep.worst_excess = std::max(rep.worst_excess, std::max(ra.outer_excess(wa[k]), rb.outer_excess(wb[k])));
      rep.worst_gap = std::max({rep.worst_gap, gap_a, gap_b});
      if (ex > 1.0) violation = true;
      if (gap_a <= tol_a && gap_b <= tol_b) ++rep.certified;
    }
    if (violation) {
      rep.verdict = InclusionVerdict::Violation;
      return rep;
    }
    if (rep.certified == rep.eigenvalues) {
      rep.verdict = InclusionVerdict::Certified;
      return rep;
    }
  }
  rep.verdict = InclusionVerdict::Inconclusive;
  return rep;
}

InclusionReport williams_inclusion_check(int n, std::uint64_t seed, double tol) {
  DenseOperator a = random_complex_operator(n, seed);
  const DenseOperator b = random_complex_operator(n, seed + 0x5851f42d4c957f2dULL);
  // Shift A right until the sweep certifies 0 outside W(A).
  const RealVector herm = hermitian_part_eigs(a);
  double shift = std::max(0.0, -herm.minCoeff()) + 0.1 * std::max(1.0, operator_norm(a));
  DenseOperator shifted = a + DenseOperator::identity(a.weight()).scaled(shift);
  while (numerical_range_boundary(shifted, 256).contains_zero) {
    shift *= 2.0;
    shifted = a + DenseOperator::identity(a.weight()).scaled(shift);
  }
  InclusionReport rep = williams_inclusion_check(shifted, b, tol);
  rep.seed = seed;
  rep.shift = shift;
  return rep;
}

std::vector<InclusionReport> williams_sweep(int count, int max_n, std::uint64_t first_seed, double tol, int threads) {
  if (max_n < 2 || max_n > kMaxOracleDim) {
    throw LabError(ErrorCode::InvalidArgument, fmt::format("sweep max_n {} outside 2..{}", max_n, kMaxOracleDim));
  }
  std::vector<InclusionReport> out(static_cast<std::size_t>(std::max(count, 0)));
  parallel_for(count, threads, [&](int i) {
    const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(i);
    const int n = 2 + static_cast<int>(seed % static_cast<std::uint64_t>(max_n - 1));
    out[static_cast<std::size_t>(i)] = williams_inclusion_check(n, seed, tol);
  });
  return out;
}

double affine_range_residual(const DenseOperator& t, Complex a, Complex b, int n_angles) {
  if (n_angles < 1) throw LabError(ErrorCode::InvalidArgument, "affine_range_residual needs n_angles >= 1");
  const DenseOperator image = t.scaled(a) + DenseOperator::identity(t.weight()).scaled(b);
  const double scale = std::max(1.0, std::abs(a) * operator_norm(t) + std::abs(b));
  double worst = 0.0;
  for (int k = 0; k < n_angles; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / n_angles;
    const double lhs = support_function(image, theta);
    const double rhs = std::abs(a) * support_function(t, theta - std::arg(a)) +
                       (std::polar(1.0, -theta) * b).real();
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst / scale;
}

}  // namespace riesz::oracle
