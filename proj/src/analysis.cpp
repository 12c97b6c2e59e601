#include "riesz/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "riesz/numerical_range.hpp"

namespace riesz::analysis {

namespace {

double imag_ratio(Complex z) { return std::abs(z.imag()) / std::max(std::abs(z), 1.0); }

std::string format_complex(Complex z) { return fmt::format("{:.10g}{:+.3e}i", z.real(), z.imag()); }

}  // namespace

Vector sort_by_real(Vector v) {
  std::sort(v.data(), v.data() + v.size(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

RestrictionSpectrum spectrum_of_restriction(const DenseOperator& lk_inverse, double floor) {
  RestrictionSpectrum out;
  out.inverse = eig_general(lk_inverse);
  const Vector& mu = out.inverse.values;
  const double cutoff = floor * mu.cwiseAbs().maxCoeff();
  std::vector<Complex> kept;
  kept.reserve(static_cast<std::size_t>(mu.size()));
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (std::abs(mu(i)) <= cutoff) {
      ++out.discarded;
    } else {
      kept.push_back(1.0 / mu(i));
    }
  }
  if (kept.empty()) {
    throw LabError(ErrorCode::SingularOperator, "every eigenvalue of " + lk_inverse.label() + " is below the floor");
  }
  out.eigenvalues = sort_by_real(Eigen::Map<Vector>(kept.data(), static_cast<Eigen::Index>(kept.size())));
  return out;
}

RealnessVerdict realness_verdict(const Vector& eigenvalues, double tol, bool require_positive) {
  RealnessVerdict v;
  if (eigenvalues.size() == 0) {
    v.message = "empty spectrum";
    return v;
  }
  v.min_real_part = std::numeric_limits<double>::infinity();
  Complex lowest;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const Complex z = eigenvalues(i);
    const double r = imag_ratio(z);
    if (i == 0 || r > v.max_imag_ratio) {
      v.max_imag_ratio = r;
      v.worst = z;
    }
    if (z.real() < v.min_real_part) {
      v.min_real_part = z.real();
      lowest = z;
    }
  }
  const bool real_ok = v.max_imag_ratio <= tol;
  const bool positive_ok = !require_positive || v.min_real_part > 0.0;
  v.pass = real_ok && positive_ok;
  if (!real_ok) {
    v.message = fmt::format("nonreal eigenvalue {} (ratio {:.3e} > {:.1e})", format_complex(v.worst),
                            v.max_imag_ratio, tol);
  } else if (!positive_ok) {
    v.worst = lowest;
    v.message = fmt::format("eigenvalue {} is not positive", format_complex(lowest));
  }
  return v;
}

RieszMetric riesz_basis_metric(const EigDecomposition& right, const EigDecomposition& adjoint,
                               const RealVector& weight) {
  const Eigen::Index n = right.values.size();
  if (adjoint.values.size() != n || weight.size() != n) {
    throw LabError(ErrorCode::InvalidArgument, "riesz_basis_metric: decompositions differ in size");
  }
  RieszMetric m;
  constexpr double kResidualLimit = 1e-8;
  constexpr double kPairingLimit = 1e-6;
  const double scale = std::max(1.0, right.values.cwiseAbs().maxCoeff());
  if (right.residual > kResidualLimit * scale || adjoint.residual > kResidualLimit * scale) {
    m.near_defective = true;
    m.note = fmt::format("eigenvector residuals {:.3e} / {:.3e}", right.residual, adjoint.residual);
  }

  // Pair each right eigenvalue with the nearest unused conjugate adjoint one.
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Matrix left(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(std::conj(adjoint.values(j)) - right.values(i));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    left.col(i) = adjoint.vectors.col(best);
  }

  // gram(j, i) = <v_i, w_j>
  const Matrix gram = left.adjoint() * weight.asDiagonal() * right.vectors;
  m.min_pairing = gram.diagonal().cwiseAbs().minCoeff();
  if (m.min_pairing < kPairingLimit) {
    m.near_defective = true;
    if (!m.note.empty()) m.note += "; ";
    m.note += fmt::format("min |<v_i, w_i>| = {:.3e}", m.min_pairing);
  }
  Matrix scaled_gram = gram;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = gram(j, j);
    if (std::abs(d) > 0.0) scaled_gram.row(j) /= d;
  }
  m.biorthogonality_residual = (scaled_gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();

  try {
    m.kappa = condition_number(right.vectors, weight);
    m.kappa_adjoint = condition_number(left, weight);
  } catch (const LabError& e) {
    if (e.code() != ErrorCode::RankDeficient) throw;
    m.kappa = std::numeric_limits<double>::infinity();
    m.kappa_adjoint = std::numeric_limits<double>::infinity();
    m.near_defective = true;
    if (!m.note.empty()) m.note += "; ";
    m.note += "eigenvector matrix is numerically singular";
  }
  return m;
}

RieszMetric riesz_basis_metric(const DenseOperator& lk_inverse, const DenseOperator& lk_adjoint_inverse) {
  return riesz_basis_metric(eig_general(lk_inverse), eig_general(lk_adjoint_inverse), lk_inverse.weight());
}

double hausdorff_distance(const Vector& a, const Vector& b) {
  auto directed = [](const Vector& from, const Vector& to) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < from.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < to.size(); ++j) best = std::min(best, std::abs(from(i) - to(j)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  if (a.size() == 0 || b.size() == 0) {
    return a.size() == b.size() ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::max(directed(a, b), directed(b, a));
}

double matched_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  const Vector sa = sort_by_real(a);
  const Vector sb = sort_by_real(b);
  std::vector<bool> used(static_cast<std::size_t>(sb.size()), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sa.size(); ++i) {
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < sb.size(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(sa(i) - sb(j));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    worst = std::max(worst, best_d);
  }
  return worst;
}

SimilarityResult similarity_transform(const DenseOperator& l_inverse, const DenseOperator& kl,
                                      const DenseOperator& lk_inverse, const Tolerances& tol,
                                      const std::optional<Vector>& lk_inverse_spectrum) {
  const DenseOperator ipk = DenseOperator::identity(kl.weight()) + kl;
  PsdResult psd;
  try {
    psd = psd_check(ipk, tol.hermitian);
  } catch (const LabError& e) {
    if (e.code() != ErrorCode::NotHermitian) throw;
    throw LabError(ErrorCode::NotPositiveDefinite, std::string("I + KL is not Hermitian: ") + e.what());
  }
  if (psd.verdict != Definiteness::PositiveDefinite) {
    throw LabError(ErrorCode::NotPositiveDefinite,
                   fmt::format("I + KL has min eigenvalue {:.6g}", psd.min_eigenvalue));
  }
  SimilarityResult r{sqrt_psd(ipk, tol.hermitian), DenseOperator::zero(kl.weight()), 0.0, 0.0, 0.0, {}};
  const DenseOperator s_inv = inv_sqrt_psd(ipk, tol.hermitian, tol.invertibility);
  const DenseOperator c = r.S * l_inverse * r.S;
  r.C = c.with_entries(c.entries(), "C");
  r.hermitian_residual = operator_norm(r.C - r.C.adjoint()) / operator_norm(r.C);
  const DenseOperator rebuilt = r.S * r.C * s_inv;
  r.factorization_residual = operator_norm(lk_inverse - rebuilt) / operator_norm(lk_inverse);

  const DenseOperator c_sym = r.C.with_entries(0.5 * (r.C.entries() + r.C.adjoint().entries()), "C");
  r.spectrum_C = hermitian_eigenvalues(c_sym, tol.hermitian);
  const Vector mu = lk_inverse_spectrum ? *lk_inverse_spectrum : eigenvalues_general(lk_inverse);
  r.isospectrality_gap = hausdorff_distance(r.spectrum_C.cast<Complex>(), mu);
  return r;
}

RangeCertificates numerical_range_certificates(const DenseOperator& kl, const Tolerances& tol,
                                               const DenseOperator* l_inverse) {
  RangeCertificates c;
  c.hermitian = hermitian_residual(kl) <= tol.hermitian;
  if (c.hermitian) {
    const DenseOperator sym = kl.with_entries(0.5 * (kl.entries() + kl.adjoint().entries()), kl.label());
    const RealVector eigs = hermitian_eigenvalues(sym, tol.hermitian);
    c.kl_range_min = eigs.minCoeff();
    c.kl_range_max = eigs.maxCoeff();
    c.kl_nonnegative = c.kl_range_min >= -tol.psd * std::max(1.0, eigs.cwiseAbs().maxCoeff());
    // W(I + KL) = 1 + W(KL); for Hermitian KL the range is [min, max].
    c.zero_margin = 1.0 + c.kl_range_min;
    c.zero_excluded = c.zero_margin > tol.invertibility;
    if (!c.kl_nonnegative) {
      c.offending_point = Complex(c.kl_range_min, 0.0);
      c.message = fmt::format("W(KL) reaches {:.6g} < 0", c.kl_range_min);
    }
  } else {
    const NumericalRangeEstimate w = numerical_range_boundary(kl, 128);
    Complex worst = w.boundary_points.front();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Complex& p : w.boundary_points) {
      if (std::abs(p.imag()) > std::abs(worst.imag())) worst = p;
      lo = std::min(lo, p.real());
      hi = std::max(hi, p.real());
    }
    c.kl_range_min = lo;
    c.kl_range_max = hi;
    c.zero_margin = w.margin == 0.0 ? 0.0 : w.margin;
    c.offending_point = worst;
    c.message = fmt::format("KL is not Hermitian; W(KL) contains {}", format_complex(worst));
  }

  bool product_checked = l_inverse == nullptr;
  if (l_inverse != nullptr) {
    const DenseOperator product = *l_inverse * (DenseOperator::identity(kl.weight()) + kl);
    const Vector eigs = eigenvalues_general(product);
    c.product_min_real = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
      c.product_min_real = std::min(c.product_min_real, eigs(i).real());
      if (eigs(i).imag() != 0.0) max_ratio = std::max(max_ratio, std::abs(eigs(i).imag()) / std::abs(eigs(i)));
    }
    c.product_positive = c.product_min_real > 0.0 && max_ratio <= tol.realness;
    product_checked = c.product_positive;
    if (!c.product_positive && c.message.empty()) {
      c.message = fmt::format("sigma(L^-1 (I + KL)) is not positive (min Re {:.6g}, max Im ratio {:.3e})",
                              c.product_min_real, max_ratio);
    }
  }
  c.pass = c.hermitian && c.kl_nonnegative && c.zero_excluded && product_checked;
  return c;
}

SpectralReport analyze_restriction(const DenseOperator& l_inverse, const DenseOperator& kl,
                                   const DenseOperator& lk_inverse, const DenseOperator* lk_adjoint_inverse,
                                   const Tolerances& tol, const ReportOptions& options) {
  SpectralReport r;
  const RestrictionSpectrum spec = spectrum_of_restriction(lk_inverse, tol.invertibility);
  r.eigenvalues_LK = spec.eigenvalues;
  r.discarded = spec.discarded;
  r.eig_residual = spec.inverse.residual;
  const RealnessVerdict real = realness_verdict(spec.eigenvalues, tol.realness, options.require_positive);
  r.max_imag_ratio = real.max_imag_ratio;
  r.min_real_part = real.min_real_part;
  r.real_spectrum = real.pass;

  try {
    const SimilarityResult sim = similarity_transform(l_inverse, kl, lk_inverse, tol, spec.inverse.values);
    r.similarity_hermitian_residual = sim.hermitian_residual;
    r.similarity_factorization_residual = sim.factorization_residual;
    r.isospectrality_gap = sim.isospectrality_gap;
    r.similar_to_hermitian = sim.hermitian_residual <= tol.similarity && sim.factorization_residual <= tol.similarity &&
                             sim.isospectrality_gap <= tol.isospectrality;
  } catch (const LabError& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    r.similarity_hermitian_residual = std::numeric_limits<double>::quiet_NaN();
    r.similarity_factorization_residual = std::numeric_limits<double>::quiet_NaN();
    r.isospectrality_gap = std::numeric_limits<double>::quiet_NaN();
    r.similar_to_hermitian = false;
  }

  if (lk_adjoint_inverse != nullptr) {
    if (options.compute_riesz) {
      const EigDecomposition adj = eig_general(*lk_adjoint_inverse);
      r.adjoint_spectrum_gap = hausdorff_distance(adj.values.conjugate(), spec.inverse.values);
      r.riesz = riesz_basis_metric(spec.inverse, adj, lk_inverse.weight());
      r.riesz_basis = !r.riesz->near_defective && r.riesz->kappa <= options.kappa_limit;
    } else {
      const Vector adj = eigenvalues_general(*lk_adjoint_inverse);
      r.adjoint_spectrum_gap = hausdorff_distance(adj.conjugate(), spec.inverse.values);
    }
    r.adjoint_consistent = *r.adjoint_spectrum_gap <= tol.isospectrality;
  }
  return r;
}

}  // namespace riesz::analysis
