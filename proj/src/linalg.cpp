#include "riesz/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace riesz {

namespace {

bool all_real(const Matrix& m) { return (m.imag().array() == 0.0).all(); }

template <class M>
double pivot_ratio(const M& lu) {
  const auto d = lu.diagonal().cwiseAbs();
  const double top = d.maxCoeff();
  return top > 0.0 ? d.minCoeff() / top : 0.0;
}

RealVector sqrt_weights(const RealVector& w) { return w.array().sqrt().matrix(); }

// Sort eigenpairs by descending modulus; ties broken by real part then
// imaginary part so the order is deterministic.
void sort_descending_modulus(Vector& values, Matrix& vectors) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    const double ai = std::abs(values(i));
    const double aj = std::abs(values(j));
    if (ai != aj) return ai > aj;
    if (values(i).real() != values(j).real()) return values(i).real() > values(j).real();
    return values(i).imag() > values(j).imag();
  });
  Vector v(values.size());
  Matrix m(vectors.rows(), vectors.cols());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    v(k) = values(order[static_cast<std::size_t>(k)]);
    if (vectors.size() > 0) m.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  values = std::move(v);
  if (vectors.size() > 0) vectors = std::move(m);
}

Eigen::Index max_iterations(Eigen::Index n) { return std::max<Eigen::Index>(50 * n, 50); }

}  // namespace

std::string_view to_string(Definiteness d) {
  switch (d) {
    case Definiteness::Indefinite: return "Indefinite";
    case Definiteness::PositiveSemidefinite: return "PositiveSemidefinite";
    case Definiteness::PositiveDefinite: return "PositiveDefinite";
  }
  return "Unknown";
}

DenseOperator::DenseOperator(Matrix entries, RealVector weight, std::string label)
    : entries_(std::move(entries)), weight_(std::move(weight)), label_(std::move(label)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw LabError(ErrorCode::InvalidArgument, "operator '" + label_ + "' must be square and non-empty");
  }
  if (weight_.size() != entries_.rows()) {
    throw LabError(ErrorCode::InvalidArgument, "operator '" + label_ + "': weight length mismatch");
  }
  if (!(weight_.array() > 0.0).all() || !weight_.allFinite()) {
    throw LabError(ErrorCode::InvalidArgument, "operator '" + label_ + "': weights must be positive");
  }
  if (!entries_.allFinite()) {
    throw LabError(ErrorCode::InvalidArgument, "operator '" + label_ + "' has non-finite entries");
  }
}

DenseOperator DenseOperator::identity(const RealVector& weight, std::string label) {
  return {Matrix::Identity(weight.size(), weight.size()), weight, std::move(label)};
}

DenseOperator DenseOperator::zero(const RealVector& weight, std::string label) {
  return {Matrix::Zero(weight.size(), weight.size()), weight, std::move(label)};
}

bool DenseOperator::is_real() const { return all_real(entries_); }

DenseOperator DenseOperator::adjoint() const {
  const RealVector inv_w = weight_.cwiseInverse();
  Matrix adj = inv_w.asDiagonal() * entries_.adjoint() * weight_.asDiagonal();
  return {std::move(adj), weight_, label_ + "^*"};
}

DenseOperator DenseOperator::with_entries(Matrix entries, std::string label) const {
  return {std::move(entries), weight_, std::move(label)};
}

void DenseOperator::require_same_grid(const DenseOperator& rhs, const char* op) const {
  if (rhs.dim() != dim() || rhs.weight_ != weight_) {
    throw LabError(ErrorCode::InvalidArgument,
                   std::string("operands of ") + op + " live on different grids: '" + label_ + "', '" +
                       rhs.label_ + "'");
  }
}

DenseOperator DenseOperator::operator+(const DenseOperator& rhs) const {
  require_same_grid(rhs, "+");
  return {entries_ + rhs.entries_, weight_, label_ + "+" + rhs.label_};
}

DenseOperator DenseOperator::operator-(const DenseOperator& rhs) const {
  require_same_grid(rhs, "-");
  return {entries_ - rhs.entries_, weight_, label_ + "-" + rhs.label_};
}

DenseOperator DenseOperator::operator*(const DenseOperator& rhs) const {
  require_same_grid(rhs, "*");
  return {entries_ * rhs.entries_, weight_, label_ + rhs.label_};
}

DenseOperator DenseOperator::scaled(Complex factor) const {
  return {entries_ * factor, weight_, label_};
}

Complex weighted_inner(const Vector& f, const Vector& g, const RealVector& weight) {
  Complex sum = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) sum += weight(i) * f(i) * std::conj(g(i));
  return sum;
}

double weighted_norm(const Vector& f, const RealVector& weight) {
  return std::sqrt((weight.array() * f.array().abs2()).sum());
}

Matrix to_unitary_frame(const DenseOperator& a) {
  const RealVector d = sqrt_weights(a.weight());
  return d.asDiagonal() * a.entries() * d.cwiseInverse().asDiagonal();
}

DenseOperator from_unitary_frame(const Matrix& b, const RealVector& weight, std::string label) {
  const RealVector d = sqrt_weights(weight);
  return {d.cwiseInverse().asDiagonal() * b * d.asDiagonal(), weight, std::move(label)};
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  double top = 0.0;
  if (all_real(m)) {
    const RealMatrix r = m.real();
    const RealMatrix gram = r.rows() >= r.cols() ? RealMatrix(r.transpose() * r) : RealMatrix(r * r.transpose());
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(gram, Eigen::EigenvaluesOnly);
    top = es.eigenvalues().maxCoeff();
  } else {
    const Matrix gram = m.rows() >= m.cols() ? Matrix(m.adjoint() * m) : Matrix(m * m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    top = es.eigenvalues().maxCoeff();
  }
  return std::sqrt(std::max(top, 0.0));
}

double operator_norm(const DenseOperator& a) { return spectral_norm(to_unitary_frame(a)); }

Matrix solve(const DenseOperator& a, const Matrix& b, double relative_floor) {
  if (b.rows() != a.dim()) throw LabError(ErrorCode::InvalidArgument, "solve: right-hand side shape mismatch");
  if (a.is_real() && all_real(b)) {
    Eigen::PartialPivLU<RealMatrix> lu(a.entries().real());
    // rcond() is the reciprocal 1-norm condition estimate; rcond*||A||_1
    // estimates 1/||A^-1||_1, a proxy for the smallest singular value. It
    // misses exact zero pivots, hence the pivot ratio as well.
    if (!(lu.rcond() > relative_floor) || !(pivot_ratio(lu.matrixLU()) > relative_floor)) {
      throw LabError(ErrorCode::SingularOperator, "'" + a.label() + "' is numerically singular");
    }
    return lu.solve(b.real()).cast<Complex>();
  }
  Eigen::PartialPivLU<Matrix> lu(a.entries());
  if (!(lu.rcond() > relative_floor) || !(pivot_ratio(lu.matrixLU()) > relative_floor)) {
    throw LabError(ErrorCode::SingularOperator, "'" + a.label() + "' is numerically singular");
  }
  return lu.solve(b);
}

DenseOperator hermitian_inverse(const DenseOperator& a, double hermitian_tol, double relative_floor) {
  const double r = hermitian_residual(a);
  if (r > hermitian_tol) {
    throw LabError(ErrorCode::NotHermitian,
                   "hermitian_inverse('" + a.label() + "'): residual " + std::to_string(r));
  }
  const DenseOperator inv = inverse(a, relative_floor);
  return inv.with_entries(0.5 * (inv.entries() + inv.adjoint().entries()), inv.label());
}

DenseOperator inverse(const DenseOperator& a, double relative_floor) {
  return a.with_entries(solve(a, Matrix::Identity(a.dim(), a.dim()), relative_floor), a.label() + "^-1");
}

namespace {

void normalize_and_measure(const DenseOperator& a, EigDecomposition& out) {
  const RealVector& w = a.weight();
  double residual = 0.0;
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    const double nrm = weighted_norm(out.vectors.col(j), w);
    if (nrm > 0.0) out.vectors.col(j) /= nrm;
    const Vector r = a.entries() * out.vectors.col(j) - out.values(j) * out.vectors.col(j);
    residual = std::max(residual, weighted_norm(r, w));
  }
  out.residual = residual;
}

}  // namespace

namespace {

// Entrywise test in the unitary frame, at rounding level only.
bool hermitian_to_rounding(const DenseOperator& a) {
  const Matrix b = to_unitary_frame(a);
  const double scale = b.cwiseAbs().maxCoeff();
  return (b - b.adjoint()).cwiseAbs().maxCoeff() <= 8.0 * std::numeric_limits<double>::epsilon() * scale;
}

EigDecomposition hermitian_decomposition(const DenseOperator& a);

struct FrameEig {
  RealVector values;
  Matrix vectors;  // unitary-frame eigenvectors
};

FrameEig hermitian_frame_eig(const DenseOperator& a, bool vectors);

}  // namespace

EigDecomposition eig_general(const DenseOperator& a) {
  EigDecomposition out;
  const Eigen::Index n = a.dim();
  if (hermitian_to_rounding(a)) {
    out = hermitian_decomposition(a);
  } else if (a.is_real()) {
    Eigen::EigenSolver<RealMatrix> es;
    es.setMaxIterations(max_iterations(n));
    es.compute(a.entries().real(), true);
    if (es.info() != Eigen::Success) {
      throw LabError(ErrorCode::NoConvergence, "eig_general('" + a.label() + "') exceeded the QR budget");
    }
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
  } else {
    Eigen::ComplexEigenSolver<Matrix> es;
    es.setMaxIterations(max_iterations(n));
    es.compute(a.entries(), true);
    if (es.info() != Eigen::Success) {
      throw LabError(ErrorCode::NoConvergence, "eig_general('" + a.label() + "') exceeded the QR budget");
    }
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
  }
  sort_descending_modulus(out.values, out.vectors);
  normalize_and_measure(a, out);
  return out;
}

Vector eigenvalues_general(const DenseOperator& a) {
  Vector values;
  Matrix none;
  const Eigen::Index n = a.dim();
  if (hermitian_to_rounding(a)) {
    values = hermitian_frame_eig(a, false).values.cast<Complex>();
  } else if (a.is_real()) {
    Eigen::EigenSolver<RealMatrix> es;
    es.setMaxIterations(max_iterations(n));
    es.compute(a.entries().real(), false);
    if (es.info() != Eigen::Success) {
      throw LabError(ErrorCode::NoConvergence, "eigenvalues('" + a.label() + "') exceeded the QR budget");
    }
    values = es.eigenvalues();
  } else {
    Eigen::ComplexEigenSolver<Matrix> es;
    es.setMaxIterations(max_iterations(n));
    es.compute(a.entries(), false);
    if (es.info() != Eigen::Success) {
      throw LabError(ErrorCode::NoConvergence, "eigenvalues('" + a.label() + "') exceeded the QR budget");
    }
    values = es.eigenvalues();
  }
  sort_descending_modulus(values, none);
  return values;
}

double hermitian_residual(const DenseOperator& a) {
  const Matrix b = to_unitary_frame(a);
  const Matrix skew = b - b.adjoint();
  // i*(B - B^H) is Hermitian; its spectral norm is the max |eigenvalue|.
  double skew_norm = 0.0;
  if (all_real(b)) {
    // Real skew-symmetric: singular values of S equal |eigs| of i*S.
    skew_norm = spectral_norm(skew);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(Complex(0.0, 1.0) * skew), Eigen::EigenvaluesOnly);
    skew_norm = es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return skew_norm / std::max(1.0, spectral_norm(b));
}

namespace {

void require_hermitian(const DenseOperator& a, double tol, const char* who) {
  const double r = hermitian_residual(a);
  if (!(r <= tol)) {
    throw LabError(ErrorCode::NotHermitian,
                   std::string(who) + "('" + a.label() + "'): hermitian residual " + std::to_string(r) +
                       " exceeds " + std::to_string(tol));
  }
}

FrameEig hermitian_frame_eig(const DenseOperator& a, bool vectors) {
  const Matrix b = to_unitary_frame(a);
  const Matrix sym = 0.5 * (b + b.adjoint());
  const int options = vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  FrameEig out;
  if (all_real(sym)) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym.real(), options);
    if (es.info() != Eigen::Success) throw LabError(ErrorCode::NoConvergence, "hermitian eig failed");
    out.values = es.eigenvalues();
    if (vectors) out.vectors = es.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, options);
    if (es.info() != Eigen::Success) throw LabError(ErrorCode::NoConvergence, "hermitian eig failed");
    out.values = es.eigenvalues();
    if (vectors) out.vectors = es.eigenvectors();
  }
  return out;
}

EigDecomposition hermitian_decomposition(const DenseOperator& a) {
  FrameEig fe = hermitian_frame_eig(a, true);
  EigDecomposition out;
  out.values = fe.values.cast<Complex>();
  out.vectors = sqrt_weights(a.weight()).cwiseInverse().asDiagonal() * fe.vectors;
  return out;
}

}  // namespace

EigDecomposition eig_hermitian(const DenseOperator& a, double tol) {
  require_hermitian(a, tol, "eig_hermitian");
  EigDecomposition out = hermitian_decomposition(a);
  normalize_and_measure(a, out);
  return out;
}

RealVector hermitian_eigenvalues(const DenseOperator& a, double tol) {
  require_hermitian(a, tol, "hermitian_eigenvalues");
  return hermitian_frame_eig(a, false).values;
}

PsdResult psd_check(const DenseOperator& a, double tol) {
  require_hermitian(a, tol, "psd_check");
  const RealVector ev = hermitian_frame_eig(a, false).values;
  PsdResult out;
  out.min_eigenvalue = ev.minCoeff();
  out.max_eigenvalue = ev.maxCoeff();
  const double threshold = tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (out.min_eigenvalue >= threshold) {
    out.verdict = Definiteness::PositiveDefinite;
  } else if (out.min_eigenvalue >= -threshold) {
    out.verdict = Definiteness::PositiveSemidefinite;
  } else {
    out.verdict = Definiteness::Indefinite;
  }
  return out;
}

namespace {

DenseOperator spectral_function(const DenseOperator& a, const FrameEig& fe, const RealVector& f,
                                std::string label) {
  const Matrix b = fe.vectors * f.cast<Complex>().asDiagonal() * fe.vectors.adjoint();
  return from_unitary_frame(b, a.weight(), std::move(label));
}

}  // namespace

DenseOperator sqrt_psd(const DenseOperator& a, double hermitian_tol, double clip) {
  require_hermitian(a, hermitian_tol, "sqrt_psd");
  const FrameEig fe = hermitian_frame_eig(a, true);
  const double floor = clip * fe.values.cwiseAbs().maxCoeff();
  RealVector root(fe.values.size());
  for (Eigen::Index i = 0; i < root.size(); ++i) {
    const double lam = fe.values(i);
    if (lam < -floor) {
      throw LabError(ErrorCode::NotPositiveDefinite,
                     "sqrt_psd('" + a.label() + "'): eigenvalue " + std::to_string(lam) + " is negative");
    }
    root(i) = lam > 0.0 ? std::sqrt(lam) : 0.0;
  }
  return spectral_function(a, fe, root, "(" + a.label() + ")^1/2");
}

DenseOperator inv_sqrt_psd(const DenseOperator& a, double hermitian_tol, double invertibility_floor) {
  require_hermitian(a, hermitian_tol, "inv_sqrt_psd");
  const FrameEig fe = hermitian_frame_eig(a, true);
  const double floor = invertibility_floor * fe.values.cwiseAbs().maxCoeff();
  RealVector f(fe.values.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (!(fe.values(i) >= floor)) {
      throw LabError(ErrorCode::NotPositiveDefinite,
                     "inv_sqrt_psd('" + a.label() + "'): eigenvalue " + std::to_string(fe.values(i)) +
                         " below the invertibility floor");
    }
    f(i) = 1.0 / std::sqrt(fe.values(i));
  }
  return spectral_function(a, fe, f, "(" + a.label() + ")^-1/2");
}

double condition_number(const Matrix& v, const RealVector& weight) {
  if (v.rows() != v.cols() || v.rows() != weight.size()) {
    throw LabError(ErrorCode::InvalidArgument, "condition_number: shape mismatch");
  }
  Matrix frame = sqrt_weights(weight).asDiagonal() * v;
  for (Eigen::Index j = 0; j < frame.cols(); ++j) {
    const double nrm = frame.col(j).norm();
    if (nrm == 0.0) throw LabError(ErrorCode::RankDeficient, "condition_number: zero column");
    frame.col(j) /= nrm;
  }
  RealVector sv;
  if (all_real(frame)) {
    sv = Eigen::BDCSVD<RealMatrix>(frame.real()).singularValues();
  } else {
    sv = Eigen::BDCSVD<Matrix>(frame).singularValues();
  }
  const double smax = sv.maxCoeff();
  const double smin = sv.minCoeff();
  const double eps = std::numeric_limits<double>::epsilon();
  if (!(smin > eps * static_cast<double>(sv.size()) * smax)) {
    throw LabError(ErrorCode::RankDeficient, "condition_number: matrix is numerically rank deficient");
  }
  return smax / smin;
}

double condition_number(const Matrix& v) { return condition_number(v, RealVector::Ones(v.rows())); }

}  // namespace riesz
