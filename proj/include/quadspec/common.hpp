#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace quadspec {

using cplx = std::complex<double>;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Error hierarchy. Everything the library throws derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A hypothesis of the analysis (dissipativity, symplectic singular space,
// partial ellipticity) does not hold for the given form.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Numerical thresholds used across the library. Every rank, realness or
/// clustering decision reads its threshold from here so that a single
/// override map can retune a run.
struct Tolerances {
  double rank = 1e-10;            // SVD null spaces, relative to the largest singular value
  double dissipative = 1e-10;     // max eig(Re Q) <= dissipative * |Q|
  double realness = 1e-8;         // |Im l| <= realness * (1 + |l|)
  double cluster = 1e-8;          // eigenvalue clustering, relative (1 + |l|)
  double boundary = 1e-9;         // |Re mu| below this counts as the imaginary axis
  double ellipticity = 1e-8;      // partial ellipticity margin, relative to |Q|
  double split_residual = 1e-10;  // cross blocks of the split, relative
  double symplectic = 1e-10;      // pairing checks of symplectic bases
  double quadrature = 1e-9;       // Gauss-Legendre N vs 2N agreement
  double convergence = 1e-6;      // Galerkin eigenvalue movement between truncations
  double lattice_merge = 1e-9;    // coincident lattice sums
  double stabilization = 1e-2;    // smoothing diagnostic relative change

  /// Names accepted by apply_override, in declaration order.
  static const std::vector<std::string>& names() {
    static const std::vector<std::string> kNames = {
        "rank",     "dissipative",  "realness",    "cluster",       "boundary",      "ellipticity",
        "split_residual", "symplectic", "quadrature", "convergence", "lattice_merge", "stabilization"};
    return kNames;
  }

  double* slot(const std::string& name) {
    if (name == "rank") return &rank;
    if (name == "dissipative") return &dissipative;
    if (name == "realness") return &realness;
    if (name == "cluster") return &cluster;
    if (name == "boundary") return &boundary;
    if (name == "ellipticity") return &ellipticity;
    if (name == "split_residual") return &split_residual;
    if (name == "symplectic") return &symplectic;
    if (name == "quadrature") return &quadrature;
    if (name == "convergence") return &convergence;
    if (name == "lattice_merge") return &lattice_merge;
    if (name == "stabilization") return &stabilization;
    return nullptr;
  }

  void apply_override(const std::string& name, double value) {
    double* s = slot(name);
    if (s == nullptr) throw Error("unknown tolerance '" + name + "'");
    if (!(value > 0.0) || !std::isfinite(value)) throw Error("tolerance '" + name + "' must be positive");
    *s = value;
  }

  std::map<std::string, double> as_map() const {
    std::map<std::string, double> out;
    auto* self = const_cast<Tolerances*>(this);
    for (const auto& n : names()) out[n] = *self->slot(n);
    return out;
  }
};

/// Matrix of the canonical symplectic form in the ordering
/// (x_1..x_n, xi_1..xi_n): sigma(X, Y) = X^T J Y = xi.y - x.eta.
inline RMatrix symplectic_matrix(int n) {
  RMatrix J = RMatrix::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = -RMatrix::Identity(n, n);
  J.bottomLeftCorner(n, n) = RMatrix::Identity(n, n);
  return J;
}

template <class A, class B>
auto sigma(const Eigen::MatrixBase<A>& X, const Eigen::MatrixBase<B>& Y) {
  const Eigen::Index n = X.size() / 2;
  // bilinear, no conjugation
  return X.tail(n).cwiseProduct(Y.head(n)).sum() - X.head(n).cwiseProduct(Y.tail(n)).sum();
}

namespace linalg {

/// Orthonormal basis of the (right) null space of A. Singular values below
/// rel_tol * sigma_max are treated as zero; a zero matrix has full kernel.
inline RMatrix null_space(const RMatrix& A, double rel_tol) {
  const Eigen::Index cols = A.cols();
  if (cols == 0) return RMatrix(0, 0);
  if (A.rows() == 0) return RMatrix::Identity(cols, cols);
  Eigen::JacobiSVD<RMatrix> svd(A, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax == 0.0) return RMatrix::Identity(cols, cols);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * smax) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

/// Orthonormal basis of the column span of A (rank decided like null_space).
inline RMatrix orthonormal_span(const RMatrix& A, double rel_tol) {
  if (A.cols() == 0) return RMatrix(A.rows(), 0);
  Eigen::JacobiSVD<RMatrix> svd(A, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Eigen::Index rank = 0;
  if (smax > 0.0)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > rel_tol * smax) ++rank;
  return svd.matrixU().leftCols(rank);
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal bases. Dimension mismatch returns 1.
inline double subspace_distance(const RMatrix& A, const RMatrix& B) {
  if (A.cols() != B.cols()) return 1.0;
  if (A.cols() == 0) return 0.0;
  RMatrix residual = B - A * (A.transpose() * B);
  Eigen::JacobiSVD<RMatrix> svd(residual);
  return std::min(1.0, svd.singularValues()(0));
}

inline double spectral_norm(const CMatrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(A);
  return svd.singularValues()(0);
}

/// Largest eigenvalue of a real symmetric matrix.
inline double max_eigenvalue(const RMatrix& S) {
  if (S.size() == 0) return -kInf;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

inline double min_eigenvalue(const RMatrix& S) {
  if (S.size() == 0) return kInf;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace linalg
}  // namespace quadspec
