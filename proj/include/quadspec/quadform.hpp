#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "common.hpp"

namespace quadspec {

/// Complex-valued quadratic form q(X) = X^T Q X on R^{2n}, ordering
/// (x_1..x_n, xi_1..xi_n). Q is kept exactly symmetric.
class QuadraticForm {
 public:
  QuadraticForm() : n_(0) {}

  QuadraticForm(int n, const CMatrix& Q) : n_(n) {
    if (n < 1) throw DimensionError("quadratic form needs n >= 1");
    if (Q.rows() != 2 * n || Q.cols() != 2 * n)
      throw DimensionError("quadratic form matrix must be " + std::to_string(2 * n) + "x" + std::to_string(2 * n));
    CMatrix sym = (Q + Q.transpose()) * 0.5;
    symmetrized_ = !(sym == Q);
    Q_ = sym;
  }

  QuadraticForm(int n, const RMatrix& re, const RMatrix& im) : QuadraticForm(n, make_complex(re, im)) {}

  static QuadraticForm zero(int n) { return QuadraticForm(n, CMatrix::Zero(2 * n, 2 * n)); }

  int n() const { return n_; }
  int dim() const { return 2 * n_; }
  const CMatrix& matrix() const { return Q_; }
  RMatrix re() const { return Q_.real(); }
  RMatrix im() const { return Q_.imag(); }

  /// True when the constructor had to replace Q by (Q + Q^T)/2.
  bool was_symmetrized() const { return symmetrized_; }

  QuadraticForm real_part() const { return QuadraticForm(n_, CMatrix(Q_.real().cast<cplx>())); }
  QuadraticForm imag_part() const { return QuadraticForm(n_, CMatrix(Q_.imag().cast<cplx>())); }

  /// (q o R)(X) = q(R X) for a real linear map R.
  QuadraticForm compose(const RMatrix& R) const {
    if (R.rows() != dim() || R.cols() != dim()) throw DimensionError("compose: map has wrong size");
    CMatrix Rc = R.cast<cplx>();
    return QuadraticForm(n_, CMatrix(Rc.transpose() * Q_ * Rc));
  }

  double norm() const { return Q_.norm(); }

  /// Largest eigenvalue of the real symmetric matrix Re Q.
  double max_real_eigenvalue() const { return linalg::max_eigenvalue(Q_.real()); }

  bool is_dissipative(const Tolerances& tol = {}) const {
    return max_real_eigenvalue() <= tol.dissipative * std::max(norm(), 1e-300);
  }

  /// Throws HypothesisError unless Re Q is negative semidefinite.
  const QuadraticForm& require_dissipative(const Tolerances& tol = {}) const {
    if (!is_dissipative(tol))
      throw HypothesisError("real part is not negative semidefinite (largest eigenvalue " +
                            std::to_string(max_real_eigenvalue()) + ")");
    return *this;
  }

  friend QuadraticForm operator+(const QuadraticForm& a, const QuadraticForm& b) {
    if (a.n_ != b.n_) throw DimensionError("adding forms of different dimension");
    return QuadraticForm(a.n_, CMatrix(a.Q_ + b.Q_));
  }
  friend QuadraticForm operator*(cplx c, const QuadraticForm& a) { return QuadraticForm(a.n_, CMatrix(c * a.Q_)); }

 private:
  static CMatrix make_complex(const RMatrix& re, const RMatrix& im) {
    if (re.rows() != im.rows() || re.cols() != im.cols()) throw DimensionError("real and imaginary parts differ in shape");
    CMatrix Q(re.rows(), re.cols());
    Q.real() = re;
    Q.imag() = im;
    return Q;
  }

  int n_;
  CMatrix Q_;
  bool symmetrized_ = false;
};

/// Hamilton map F, the sigma-skew-symmetric map with q(X;Y) = sigma(X, F Y),
/// i.e. F = J^{-1} Q.
struct HamiltonMap {
  int n = 0;
  CMatrix F;

  RMatrix re() const { return F.real(); }
  RMatrix im() const { return F.imag(); }
};

/// Direct block copy of J^{-1} Q: top rows are the xi-rows of Q, bottom rows
/// are minus the x-rows. No arithmetic beyond negation, so exact.
inline HamiltonMap hamilton_map(const QuadraticForm& q) {
  const int n = q.n();
  HamiltonMap h{n, CMatrix(2 * n, 2 * n)};
  h.F.topRows(n) = q.matrix().bottomRows(n);
  h.F.bottomRows(n) = -q.matrix().topRows(n);
  return h;
}

/// Inverse of hamilton_map: Q = J F.
inline QuadraticForm form_from_hamilton(const HamiltonMap& h) {
  const int n = h.n;
  CMatrix Q(2 * n, 2 * n);
  Q.topRows(n) = -h.F.bottomRows(n);
  Q.bottomRows(n) = h.F.topRows(n);
  return QuadraticForm(n, Q);
}

template <class Derived>
cplx eval(const QuadraticForm& q, const Eigen::MatrixBase<Derived>& X) {
  if (X.size() != q.dim()) throw DimensionError("eval: vector length " + std::to_string(X.size()) + ", expected " +
                                                std::to_string(q.dim()));
  CVector Xc = X.template cast<cplx>();
  return (Xc.transpose() * q.matrix() * Xc)(0, 0);
}

/// Polarized form q(X;Y) = X^T Q Y.
template <class A, class B>
cplx polarized(const QuadraticForm& q, const Eigen::MatrixBase<A>& X, const Eigen::MatrixBase<B>& Y) {
  if (X.size() != q.dim() || Y.size() != q.dim()) throw DimensionError("polarized: vector length mismatch");
  CVector Xc = X.template cast<cplx>();
  CVector Yc = Y.template cast<cplx>();
  return (Xc.transpose() * q.matrix() * Yc)(0, 0);
}

/// Poisson bracket {q1,q2} = d_xi q1 . d_x q2 - d_x q1 . d_xi q2 of two
/// quadratic forms. Gradients are G X with G = 2Q; the bracket is the
/// symmetric part of G1_xi^T G2_x - G1_x^T G2_xi. The loops keep a fixed
/// summation order so that {q2,q1} = -{q1,q2} holds bit for bit.
inline QuadraticForm poisson_bracket(const QuadraticForm& q1, const QuadraticForm& q2) {
  if (q1.n() != q2.n()) throw DimensionError("poisson_bracket: forms of different dimension");
  const int n = q1.n();
  const int d = 2 * n;
  const CMatrix& A = q1.matrix();
  const CMatrix& B = q2.matrix();
  CMatrix T(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < n; ++k) s += (2.0 * A(n + k, i)) * (2.0 * B(k, j)) - (2.0 * A(k, i)) * (2.0 * B(n + k, j));
      T(i, j) = s;
    }
  }
  CMatrix S(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) S(i, j) = (T(i, j) + T(j, i)) * 0.5;
  return QuadraticForm(n, S);
}

/// Closed cone of values of q: all angles attained on sampled unit vectors,
/// summarized as an angular sector (Sigma(q) is convex) or the whole plane.
struct NumericalRangeCone {
  std::vector<double> angles;  // sorted, in (-pi, pi]
  bool zero_only = false;      // q vanishes on every sample
  bool whole_plane = false;
  double lo = 0.0;             // sector [lo, lo + width], radians
  double width = 0.0;
  double angle_tol = 1e-2;

  bool contains(cplx z, double tol = -1.0) const {
    const double atol = tol < 0 ? angle_tol : tol;
    if (std::abs(z) == 0.0) return true;
    if (zero_only) return false;
    if (whole_plane) return true;
    double offset = std::arg(z) - lo;
    const double two_pi = 2.0 * std::numbers::pi;
    offset = std::fmod(std::fmod(offset, two_pi) + two_pi, two_pi);
    if (offset <= width + atol) return true;
    return offset >= two_pi - atol;
  }
};

/// Samples q on quasi-uniform points of the unit sphere (random directions
/// plus coordinate axes, their pairwise sums and eigenvectors of Re Q and
/// Im Q) and collects the arguments of nonzero values.
inline NumericalRangeCone numerical_range_cone(const QuadraticForm& q, int samples, unsigned seed = 7) {
  const int d = q.dim();
  if (samples < d) throw PreconditionError("numerical_range_cone: need at least 2n samples");
  std::vector<RVector> dirs;
  for (int i = 0; i < d; ++i) dirs.push_back(RVector::Unit(d, i));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      dirs.push_back((RVector::Unit(d, i) + RVector::Unit(d, j)).normalized());
      dirs.push_back((RVector::Unit(d, i) - RVector::Unit(d, j)).normalized());
    }
  for (const RMatrix& part : {q.re(), q.im()}) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(part);
    for (int i = 0; i < d; ++i) dirs.push_back(es.eigenvectors().col(i));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int s = 0; s < samples; ++s) {
    RVector v(d);
    for (int i = 0; i < d; ++i) v(i) = gauss(rng);
    dirs.push_back(v.normalized());
  }

  NumericalRangeCone cone;
  const double scale = std::max(q.norm(), 1e-300);
  for (const auto& v : dirs) {
    cplx z = eval(q, v);
    if (std::abs(z) > 1e-13 * scale) cone.angles.push_back(std::arg(z));
  }
  if (cone.angles.empty()) {
    cone.zero_only = true;
    return cone;
  }
  std::sort(cone.angles.begin(), cone.angles.end());
  // The largest gap between consecutive angles (cyclically) is the
  // complement of the sector. A convex cone other than C leaves a gap >= pi.
  const double two_pi = 2.0 * std::numbers::pi;
  double best_gap = -1.0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < cone.angles.size(); ++i) {
    double next = (i + 1 < cone.angles.size()) ? cone.angles[i + 1] : cone.angles[0] + two_pi;
    double gap = next - cone.angles[i];
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  if (best_gap < std::numbers::pi - cone.angle_tol) {
    cone.whole_plane = true;
    return cone;
  }
  const std::size_t start = (best + 1) % cone.angles.size();
  cone.lo = cone.angles[start];
  cone.width = two_pi - best_gap;
  return cone;
}

/// Order of q - z at X0: the largest j such that every iterated bracket
/// p_I, 1 <= |I| <= j, of p1 = Re(q - z), p2 = Im(q - z) vanishes at X0.
struct SymbolOrder {
  int order = 0;
  bool infinite = false;  // all brackets up to the cap vanished
  int cap = 0;
};

inline SymbolOrder symbol_order(const QuadraticForm& q, cplx z, const RVector& X0, int j_max = -1,
                                double rel_tol = 1e-10) {
  if (X0.size() != q.dim()) throw DimensionError("symbol_order: point has wrong length");
  if (j_max < 0) j_max = 4 * q.n() - 2;
  if (j_max > 20) throw PreconditionError("symbol_order: j_max exceeds the supported word length 20");
  const double scale = std::max(q.norm(), 1e-300) * std::max(X0.squaredNorm(), 1e-300);
  const cplx value = eval(q, X0);
  if (std::abs(value - z) > 1e-9 * std::max({scale, std::abs(z), 1.0}))
    throw PreconditionError("symbol_order: q(X0) differs from z, no characteristic point");

  // Words of length 1 vanish by the precondition. Longer words only see the
  // quadratic parts since the constant z has zero bracket with everything.
  const QuadraticForm p1 = q.real_part();
  const QuadraticForm p2 = q.imag_part();
  const QuadraticForm* gens[2] = {&p1, &p2};
  std::vector<QuadraticForm> current = {p1, p2};
  double bracket_scale = q.norm();
  for (int len = 2; len <= j_max + 1; ++len) {
    std::vector<QuadraticForm> next;
    next.reserve(current.size() * 2);
    bracket_scale *= 4.0 * std::max(q.norm(), 1e-300);
    for (const auto* g : gens)
      for (const auto& w : current) {
        QuadraticForm b = poisson_bracket(*g, w);
        if (std::abs(eval(b, X0)) > rel_tol * bracket_scale * std::max(X0.squaredNorm(), 1e-300))
          return SymbolOrder{len - 1, false, j_max};
        next.push_back(std::move(b));
      }
    current = std::move(next);
  }
  return SymbolOrder{j_max, true, j_max};
}

}  // namespace quadspec
