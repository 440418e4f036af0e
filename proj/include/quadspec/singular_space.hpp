#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "quadform.hpp"

namespace quadspec {

/// Orthonormal basis (columns) of a subspace of R^{2n}.
struct SubspaceBasis {
  int n = 0;
  RMatrix vectors;  // 2n x d

  int dim() const { return static_cast<int>(vectors.cols()); }

  static SubspaceBasis whole(int n) { return {n, RMatrix::Identity(2 * n, 2 * n)}; }
  static SubspaceBasis trivial(int n) { return {n, RMatrix(2 * n, 0)}; }
};

/// A symplectic basis (e_k, eps_k) with sigma(eps_j, e_k) = delta_jk and
/// sigma(e_j, e_k) = sigma(eps_j, eps_k) = 0.
struct SymplecticPairs {
  RMatrix e;    // 2n x m
  RMatrix eps;  // 2n x m
  int size() const { return static_cast<int>(e.cols()); }
};

struct SingularSpaceReport {
  SubspaceBasis S;
  bool is_symplectic = false;
  bool is_partially_elliptic = false;
  double ellipticity_margin = 0.0;              // +inf when dim S = 0
  double ellipticity_lower_bound = 0.0;         // certified part of the margin
  std::vector<double> real_eigenvalues;         // lambda_1 < ... < lambda_r, all > 0
  std::vector<SubspaceBasis> blocks;            // S_{lambda_j}
  SubspaceBasis S0;                             // Ker F cap R^{2n}, diagnostic
  std::vector<std::string> diagnostics;
};

/// Intersection over j = 0..2n-1 of Ker[Re F (Im F)^j], restricted to real
/// vectors. The blocks are stacked (each normalized, which leaves the kernels
/// unchanged) and the null space is read off an SVD.
inline SubspaceBasis compute_singular_space(const HamiltonMap& h, const Tolerances& tol = {}) {
  const int n = h.n;
  const int d = 2 * n;
  const RMatrix reF = h.re();
  const RMatrix imF = h.im();
  const double re_norm = reF.norm();
  if (re_norm == 0.0) return SubspaceBasis::whole(n);
  const double im_norm = imF.norm();
  const RMatrix step = im_norm > 0.0 ? RMatrix(imF / im_norm) : RMatrix(RMatrix::Zero(d, d));
  const int terms = im_norm > 0.0 ? d : 1;
  RMatrix stacked(terms * d, d);
  RMatrix block = reF / re_norm;
  for (int j = 0; j < terms; ++j) {
    stacked.middleRows(j * d, d) = block;
    block = block * step;
  }
  return {n, linalg::null_space(stacked, tol.rank)};
}

/// sigma restricted to span(B) is nondegenerate. {0} counts as symplectic.
inline bool is_symplectic(const SubspaceBasis& B, const Tolerances& tol = {}) {
  const int d = B.dim();
  if (d == 0) return true;
  if (d % 2 == 1) return false;
  const RMatrix G = B.vectors.transpose() * symplectic_matrix(B.n) * B.vectors;
  Eigen::JacobiSVD<RMatrix> svd(G);
  const RVector& s = svd.singularValues();
  if (s(0) == 0.0) return false;
  return s(d - 1) > tol.rank * std::max(1.0, s(0));
}

struct EllipticityCheck {
  bool elliptic = false;
  double margin = 0.0;       // min |q(u)| found over unit u in span(S)
  double lower_bound = 0.0;  // certified by a definite combination cos t Re + sin t Im
};

namespace detail {

// Minimizes |u^T Q u|^2 on the unit sphere by projected gradient descent
// with backtracking, starting from u.
inline double descend_modulus(const RMatrix& A, const RMatrix& C, RVector u, int iterations = 300) {
  auto value = [&](const RVector& v) {
    const double a = v.dot(A * v);
    const double c = v.dot(C * v);
    return a * a + c * c;
  };
  u.normalize();
  double f = value(u);
  double step = 1.0;
  for (int it = 0; it < iterations && f > 0.0; ++it) {
    const double a = u.dot(A * u);
    const double c = u.dot(C * u);
    RVector g = 4.0 * a * (A * u) + 4.0 * c * (C * u);
    g -= g.dot(u) * u;
    const double gn = g.norm();
    if (gn < 1e-300) break;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      RVector trial = (u - step * g).normalized();
      const double ft = value(trial);
      if (ft < f - 1e-4 * step * gn * gn) {
        u = trial;
        f = ft;
        step *= 2.0;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return std::sqrt(f);
}

}  // namespace detail

/// min over unit vectors u in span(S) of |q(u)|. The minimizer combines
/// eigenvectors of every real combination cos t Re q + sin t Im q with
/// 10 d^2 seeded random restarts, each refined by projected gradient; the
/// returned margin is the best value found (an upper bound), and a definite
/// combination certifies a lower bound.
inline EllipticityCheck check_partial_ellipticity(const QuadraticForm& q, const SubspaceBasis& S,
                                                  const Tolerances& tol = {}, unsigned seed = 11) {
  const int d = S.dim();
  if (d == 0) return {true, kInf, kInf};
  const CMatrix restricted = S.vectors.transpose().cast<cplx>() * q.matrix() * S.vectors.cast<cplx>();
  const RMatrix A = restricted.real();
  const RMatrix C = restricted.imag();

  std::vector<RVector> starts;
  double lower = 0.0;
  constexpr int kAngles = 72;
  for (int k = 0; k < kAngles; ++k) {
    const double t = std::numbers::pi * k / kAngles;  // t and t + pi give the same eigenvectors
    const RMatrix M = std::cos(t) * A + std::sin(t) * C;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(M);
    const RVector& ev = es.eigenvalues();
    if (ev(0) > 0.0 || ev(d - 1) < 0.0) lower = std::max(lower, std::min(std::abs(ev(0)), std::abs(ev(d - 1))));
    for (int i = 0; i < d; ++i) starts.push_back(es.eigenvectors().col(i));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int r = 0; r < 10 * d * d; ++r) {
    RVector v(d);
    for (int i = 0; i < d; ++i) v(i) = gauss(rng);
    starts.push_back(v);
  }
  // Refine only the most promising starts; descending from all of them is
  // wasted work once the minimum is located.
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const RVector un = starts[i].normalized();
    ranked.emplace_back(std::hypot(un.dot(A * un), un.dot(C * un)), i);
  }
  std::sort(ranked.begin(), ranked.end());
  double best = ranked.front().first;
  const std::size_t refine = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(10 * d * d + 2 * d));
  for (std::size_t i = 0; i < refine; ++i) best = std::min(best, detail::descend_modulus(A, C, starts[ranked[i].second]));

  const double threshold = tol.ellipticity * std::max(q.norm(), 1e-300);
  return {best > threshold, best, std::min(lower, best)};
}

/// Symplectic Gram-Schmidt on span(B). At each step the pair of remaining
/// vectors with the largest sigma-pairing is normalized, the rest is
/// sigma-projected off that pair and re-orthonormalized.
inline SymplecticPairs symplectic_basis(const SubspaceBasis& B, const Tolerances& tol = {}) {
  const int dim = 2 * B.n;
  const int d = B.dim();
  if (d % 2 == 1) throw HypothesisError("symplectic_basis: odd-dimensional subspace is not symplectic");
  const int m = d / 2;
  SymplecticPairs out{RMatrix(dim, m), RMatrix(dim, m)};
  const RMatrix J = symplectic_matrix(B.n);
  RMatrix W = B.vectors;
  for (int k = 0; k < m; ++k) {
    const RMatrix G = W.transpose() * J * W;
    Eigen::Index row = 0, col = 0;
    G.cwiseAbs().maxCoeff(&row, &col);
    const Eigen::Index bi = std::min(row, col), bj = std::max(row, col);
    const double s = G(bj, bi);  // sigma(w_j, w_i)
    if (std::abs(s) <= tol.rank)
      throw HypothesisError("symplectic_basis: sigma is degenerate on the subspace");
    const RVector e = W.col(bi) / std::sqrt(std::abs(s));
    const RVector eps = W.col(bj) * ((s > 0 ? 1.0 : -1.0) / std::sqrt(std::abs(s)));
    out.e.col(k) = e;
    out.eps.col(k) = eps;
    if (k + 1 == m) break;
    RMatrix rest(dim, W.cols() - 2);
    for (Eigen::Index c = 0, r = 0; c < W.cols(); ++c) {
      if (c == bi || c == bj) continue;
      const RVector w = W.col(c);
      const double c1 = -sigma(w, eps);
      const double c2 = sigma(w, e);
      rest.col(r++) = w - c1 * e - c2 * eps;
    }
    Eigen::HouseholderQR<RMatrix> qr(rest);
    W = qr.householderQ() * RMatrix::Identity(dim, rest.cols());
  }
  // One reorthogonalization sweep against accumulated rounding.
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < k; ++j) {
      for (RMatrix* target : {&out.e, &out.eps}) {
        RVector w = target->col(k);
        const double c1 = -sigma(w, RVector(out.eps.col(j)));
        const double c2 = sigma(w, RVector(out.e.col(j)));
        target->col(k) = w - c1 * out.e.col(j) - c2 * out.eps.col(j);
      }
    }
    const double s = sigma(RVector(out.eps.col(k)), RVector(out.e.col(k)));
    out.eps.col(k) /= s;
  }
  return out;
}

/// sigma-orthogonal complement {Y : sigma(Y, s) = 0 for all s in S}.
inline SubspaceBasis symplectic_complement(const SubspaceBasis& S, const Tolerances& tol = {}) {
  if (S.dim() == 0) return SubspaceBasis::whole(S.n);
  const RMatrix constraints = S.vectors.transpose() * symplectic_matrix(S.n);
  return {S.n, linalg::null_space(constraints, tol.rank)};
}

/// Max |sigma(u, v)| for u in span(A), v in span(B).
inline double sigma_coupling(const SubspaceBasis& A, const SubspaceBasis& B) {
  if (A.dim() == 0 || B.dim() == 0) return 0.0;
  const RMatrix G = A.vectors.transpose() * symplectic_matrix(A.n) * B.vectors;
  return G.cwiseAbs().maxCoeff();
}

/// Real eigenvalue decomposition S = S_{l_1} (+) ... (+) S_{l_r} of the
/// singular space under partial ellipticity. On S the Hamilton map is i K with
/// K = B^T (Im F) B real, so the real eigenvalues l of F are the purely
/// imaginary eigenvalues i l of K and S_l is the real kernel of K^2 + l^2.
inline SingularSpaceReport real_eigen_blocks(const QuadraticForm& q, const SubspaceBasis& S,
                                             const Tolerances& tol = {}) {
  q.require_dissipative(tol);
  SingularSpaceReport rep;
  rep.S = S;
  rep.is_symplectic = is_symplectic(S, tol);
  const EllipticityCheck ell = check_partial_ellipticity(q, S, tol);
  rep.is_partially_elliptic = ell.elliptic;
  rep.ellipticity_margin = ell.margin;
  rep.ellipticity_lower_bound = ell.lower_bound;
  if (!ell.elliptic) throw HypothesisError("real_eigen_blocks: q is not elliptic on its singular space");

  const HamiltonMap h = hamilton_map(q);
  const int n = q.n();
  {
    RMatrix stacked(4 * n, 2 * n);
    stacked << h.re(), h.im();
    rep.S0 = {n, linalg::null_space(stacked, tol.rank)};
  }
  Eigen::ComplexEigenSolver<CMatrix> full(h.F, false);
  for (Eigen::Index i = 0; i < full.eigenvalues().size(); ++i) {
    const cplx l = full.eigenvalues()(i);
    if (std::abs(l) <= tol.realness * std::max(1.0, h.F.norm()))
      throw HypothesisError("real_eigen_blocks: 0 is an eigenvalue of F although q is elliptic on S (dim S0 = " +
                            std::to_string(rep.S0.dim()) + ")");
  }
  const int d = S.dim();
  if (d == 0) return rep;

  const RMatrix K = S.vectors.transpose() * h.im() * S.vectors;
  Eigen::EigenSolver<RMatrix> es(K, false);
  std::vector<double> lams;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> k = es.eigenvalues()(i);
    // lambda = i k is real iff k is purely imaginary
    if (std::abs(k.real()) <= tol.realness * (1.0 + std::abs(k)) && k.imag() > 0.0) lams.push_back(k.imag());
    else if (std::abs(k.real()) > tol.realness * (1.0 + std::abs(k)))
      rep.diagnostics.push_back("F restricted to S has a non-real eigenvalue; S is not a sum of real eigenspaces");
  }
  std::sort(lams.begin(), lams.end());
  for (double l : lams)
    if (rep.real_eigenvalues.empty() || l - rep.real_eigenvalues.back() > tol.cluster * (1.0 + l) * 1e2)
      rep.real_eigenvalues.push_back(l);

  int total = 0;
  const double kscale = std::max(K.norm() * K.norm(), 1e-300);
  for (double l : rep.real_eigenvalues) {
    const RMatrix G = K * K + l * l * RMatrix::Identity(d, d);
    Eigen::JacobiSVD<RMatrix> svd(G, Eigen::ComputeFullV);
    const RVector& s = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > tol.realness * kscale) ++rank;
    const RMatrix coords = svd.matrixV().rightCols(d - rank);
    SubspaceBasis block{n, linalg::orthonormal_span(S.vectors * coords, tol.rank)};
    total += block.dim();
    rep.blocks.push_back(std::move(block));
  }
  if (total != d)
    rep.diagnostics.push_back("eigen blocks have total dimension " + std::to_string(total) + " but dim S = " +
                              std::to_string(d));
  for (std::size_t i = 0; i < rep.blocks.size(); ++i) {
    if (!is_symplectic(rep.blocks[i], tol)) rep.diagnostics.push_back("block " + std::to_string(i) + " is not symplectic");
    for (std::size_t j = i + 1; j < rep.blocks.size(); ++j)
      if (sigma_coupling(rep.blocks[i], rep.blocks[j]) > tol.symplectic)
        rep.diagnostics.push_back("blocks " + std::to_string(i) + " and " + std::to_string(j) +
                                  " are not symplectically orthogonal");
  }
  // Real eigenvalues of the full F must be exactly the +-lambda_j found on S.
  for (Eigen::Index i = 0; i < full.eigenvalues().size(); ++i) {
    const cplx l = full.eigenvalues()(i);
    if (std::abs(l.imag()) > tol.realness * (1.0 + std::abs(l))) continue;
    const bool known = std::any_of(rep.real_eigenvalues.begin(), rep.real_eigenvalues.end(), [&](double r) {
      return std::abs(std::abs(l.real()) - r) <= 1e2 * tol.realness * (1.0 + r);
    });
    if (!known) rep.diagnostics.push_back("real eigenvalue of F outside the singular space blocks");
  }
  return rep;
}

/// Full singular space analysis: S, symplecticity, partial ellipticity and,
/// when q is elliptic on S, the real eigen blocks.
inline SingularSpaceReport analyze_singular_space(const QuadraticForm& q, const Tolerances& tol = {}) {
  const HamiltonMap h = hamilton_map(q);
  const SubspaceBasis S = compute_singular_space(h, tol);
  const EllipticityCheck ell = check_partial_ellipticity(q, S, tol);
  if (ell.elliptic && q.is_dissipative(tol)) return real_eigen_blocks(q, S, tol);
  SingularSpaceReport rep;
  rep.S = S;
  rep.is_symplectic = is_symplectic(S, tol);
  rep.is_partially_elliptic = ell.elliptic;
  rep.ellipticity_margin = ell.margin;
  rep.ellipticity_lower_bound = ell.lower_bound;
  RMatrix stacked(4 * q.n(), 2 * q.n());
  stacked << h.re(), h.im();
  rep.S0 = {q.n(), linalg::null_space(stacked, tol.rank)};
  if (rep.S0.dim() > 0 && !ell.elliptic)
    rep.diagnostics.push_back("F has a real kernel of dimension " + std::to_string(rep.S0.dim()));
  return rep;
}

}  // namespace quadspec
