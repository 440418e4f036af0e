#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "common.hpp"
#include "quadform.hpp"
#include "singular_space.hpp"

namespace quadspec {

/// Symplectic normal form eps * sum_j lambda_j (x_j^2 + xi_j^2) of a definite
/// real quadratic form.
struct NormalForm {
  int epsilon = 1;
  std::vector<double> lambdas;  // ascending, all > 0
};

/// Symplectic change of coordinates chi with (q o chi) = q1(x', xi') + i q2~(x'', xi'').
///
/// Column layout of chi: new coordinate x_k is column k, xi_k is column n+k;
/// the primed block occupies k < n', the double-primed block n' <= k < n.
struct SymplecticSplit {
  RMatrix chi;
  int n_prime = 0;
  int n_dprime = 0;
  std::optional<QuadraticForm> q1;        // absent when n' = 0
  std::optional<RMatrix> q2_tilde;        // 2n'' x 2n'' real, absent when n'' = 0
  std::optional<NormalForm> normal_form;  // present when q2~ is definite (or n'' = 0)
  double cross_residual = 0.0;
  double symplectic_residual = 0.0;
  double q2_real_residual = 0.0;
  int q1_singular_dim = 0;  // dimension of the singular space of q1, expected 0
  std::vector<std::string> diagnostics;
};

/// Index lists for the primed and double-primed coordinates inside the
/// global (x, xi) layout of chi.
inline std::vector<int> primed_indices(int n, int n_prime) {
  std::vector<int> idx;
  for (int k = 0; k < n_prime; ++k) idx.push_back(k);
  for (int k = 0; k < n_prime; ++k) idx.push_back(n + k);
  return idx;
}

inline std::vector<int> dprimed_indices(int n, int n_prime) {
  std::vector<int> idx;
  for (int k = n_prime; k < n; ++k) idx.push_back(k);
  for (int k = n_prime; k < n; ++k) idx.push_back(n + k);
  return idx;
}

template <class M>
M select_block(const M& A, const std::vector<int>& rows, const std::vector<int>& cols) {
  M out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = A(rows[i], cols[j]);
  return out;
}

/// Williamson invariants of a definite real form: lambda_j are the moduli of
/// the eigenvalues +-i lambda_j of its Hamilton map J^{-1} Q2.
inline NormalForm normal_form_q2(const RMatrix& q2_tilde, const Tolerances& tol = {}) {
  const Eigen::Index d = q2_tilde.rows();
  if (d % 2 != 0 || q2_tilde.cols() != d) throw DimensionError("normal_form_q2: matrix must be 2m x 2m");
  NormalForm nf;
  if (d == 0) return nf;
  const RMatrix sym = (q2_tilde + q2_tilde.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(d - 1);
  const double scale = std::max(std::abs(lo), std::abs(hi));
  const double thresh = tol.ellipticity * std::max(scale, 1e-300);
  if (lo > thresh) nf.epsilon = 1;
  else if (hi < -thresh) nf.epsilon = -1;
  else throw HypothesisError("normal_form_q2: form is indefinite or degenerate");

  const int m = static_cast<int>(d / 2);
  RMatrix F(d, d);
  F.topRows(m) = sym.bottomRows(m);
  F.bottomRows(m) = -sym.topRows(m);
  Eigen::EigenSolver<RMatrix> ev(F, false);
  std::vector<double> im;
  for (Eigen::Index i = 0; i < d; ++i) im.push_back(std::abs(ev.eigenvalues()(i).imag()));
  std::sort(im.begin(), im.end());
  // each lambda appears twice (+-i lambda)
  for (int j = 0; j < m; ++j) nf.lambdas.push_back(0.5 * (im[2 * j] + im[2 * j + 1]));
  return nf;
}

/// Builds chi from symplectic bases of S^{sigma perp} and S and reads off
/// q1 and q2~ from chi^T Q chi.
inline SymplecticSplit split(const QuadraticForm& q, const SingularSpaceReport& report, const Tolerances& tol = {}) {
  if (!report.is_symplectic) throw HypothesisError("split: singular space is not symplectic");
  const int n = q.n();
  const int d = report.S.dim();
  SymplecticSplit out;
  out.n_dprime = d / 2;
  out.n_prime = n - out.n_dprime;

  if (d == 0 || d == 2 * n) {
    out.chi = RMatrix::Identity(2 * n, 2 * n);
  } else {
    const SymplecticPairs inner = symplectic_basis(report.S, tol);
    const SymplecticPairs outer = symplectic_basis(symplectic_complement(report.S, tol), tol);
    if (outer.size() != out.n_prime) throw HypothesisError("split: complement has unexpected dimension");
    out.chi = RMatrix(2 * n, 2 * n);
    out.chi.leftCols(out.n_prime) = outer.e;
    out.chi.middleCols(out.n_prime, out.n_dprime) = inner.e;
    out.chi.middleCols(n, out.n_prime) = outer.eps;
    out.chi.rightCols(out.n_dprime) = inner.eps;
  }
  const RMatrix J = symplectic_matrix(n);
  out.symplectic_residual = (out.chi.transpose() * J * out.chi - J).cwiseAbs().maxCoeff();
  if (out.symplectic_residual > 1e2 * tol.symplectic)
    throw Error("split: chi is not symplectic (residual " + std::to_string(out.symplectic_residual) + ")");

  const CMatrix chic = out.chi.cast<cplx>();
  const CMatrix Qc = chic.transpose() * q.matrix() * chic;
  const auto p1 = primed_indices(n, out.n_prime);
  const auto p2 = dprimed_indices(n, out.n_prime);
  const double scale = std::max(Qc.norm(), 1e-300);
  if (!p1.empty() && !p2.empty()) out.cross_residual = select_block(Qc, p1, p2).cwiseAbs().maxCoeff() / scale;
  if (out.cross_residual > tol.split_residual)
    throw Error("split: cross terms between the blocks do not vanish (relative " + std::to_string(out.cross_residual) +
                ")");

  if (out.n_prime > 0) {
    out.q1 = QuadraticForm(out.n_prime, select_block(Qc, p1, p1));
    out.q1_singular_dim = compute_singular_space(hamilton_map(*out.q1), tol).dim();
    if (out.q1_singular_dim != 0)
      out.diagnostics.push_back("singular space of q1 has dimension " + std::to_string(out.q1_singular_dim));
  }
  if (out.n_dprime > 0) {
    const CMatrix block = select_block(Qc, p2, p2);
    out.q2_real_residual = block.real().cwiseAbs().maxCoeff() / scale;
    if (out.q2_real_residual > tol.split_residual)
      throw Error("split: real part on the singular space does not vanish");
    out.q2_tilde = RMatrix(block.imag());
    try {
      out.normal_form = normal_form_q2(*out.q2_tilde, tol);
    } catch (const HypothesisError& e) {
      out.diagnostics.push_back(e.what());
    }
  } else {
    out.normal_form = NormalForm{};
  }
  return out;
}

/// Flow of the Hamilton vector field of Im q1: exp(2 t Im F1).
inline RMatrix hamiltonian_flow(const QuadraticForm& q1, double t) {
  const RMatrix G = 2.0 * t * hamilton_map(q1).im();
  return G.exp();
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_N).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int points) {
  if (points < 1) throw PreconditionError("gauss_legendre: need at least one point");
  std::vector<double> x(points), w(points);
  const int half = (points + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= points; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = points * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[points - 1 - i] = z;
    w[i] = w[points - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Time average (1/2T) int_{-T}^{T} Re q1(e^{t H_{Im q1}} X) dt as a real
/// symmetric matrix. Gauss-Legendre with `points` nodes, checked against
/// 2 * points nodes.
inline RMatrix averaged_real_part(const QuadraticForm& q1, double T, int quadrature_points = 64,
                                  const Tolerances& tol = {}) {
  if (!(T > 0.0)) throw PreconditionError("averaged_real_part: T must be positive");
  q1.require_dissipative(tol);
  const RMatrix reQ = q1.re();
  const RMatrix imF = hamilton_map(q1).im();
  auto integrate = [&](int pts) {
    const auto [x, w] = gauss_legendre(pts);
    RMatrix acc = RMatrix::Zero(reQ.rows(), reQ.cols());
    for (int i = 0; i < pts; ++i) {
      const RMatrix M = RMatrix(2.0 * T * x[i] * imF).exp();
      acc += w[i] * (M.transpose() * reQ * M);
    }
    return RMatrix(0.5 * acc);  // (1/2T) * T * sum
  };
  const RMatrix coarse = integrate(quadrature_points);
  const RMatrix fine = integrate(2 * quadrature_points);
  const double diff = (coarse - fine).norm() / std::max(fine.norm(), 1e-300);
  if (diff > tol.quadrature)
    throw ConvergenceError("averaged_real_part: quadrature with " + std::to_string(quadrature_points) +
                           " and " + std::to_string(2 * quadrature_points) + " points disagree (" +
                           std::to_string(diff) + ")");
  return (fine + fine.transpose()) * 0.5;
}

/// sum_{j=0}^{2n-1} ((Im F1)^j)^T Re Q1 (Im F1)^j.
inline RMatrix r_form(const QuadraticForm& q1) {
  const RMatrix reQ = q1.re();
  const RMatrix imF = hamilton_map(q1).im();
  RMatrix P = RMatrix::Identity(reQ.rows(), reQ.cols());
  RMatrix acc = RMatrix::Zero(reQ.rows(), reQ.cols());
  for (int j = 0; j < q1.dim(); ++j) {
    acc += P.transpose() * reQ * P;
    P = imF * P;
  }
  return (acc + acc.transpose()) * 0.5;
}

}  // namespace quadspec
