#pragma once

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "common.hpp"
#include "quadform.hpp"

// Seeded generators for property tests and constructed families.
namespace quadspec::random {

using Rng = std::mt19937_64;

inline RMatrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  RMatrix A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = g(rng);
  return A;
}

inline RMatrix symmetric(Rng& rng, Eigen::Index d, double scale = 1.0) {
  const RMatrix A = gaussian(rng, d, d, scale);
  return (A + A.transpose()) * 0.5;
}

/// Random complex symmetric form, no sign condition.
inline QuadraticForm form(Rng& rng, int n) {
  return QuadraticForm(n, symmetric(rng, 2 * n), symmetric(rng, 2 * n));
}

/// Random form with Re q <= 0: Re Q = -L L^T with L of rank `rank`
/// (full rank when rank < 0).
inline QuadraticForm dissipative_form(Rng& rng, int n, int rank = -1) {
  const int d = 2 * n;
  const int r = rank < 0 ? d : rank;
  const RMatrix L = gaussian(rng, d, r);
  return QuadraticForm(n, RMatrix(-(L * L.transpose())), symmetric(rng, d));
}

/// Random definite real form on R^{2n}; sign +1 or -1.
inline RMatrix definite(Rng& rng, int n, int sign) {
  const int d = 2 * n;
  const RMatrix L = gaussian(rng, d, d);
  return sign * (L * L.transpose() + 0.5 * RMatrix::Identity(d, d));
}

/// Real symplectic matrix U1 diag(e^s, e^-s) [[I,0],[A,I]] U2 with U1, U2
/// orthogonal symplectic (from unitaries), |s| <= spread and A symmetric
/// with entries of size `shear`.
inline RMatrix symplectic(Rng& rng, int n, double spread = 0.5, double shear = 0.5) {
  auto orthosymplectic = [&] {
    // exp of a skew-Hermitian matrix is unitary; U = X + iY maps to [[X,-Y],[Y,X]].
    const RMatrix a = gaussian(rng, n, n), b = gaussian(rng, n, n);
    CMatrix H(n, n);
    H.real() = a - a.transpose();
    H.imag() = b + b.transpose();
    const CMatrix U = H.exp();
    RMatrix O(2 * n, 2 * n);
    O << U.real(), -U.imag(), U.imag(), U.real();
    return O;
  };
  std::uniform_real_distribution<double> u(-spread, spread);
  RMatrix D = RMatrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    const double s = u(rng);
    D(j, j) = std::exp(s);
    D(n + j, n + j) = std::exp(-s);
  }
  RMatrix Sh = RMatrix::Identity(2 * n, 2 * n);
  Sh.bottomLeftCorner(n, n) = symmetric(rng, n, shear);
  return orthosymplectic() * D * Sh * orthosymplectic();
}

}  // namespace quadspec::random
