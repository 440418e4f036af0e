#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "common.hpp"
#include "decomposition.hpp"
#include "quadform.hpp"

namespace quadspec {

using SparseC = Eigen::SparseMatrix<cplx>;

inline constexpr int kMaxGalerkinN = 60;
inline constexpr int kMaxGalerkinDims = 3;
inline constexpr Eigen::Index kMaxDenseDim = 6000;

/// Hermite multi-indices gamma in N^n with |gamma| <= N, graded: by total
/// degree, then lexicographically descending inside a degree, so that
/// (d,0,..,0) comes first. The first binom(L+n, n) entries are the same for
/// every N >= L.
class HermiteBasis {
 public:
  using Index = std::array<int, 4>;

  HermiteBasis(int n, int N) : n_(n), N_(N) {
    if (n < 1 || n > 4) throw DimensionError("HermiteBasis: 1 <= n <= 4 required");
    if (N < 0) throw DimensionError("HermiteBasis: N must be nonnegative");
    for (int deg = 0; deg <= N; ++deg) {
      Index g{};
      fill(0, deg, g);
    }
    for (std::size_t i = 0; i < indices_.size(); ++i) lookup_.emplace(key(indices_[i]), static_cast<int>(i));
  }

  int n() const { return n_; }
  int N() const { return N_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const Index& operator[](int i) const { return indices_[i]; }

  int degree(const Index& g) const {
    int s = 0;
    for (int j = 0; j < n_; ++j) s += g[j];
    return s;
  }

  /// Position of gamma, or -1 outside the truncation.
  int find(const Index& g) const {
    auto it = lookup_.find(key(g));
    return it == lookup_.end() ? -1 : it->second;
  }

  static std::uint64_t key(const Index& g) {
    std::uint64_t k = 0;
    for (int v : g) k = (k << 16) | static_cast<std::uint64_t>(v);
    return k;
  }

 private:
  void fill(int slot, int remaining, Index& g) {
    if (slot == n_ - 1) {
      g[slot] = remaining;
      indices_.push_back(g);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      g[slot] = v;
      fill(slot + 1, remaining - v, g);
    }
    g[slot] = 0;
  }

  int n_, N_;
  std::vector<Index> indices_;
  std::unordered_map<std::uint64_t, int> lookup_;
};

/// Phase-space coordinates as ladder combinations: x_j = (a_j + a_j^+)/sqrt2,
/// D_j = (a_j - a_j^+)/(i sqrt2). Ladder slot l < n is a_l, l >= n is a_{l-n}^+.
/// Returns c with z_m = sum_l c(m, l) b_l.
inline CMatrix ladder_transform(int n) {
  const double s = 1.0 / std::numbers::sqrt2;
  CMatrix c = CMatrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    c(j, j) = s;
    c(j, n + j) = s;
    c(n + j, j) = cplx(0.0, -s);
    c(n + j, n + j) = cplx(0.0, s);
  }
  return c;
}

/// Weyl quantization of a homogeneous polynomial given as a symmetric tensor
/// in ladder coordinates: sum_l T_l b_{l_1} ... b_{l_k}. For a symmetric T
/// this sum is already Weyl (fully symmetric) ordered.
struct LadderPolynomial {
  int n = 0;
  int degree = 0;
  std::vector<std::pair<std::vector<int>, cplx>> terms;  // word (applied right to left), coefficient
};

namespace detail {

inline void sym_tensor_terms(const std::vector<cplx>& dense, int slots, int degree, LadderPolynomial& out) {
  const std::size_t total = dense.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    if (dense[flat] == cplx(0.0)) continue;
    std::vector<int> word(degree);
    std::size_t rem = flat;
    for (int p = degree - 1; p >= 0; --p) {
      word[p] = static_cast<int>(rem % slots);
      rem /= slots;
    }
    out.terms.emplace_back(std::move(word), dense[flat]);
  }
}

}  // namespace detail

/// Ladder form of the Weyl quantization of X^T Q X.
inline LadderPolynomial ladder_quadratic(const CMatrix& Q, int n) {
  const CMatrix c = ladder_transform(n);
  const CMatrix C = c.transpose() * Q * c;
  const int slots = 2 * n;
  std::vector<cplx> dense(slots * slots);
  for (int i = 0; i < slots; ++i)
    for (int j = 0; j < slots; ++j) dense[i * slots + j] = C(i, j);
  LadderPolynomial p{n, 2, {}};
  detail::sym_tensor_terms(dense, slots, 2, p);
  return p;
}

/// Ladder form of the Weyl quantization of (X^T W X)^2: the symmetrization
/// over the 4 slots of (c^T W c) (x) (c^T W c).
inline LadderPolynomial ladder_quartic(const CMatrix& W, int n) {
  const CMatrix c = ladder_transform(n);
  const CMatrix C = c.transpose() * W * c;
  const int s = 2 * n;
  std::vector<cplx> dense(static_cast<std::size_t>(s) * s * s * s, cplx(0.0));
  auto at = [&](int a, int b, int cc, int d) -> cplx& { return dense[((a * s + b) * s + cc) * s + d]; };
  static constexpr int perms[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
  // sym(C (x) C) averages C_{l_a l_b} C_{l_c l_d} over the 3 pairings of the
  // 4 slots (C is symmetric, so the 24 permutations collapse to 3).
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b)
      for (int cc = 0; cc < s; ++cc)
        for (int d = 0; d < s; ++d) {
          const int l[4] = {a, b, cc, d};
          cplx v = 0.0;
          for (const auto& p : perms) v += C(l[p[0]], l[p[1]]) * C(l[p[2]], l[p[3]]);
          at(a, b, cc, d) = v / 3.0;
        }
  LadderPolynomial p{n, 4, {}};
  detail::sym_tensor_terms(dense, s, 4, p);
  return p;
}

/// Exact compression P_N (operator) P_N: every word is applied on the full
/// Hermite lattice and only the final state is projected.
inline SparseC assemble(const LadderPolynomial& poly, const HermiteBasis& basis, cplx identity_coeff = 0.0) {
  const int n = basis.n();
  std::vector<Eigen::Triplet<cplx>> trips;
  for (int col = 0; col < basis.size(); ++col) {
    if (identity_coeff != cplx(0.0)) trips.emplace_back(col, col, identity_coeff);
    for (const auto& [word, coeff] : poly.terms) {
      HermiteBasis::Index g = basis[col];
      double amp = 1.0;
      bool alive = true;
      for (auto it = word.rbegin(); it != word.rend(); ++it) {
        const int l = *it;
        if (l < n) {
          if (g[l] == 0) {
            alive = false;
            break;
          }
          amp *= std::sqrt(static_cast<double>(g[l]));
          g[l] -= 1;
        } else {
          g[l - n] += 1;
          amp *= std::sqrt(static_cast<double>(g[l - n]));
        }
      }
      if (!alive) continue;
      const int row = basis.find(g);
      if (row >= 0) trips.emplace_back(row, col, coeff * amp);
    }
  }
  SparseC M(basis.size(), basis.size());
  M.setFromTriplets(trips.begin(), trips.end());
  M.prune(cplx(0.0));
  return M;
}

/// Matrix of q(x, xi)^w in the orthonormal Hermite basis with |gamma| <= N.
struct GalerkinOperator {
  int n = 0;
  int N = 0;
  int dim = 0;
  SparseC M;

  CMatrix dense() const {
    if (dim > kMaxDenseDim) throw DimensionError("Galerkin matrix too large for dense algebra");
    return CMatrix(M);
  }
};

inline void check_galerkin_bounds(int n, int N) {
  if (n > kMaxGalerkinDims) throw DimensionError("Galerkin oracle supports n <= 3");
  if (N > kMaxGalerkinN) throw DimensionError("Galerkin oracle supports N <= 60");
}

inline GalerkinOperator weyl_matrix(const QuadraticForm& q, int N) {
  if (N < 2) throw PreconditionError("weyl_matrix: N >= 2 required");
  check_galerkin_bounds(q.n(), N);
  const HermiteBasis basis(q.n(), N);
  return {q.n(), N, basis.size(), assemble(ladder_quadratic(q.matrix(), q.n()), basis)};
}

/// Sorts by real part descending (compared on a 1e-8 grid so that solver
/// noise does not split ties), then by |Im| ascending, then Im descending.
inline void sort_spectrum(std::vector<cplx>& v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    const double ra = std::round(a.real() * 1e8), rb = std::round(b.real() * 1e8);
    if (ra != rb) return ra > rb;
    if (std::abs(a.imag()) != std::abs(b.imag())) return std::abs(a.imag()) < std::abs(b.imag());
    return a.imag() > b.imag();
  });
}

inline std::vector<cplx> sorted_eigenvalues(const CMatrix& M) {
  Eigen::ComplexEigenSolver<CMatrix> es(M, false);
  std::vector<cplx> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  sort_spectrum(v);
  return v;
}

/// A quadratic symbol changes the total degree by 0 or 2, so the Galerkin
/// matrix is block diagonal over even and odd |gamma|. Returns the dense
/// blocks (either may be empty).
inline std::array<CMatrix, 2> parity_blocks(const GalerkinOperator& G) {
  if (G.dim > kMaxDenseDim) throw DimensionError("Galerkin matrix too large for dense algebra");
  const HermiteBasis basis(G.n, G.N);
  std::array<std::vector<int>, 2> idx;
  for (int i = 0; i < basis.size(); ++i) idx[basis.degree(basis[i]) % 2].push_back(i);
  std::array<CMatrix, 2> out;
  for (int p = 0; p < 2; ++p) out[p] = CMatrix::Zero(idx[p].size(), idx[p].size());
  std::vector<int> pos(basis.size());
  for (int p = 0; p < 2; ++p)
    for (std::size_t k = 0; k < idx[p].size(); ++k) pos[idx[p][k]] = static_cast<int>(k);
  for (int c = 0; c < G.M.outerSize(); ++c)
    for (SparseC::InnerIterator it(G.M, c); it; ++it) {
      const int r = static_cast<int>(it.row()), col = static_cast<int>(it.col());
      const int p = basis.degree(basis[r]) % 2;
      if (p != basis.degree(basis[col]) % 2) throw Error("parity_blocks: matrix couples even and odd degrees");
      out[p](pos[r], pos[col]) = it.value();
    }
  return out;
}

/// Eigenvalues of the Galerkin matrix, computed blockwise and sorted as in
/// sort_spectrum.
inline std::vector<cplx> galerkin_eigenvalues(const GalerkinOperator& G) {
  std::vector<cplx> v;
  for (const CMatrix& B : parity_blocks(G)) {
    if (B.size() == 0) continue;
    Eigen::ComplexEigenSolver<CMatrix> es(B, false);
    v.insert(v.end(), es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  }
  sort_spectrum(v);
  return v;
}

struct ConvergedEigenvalue {
  cplx value;       // from the finer truncation
  cplx coarse;      // from the coarser truncation
  double movement;  // |fine - coarse|
};

struct ConvergedEigenvalues {
  int N = 0;
  int dN = 0;
  double tol_conv = 1e-6;
  std::vector<ConvergedEigenvalue> values;
  std::vector<std::string> warnings;
};

/// Eigenvalues of M_N paired with their nearest neighbours in M_{N+dN};
/// candidates are scanned by decreasing real part (at most max(3k, k + 20)
/// of them) and a pair is accepted when it moved less than
/// tol_conv * (1 + |value|).
inline ConvergedEigenvalues numerical_spectrum(const QuadraticForm& q, int N, int dN, int k,
                                               const Tolerances& tol = {}) {
  if (dN < 1) throw PreconditionError("numerical_spectrum: dN >= 1 required");
  const GalerkinOperator coarse = weyl_matrix(q, N);
  const GalerkinOperator fine = weyl_matrix(q, N + dN);
  if (k > coarse.dim) throw PreconditionError("numerical_spectrum: k exceeds the basis size");
  const auto ec = galerkin_eigenvalues(coarse);
  const auto ef = galerkin_eigenvalues(fine);
  ConvergedEigenvalues out{N, dN, tol.convergence, {}, {}};
  const std::size_t scan = std::min<std::size_t>(ec.size(), static_cast<std::size_t>(std::max(3 * k, k + 20)));
  std::vector<bool> taken(ef.size(), false);
  for (std::size_t i = 0; i < scan && static_cast<int>(out.values.size()) < k; ++i) {
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < ef.size(); ++j) {
      if (taken[j]) continue;
      const double d = std::abs(ef[j] - ec[i]);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    if (best < tol.convergence * (1.0 + std::abs(ec[i]))) {
      taken[arg] = true;
      out.values.push_back({ef[arg], ec[i], best});
    }
  }
  if (static_cast<int>(out.values.size()) < k)
    out.warnings.push_back("only " + std::to_string(out.values.size()) + " of " + std::to_string(k) +
                           " eigenvalues converged");
  return out;
}

/// exp(t M) v by truncated Taylor series with scaling: the interval is cut
/// into s steps with t |M|_1 / s <= 1, each summed until the terms stall.
inline CVector expm_action(const SparseC& M, double t, const CVector& v) {
  double norm1 = 0.0;
  for (int c = 0; c < M.outerSize(); ++c) {
    double col = 0.0;
    for (SparseC::InnerIterator it(M, c); it; ++it) col += std::abs(it.value());
    norm1 = std::max(norm1, col);
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) * norm1)));
  const double h = t / steps;
  CVector x = v;
  for (int s = 0; s < steps; ++s) {
    CVector term = x;
    CVector acc = x;
    for (int j = 1; j < 200; ++j) {
      term = (h / j) * (M * term);
      acc += term;
      if (term.norm() <= 1e-17 * acc.norm()) break;
    }
    x = acc;
  }
  return x;
}

struct NormSample {
  double t = 0.0;
  double norm = 0.0;
};

/// ||exp(t M)||_2 for each t, with exp by Pade scaling and squaring on each
/// parity block (the norm is the larger of the two block norms).
inline std::vector<NormSample> semigroup_norm_curve(const QuadraticForm& q, int N, const std::vector<double>& times) {
  const GalerkinOperator G = weyl_matrix(q, N);
  const auto blocks = parity_blocks(G);
  double mnorm = 0.0;
  for (const CMatrix& B : blocks)
    if (B.size() > 0) mnorm = std::max(mnorm, B.cwiseAbs().colwise().sum().maxCoeff());
  std::vector<NormSample> out;
  for (double t : times) {
    if (t < 0.0) throw PreconditionError("semigroup_norm_curve: negative time");
    if (t * mnorm > 1e4) throw Error("semigroup_norm_curve: t |M| exceeds 1e4, exponential would overflow");
    if (t == 0.0) {
      out.push_back({t, 1.0});
      continue;
    }
    double norm = 0.0;
    for (const CMatrix& B : blocks)
      if (B.size() > 0) norm = std::max(norm, linalg::spectral_norm(CMatrix(CMatrix(t * B).exp())));
    out.push_back({t, norm});
  }
  return out;
}

struct DecayFit {
  double rate = 0.0;       // a^ = -slope
  double intercept = 0.0;  // log of the prefactor
  int samples = 0;
};

/// Least-squares slope of log ||exp(tM)|| over t0 <= t <= t1.
inline DecayFit decay_fit(const std::vector<NormSample>& curve, double t0, double t1) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : curve)
    if (s.t >= t0 - 1e-12 && s.t <= t1 + 1e-12) {
      if (!(s.norm > 0.0)) throw PreconditionError("decay_fit: nonpositive norm in window");
      pts.emplace_back(s.t, std::log(s.norm));
    }
  if (pts.size() < 5) throw PreconditionError("decay_fit: window holds fewer than 5 samples");
  double mt = 0.0, my = 0.0;
  for (const auto& [t, y] : pts) {
    mt += t;
    my += y;
  }
  mt /= pts.size();
  my /= pts.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [t, y] : pts) {
    sxy += (t - mt) * (y - my);
    sxx += (t - mt) * (t - mt);
  }
  const double slope = sxy / sxx;
  return {-slope, my - slope * mt, static_cast<int>(pts.size())};
}

/// Quadratic part |x'|^2 + |xi'|^2 of the smoothing weight, written in the
/// original coordinates: (chi^{-1})^T P' chi^{-1}.
inline RMatrix primed_weight(const SymplecticSplit& sp) {
  const Eigen::Index d = sp.chi.rows();
  const int n = static_cast<int>(d / 2);
  RMatrix P = RMatrix::Zero(d, d);
  for (int i : primed_indices(n, sp.n_prime)) P(i, i) = 1.0;
  const RMatrix inv = sp.chi.inverse();
  return inv.transpose() * P * inv;
}

/// Compression of ((1 + |x'|^2 + |xi'|^2)^p)^w, p in {1, 2}.
inline SparseC weight_matrix(const RMatrix& W2, const HermiteBasis& basis, int p) {
  const int n = basis.n();
  const CMatrix W = W2.cast<cplx>();
  if (p == 1) return assemble(ladder_quadratic(W, n), basis, 1.0);
  if (p == 2) {
    SparseC quad = assemble(ladder_quadratic(W, n), basis, 0.0);
    SparseC quart = assemble(ladder_quartic(W, n), basis, 0.0);
    SparseC id(basis.size(), basis.size());
    id.setIdentity();
    return SparseC(id + 2.0 * quad + quart);
  }
  throw PreconditionError("smoothing weight power p must be 1 or 2");
}

struct SmoothingRow {
  std::string vector;  // "ground", "random_low" or "random_full"
  double value_coarse = 0.0;
  double value_fine = 0.0;
  double relative_change = 0.0;
  bool stabilized = false;
};

struct SmoothingTable {
  double t = 0.0;
  int p = 1;
  int N = 0;
  int dN = 0;
  double tolerance = 1e-2;
  std::vector<SmoothingRow> rows;
};

/// Weighted norms ||W_p exp(t M) u|| for three test vectors across the
/// truncations N and N + dN:
///  - ground: the first Hermite function;
///  - random_low: seeded Gaussian coefficients on degrees |gamma| <= 6, the
///    same vector in both truncations;
///  - random_full: a seeded random unit vector of the whole truncated space,
///    drawn afresh for each truncation (a generic L^2 element).
inline SmoothingTable smoothing_diagnostic(const QuadraticForm& q, const SymplecticSplit& sp, int N, int dN, double t,
                                           int p, unsigned seed = 1, const Tolerances& tol = {}) {
  if (t < 0.0) throw PreconditionError("smoothing_diagnostic: t must be nonnegative");
  if (p < 1 || p > 2) throw PreconditionError("smoothing_diagnostic: p > 2 unsupported (weight no longer quadratic)");
  const RMatrix W2 = primed_weight(sp);
  SmoothingTable table{t, p, N, dN, tol.stabilization, {}};
  constexpr int kLowDegree = 6;
  std::array<std::array<double, 2>, 3> values{};
  const int truncs[2] = {N, N + dN};
  for (int which = 0; which < 2; ++which) {
    const int NN = truncs[which];
    const GalerkinOperator G = weyl_matrix(q, NN);
    const HermiteBasis basis(q.n(), NN);
    const SparseC W = weight_matrix(W2, basis, p);
    std::vector<CVector> vecs;
    CVector ground = CVector::Zero(G.dim);
    ground(0) = 1.0;
    vecs.push_back(ground);
    {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> gauss;
      const int low = HermiteBasis(q.n(), std::min(kLowDegree, NN)).size();
      CVector v = CVector::Zero(G.dim);
      for (int i = 0; i < low; ++i) v(i) = cplx(gauss(rng), gauss(rng));
      vecs.push_back(v.normalized());
    }
    {
      std::mt19937_64 rng(seed + 7919u * static_cast<unsigned>(NN));
      std::normal_distribution<double> gauss;
      CVector v(G.dim);
      for (int i = 0; i < G.dim; ++i) v(i) = cplx(gauss(rng), gauss(rng));
      vecs.push_back(v.normalized());
    }
    for (int k = 0; k < 3; ++k) {
      const CVector evolved = t == 0.0 ? vecs[k] : expm_action(G.M, t, vecs[k]);
      values[k][which] = (W * evolved).norm();
    }
  }
  const char* names[3] = {"ground", "random_low", "random_full"};
  for (int k = 0; k < 3; ++k) {
    SmoothingRow row{names[k], values[k][0], values[k][1], 0.0, false};
    row.relative_change = std::abs(row.value_fine - row.value_coarse) / std::max(row.value_fine, 1e-300);
    row.stabilized = row.relative_change < tol.stabilization;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace quadspec
