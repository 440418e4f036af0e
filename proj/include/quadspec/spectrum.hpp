#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "decomposition.hpp"
#include "quadform.hpp"
#include "singular_space.hpp"

namespace quadspec {

/// Eigenvalue lambda of F with algebraic multiplicity r; mu = -i lambda is
/// the generator it contributes to the spectral lattice.
struct EigenCluster {
  cplx lambda;
  int r = 1;
  cplx mu;
};

struct ClusterSet {
  std::vector<EigenCluster> clusters;
  std::vector<std::string> warnings;
};

/// Eigenvalues of F grouped by mutual distance <= tol.cluster * (1 + |l|)
/// (single linkage). The cluster representative is the mean.
inline ClusterSet eigen_clusters(const HamiltonMap& h, const Tolerances& tol = {}) {
  Eigen::ComplexEigenSolver<CMatrix> es(h.F, false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  const std::size_t m = ev.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto close = [&](cplx a, cplx b, double factor) {
    return std::abs(a - b) <= factor * tol.cluster * (1.0 + std::max(std::abs(a), std::abs(b)));
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (close(ev[i], ev[j], 1.0)) parent[find(i)] = find(j);

  ClusterSet out;
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = find(i);
    auto it = std::find(roots.begin(), roots.end(), r);
    if (it == roots.end()) {
      roots.push_back(r);
      out.clusters.push_back({ev[i], 1, {}});
    } else {
      auto& c = out.clusters[it - roots.begin()];
      c.lambda = (c.lambda * static_cast<double>(c.r) + ev[i]) / static_cast<double>(c.r + 1);
      c.r += 1;
    }
  }
  for (auto& c : out.clusters) c.mu = cplx(0.0, -1.0) * c.lambda;
  std::sort(out.clusters.begin(), out.clusters.end(), [](const EigenCluster& a, const EigenCluster& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  for (std::size_t i = 0; i < out.clusters.size(); ++i)
    for (std::size_t j = i + 1; j < out.clusters.size(); ++j)
      if (close(out.clusters[i].lambda, out.clusters[j].lambda, 3.0))
        out.warnings.push_back("eigenvalue clusters " + std::to_string(i) + " and " + std::to_string(j) +
                               " are within 3x the clustering tolerance; merged grouping would have r = " +
                               std::to_string(out.clusters[i].r + out.clusters[j].r));
  return out;
}

enum class SelectionMode { elliptic, partial, q1_only };

inline const char* to_string(SelectionMode m) {
  switch (m) {
    case SelectionMode::elliptic: return "elliptic";
    case SelectionMode::partial: return "partial";
    case SelectionMode::q1_only: return "q1_only";
  }
  return "?";
}

inline SelectionMode selection_mode_from_string(const std::string& s) {
  if (s == "elliptic") return SelectionMode::elliptic;
  if (s == "partial") return SelectionMode::partial;
  if (s == "q1_only") return SelectionMode::q1_only;
  throw Error("unknown selection mode '" + s + "'");
}

/// Keeps the clusters whose generator mu lies in the open left half-plane
/// or, for `partial`, on the imaginary half-axis {i eps s : s > 0} covered by
/// q restricted to S; `elliptic` keeps mu in Sigma(q) minus the origin.
inline std::vector<EigenCluster> select_generators(std::span<const EigenCluster> clusters, SelectionMode mode,
                                                   const NormalForm* normal_form = nullptr,
                                                   const NumericalRangeCone* cone = nullptr,
                                                   const Tolerances& tol = {}) {
  if (mode == SelectionMode::partial && normal_form == nullptr)
    throw PreconditionError("select_generators: partial mode needs the normal form of q on S");
  if (mode == SelectionMode::elliptic && cone == nullptr)
    throw PreconditionError("select_generators: elliptic mode needs the numerical range");
  std::vector<EigenCluster> out;
  for (const auto& c : clusters) {
    const double re = c.mu.real(), im = c.mu.imag();
    bool keep = false;
    switch (mode) {
      case SelectionMode::q1_only: keep = re < -tol.boundary; break;
      case SelectionMode::partial:
        keep = re < -tol.boundary || (std::abs(re) <= tol.boundary && normal_form->epsilon * im > tol.boundary);
        break;
      case SelectionMode::elliptic: keep = std::abs(c.mu) > tol.boundary && cone->contains(c.mu, 1e-6); break;
    }
    if (keep) out.push_back(c);
  }
  return out;
}

struct LatticeRect {
  double re_min = -20.0;
  double im_max = 20.0;
};

struct LatticePoint {
  cplx value;
  long count = 1;  // number of (k_lambda) tuples reaching this value
};

inline LatticeRect default_rect(std::span<const EigenCluster> generators) {
  double min_re = kInf, max_im = 0.0;
  for (const auto& g : generators) {
    if (g.mu.real() < 0.0) min_re = std::min(min_re, std::abs(g.mu.real()));
    max_im = std::max(max_im, std::abs(g.mu.imag()));
  }
  if (!std::isfinite(min_re)) min_re = 0.0;
  return {-20.0 * (min_re + 1.0), 20.0 * (max_im + 1.0)};
}

/// All sums sum_l (r_l + 2 k_l) mu_l, k_l >= 0, inside
/// {re_min <= Re <= 0, |Im| <= im_max}, merged and sorted by Re descending.
inline std::vector<LatticePoint> enumerate_lattice(std::span<const EigenCluster> generators, const LatticeRect& rect,
                                                   const Tolerances& tol = {}, long node_limit = 1000000) {
  if (!(rect.re_min < 0.0)) throw PreconditionError("enumerate_lattice: re_min must be negative");
  if (generators.empty()) return {};
  std::vector<EigenCluster> damped, oscillating;
  for (const auto& g : generators) {
    if (g.mu.real() > tol.boundary) throw PreconditionError("enumerate_lattice: generator with Re mu > 0");
    if (g.mu.real() < -tol.boundary) damped.push_back(g);
    else if (std::abs(g.mu) > tol.boundary) oscillating.push_back(g);
    else throw PreconditionError("enumerate_lattice: zero generator");
  }
  // Imaginary-axis generators all point the same way (one sign epsilon).
  for (const auto& g : oscillating)
    if (g.mu.imag() * oscillating.front().mu.imag() < 0.0)
      throw PreconditionError("enumerate_lattice: imaginary generators of both signs give an unbounded lattice");

  long nodes = 0;
  auto tick = [&] {
    if (++nodes > node_limit)
      throw Error("enumerate_lattice: more than " + std::to_string(node_limit) + " nodes; use a smaller rectangle");
  };
  std::vector<cplx> damped_sums;
  std::vector<cplx> raw;
  // Damped generators: each step lowers Re by at least 2|Re mu|.
  auto dfs_damped = [&](auto&& self, std::size_t i, cplx acc) -> void {
    tick();
    if (acc.real() < rect.re_min - tol.lattice_merge) return;
    if (i == damped.size()) {
      damped_sums.push_back(acc);
      return;
    }
    const auto& g = damped[i];
    for (int k = 0;; ++k) {
      const cplx v = acc + static_cast<double>(g.r + 2 * k) * g.mu;
      if (v.real() < rect.re_min - tol.lattice_merge) break;
      self(self, i + 1, v);
    }
  };
  dfs_damped(dfs_damped, 0, cplx(0.0));

  for (const cplx base : damped_sums) {
    const double budget = rect.im_max + std::abs(base.imag()) + tol.lattice_merge;
    auto dfs_osc = [&](auto&& self, std::size_t i, cplx acc) -> void {
      tick();
      if (i == oscillating.size()) {
        if (std::abs(acc.imag()) <= rect.im_max + tol.lattice_merge) raw.push_back(acc);
        return;
      }
      const auto& g = oscillating[i];
      for (int k = 0;; ++k) {
        const cplx v = acc + static_cast<double>(g.r + 2 * k) * g.mu;
        if (std::abs(v.imag() - base.imag()) > budget) break;
        self(self, i + 1, v);
      }
    };
    dfs_osc(dfs_osc, 0, base);
  }

  std::sort(raw.begin(), raw.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  std::vector<LatticePoint> out;
  std::vector<bool> used(raw.size(), false);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (used[i]) continue;
    LatticePoint p{raw[i], 1};
    const double eps = tol.lattice_merge * (1.0 + std::abs(raw[i]));
    for (std::size_t j = i + 1; j < raw.size() && raw[i].real() - raw[j].real() <= eps; ++j)
      if (!used[j] && std::abs(raw[j] - raw[i]) <= eps) {
        used[j] = true;
        ++p.count;
      }
    out.push_back(p);
  }
  // Re descending on a 1e-8 grid, then closest to the real axis first.
  std::stable_sort(out.begin(), out.end(), [](const LatticePoint& a, const LatticePoint& b) {
    const double ra = std::round(a.value.real() * 1e8), rb = std::round(b.value.real() * 1e8);
    if (ra != rb) return ra > rb;
    if (std::abs(a.value.imag()) != std::abs(b.value.imag()))
      return std::abs(a.value.imag()) < std::abs(b.value.imag());
    return a.value.imag() > b.value.imag();
  });
  return out;
}

/// sum_l r_l (-Re mu_l) over the q1 generators: the lattice infimum is
/// reached at k = 0. With n' = 0 the semigroup is unitary and the rate is 0.
inline double decay_rate(std::span<const EigenCluster> q1_generators, int n_prime, const Tolerances& tol = {}) {
  if (n_prime == 0) return 0.0;
  if (q1_generators.empty()) throw HypothesisError("decay_rate: q1 has no damped generators although n' > 0");
  double a = 0.0;
  for (const auto& g : q1_generators) {
    if (!(g.mu.real() < -tol.boundary)) throw PreconditionError("decay_rate: generator is not damped");
    a += g.r * (-g.mu.real());
  }
  return a;
}

struct SpectrumPrediction {
  bool available = false;  // false when the hypotheses fail; see verdict
  std::string verdict;
  SelectionMode mode = SelectionMode::partial;
  std::vector<EigenCluster> clusters;       // all eigenvalues of F
  std::vector<EigenCluster> generators;     // selected for the lattice
  std::vector<EigenCluster> q1_generators;  // damped generators of the q1 block
  LatticeRect rect;
  std::vector<LatticePoint> lattice;
  double decay_rate = 0.0;
  std::vector<std::string> diagnostics;
};

/// Spectrum pipeline: clusters of F, selection, lattice and decay rate.
/// Requires a symplectic singular space; otherwise returns a verdict only.
/// With partial ellipticity the whole spectrum is predicted; without it only
/// the q1 block (its lattice and the decay rate).
inline SpectrumPrediction predict_spectrum(const QuadraticForm& q, const SingularSpaceReport& report,
                                           const SymplecticSplit* split_in = nullptr,
                                           std::optional<LatticeRect> rect = std::nullopt,
                                           const Tolerances& tol = {}) {
  SpectrumPrediction out;
  if (!q.is_dissipative(tol)) {
    out.verdict = "real part is not negative semidefinite";
    return out;
  }
  if (!report.is_symplectic) {
    out.verdict = "singular space not symplectic";
    return out;
  }
  std::optional<SymplecticSplit> owned;
  if (split_in == nullptr) owned = split(q, report, tol);
  const SymplecticSplit& sp = split_in ? *split_in : *owned;

  const ClusterSet all = eigen_clusters(hamilton_map(q), tol);
  out.clusters = all.clusters;
  out.diagnostics = all.warnings;
  // F is similar to -F, so the spectrum is symmetric under lambda -> -lambda.
  for (const auto& c : all.clusters) {
    const bool paired = std::any_of(all.clusters.begin(), all.clusters.end(), [&](const EigenCluster& o) {
      return o.r == c.r && std::abs(o.lambda + c.lambda) <= 1e2 * tol.cluster * (1.0 + std::abs(c.lambda));
    });
    if (!paired) out.diagnostics.push_back("eigenvalue without a -lambda partner of equal multiplicity");
  }

  if (sp.q1) {
    const ClusterSet c1 = eigen_clusters(hamilton_map(*sp.q1), tol);
    out.q1_generators = select_generators(c1.clusters, SelectionMode::q1_only, nullptr, nullptr, tol);
  }
  out.decay_rate = decay_rate(out.q1_generators, sp.n_prime, tol);

  if (report.is_partially_elliptic && sp.normal_form) {
    out.mode = SelectionMode::partial;
    out.generators = select_generators(out.clusters, SelectionMode::partial, &*sp.normal_form, nullptr, tol);
    out.verdict = "discrete spectrum lattice";
  } else {
    out.mode = SelectionMode::q1_only;
    out.generators = out.q1_generators;
    out.verdict = "q1 block only: q is not elliptic on its singular space";
  }
  out.rect = rect ? *rect : default_rect(out.generators);
  out.lattice = enumerate_lattice(out.generators, out.rect, tol);
  for (const auto& p : out.lattice)
    if (p.count > 1) {
      out.diagnostics.push_back("resonant generators: several (k) tuples reach the same lattice point");
      break;
    }
  out.available = true;
  return out;
}

}  // namespace quadspec
