#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "decomposition.hpp"
#include "galerkin.hpp"
#include "quadform.hpp"
#include "singular_space.hpp"
#include "spectrum.hpp"

namespace quadspec {

using nlohmann::json;

inline constexpr int kMaxAnalysisDims = 4;

// ---------------------------------------------------------------------------
// JSON helpers

namespace io {

inline json number(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  if (std::isnan(v)) return json("nan");
  return json(v);
}

inline double number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
    throw Error("expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

inline json matrix(const RMatrix& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline RMatrix matrix(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw DimensionError("matrix: wrong row count");
  RMatrix A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(i);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw DimensionError("matrix: wrong column count");
    for (Eigen::Index k = 0; k < cols; ++k) A(i, k) = row.at(k).get<double>();
  }
  return A;
}

/// Column list form, used for bases: [[col0...], [col1...]].
inline json columns(const RMatrix& A) { return matrix(RMatrix(A.transpose())); }

inline RMatrix columns(const json& j, Eigen::Index rows) {
  if (!j.is_array()) throw Error("basis: expected an array of columns");
  const Eigen::Index cols = static_cast<Eigen::Index>(j.size());
  if (cols == 0) return RMatrix(rows, 0);
  return matrix(j, cols, rows).transpose();
}

inline json complex(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }
inline cplx complex(const json& j) { return {j.at("re").get<double>(), j.at("im").get<double>()}; }

}  // namespace io

// ---------------------------------------------------------------------------
// QuadraticForm: {"n": int, "Q_re": [[...]], "Q_im": [[...]]}, row-major,
// ordering (x, xi).

inline json form_to_json(const QuadraticForm& q) {
  return json{{"n", q.n()}, {"Q_re", io::matrix(q.re())}, {"Q_im", io::matrix(q.im())}};
}

inline QuadraticForm form_from_json(const json& j) {
  if (!j.is_object()) throw Error("quadratic form: expected a JSON object");
  if (!j.contains("n") || !j.at("n").is_number_integer()) throw Error("quadratic form: missing integer field 'n'");
  const int n = j.at("n").get<int>();
  if (n < 1) throw DimensionError("quadratic form: n must be positive");
  if (n > kMaxAnalysisDims) throw DimensionError("quadratic form: n > " + std::to_string(kMaxAnalysisDims));
  if (!j.contains("Q_re")) throw Error("quadratic form: missing 'Q_re'");
  const RMatrix re = io::matrix(j.at("Q_re"), 2 * n, 2 * n);
  const RMatrix im = j.contains("Q_im") ? io::matrix(j.at("Q_im"), 2 * n, 2 * n) : RMatrix(RMatrix::Zero(2 * n, 2 * n));
  return QuadraticForm(n, re, im);
}

inline void to_json(json& j, const SubspaceBasis& b) {
  j = json{{"n", b.n}, {"dim", b.dim()}, {"basis", io::columns(b.vectors)}};
}
inline void from_json(const json& j, SubspaceBasis& b) {
  b.n = j.at("n").get<int>();
  b.vectors = io::columns(j.at("basis"), 2 * b.n);
}

inline void to_json(json& j, const SingularSpaceReport& r) {
  j = json{{"S", r.S},
           {"is_symplectic", r.is_symplectic},
           {"is_partially_elliptic", r.is_partially_elliptic},
           {"ellipticity_margin", io::number(r.ellipticity_margin)},
           {"ellipticity_lower_bound", io::number(r.ellipticity_lower_bound)},
           {"real_eigenvalues", r.real_eigenvalues},
           {"blocks", r.blocks},
           {"S0", r.S0},
           {"diagnostics", r.diagnostics}};
}
inline void from_json(const json& j, SingularSpaceReport& r) {
  r.S = j.at("S").get<SubspaceBasis>();
  r.is_symplectic = j.at("is_symplectic").get<bool>();
  r.is_partially_elliptic = j.at("is_partially_elliptic").get<bool>();
  r.ellipticity_margin = io::number(j.at("ellipticity_margin"));
  r.ellipticity_lower_bound = io::number(j.at("ellipticity_lower_bound"));
  r.real_eigenvalues = j.at("real_eigenvalues").get<std::vector<double>>();
  r.blocks = j.at("blocks").get<std::vector<SubspaceBasis>>();
  r.S0 = j.at("S0").get<SubspaceBasis>();
  r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
}

inline void to_json(json& j, const NormalForm& nf) { j = json{{"epsilon", nf.epsilon}, {"lambdas", nf.lambdas}}; }
inline void from_json(const json& j, NormalForm& nf) {
  nf.epsilon = j.at("epsilon").get<int>();
  nf.lambdas = j.at("lambdas").get<std::vector<double>>();
}

inline void to_json(json& j, const SymplecticSplit& s) {
  j = json{{"chi", io::matrix(s.chi)},
           {"n_prime", s.n_prime},
           {"n_dprime", s.n_dprime},
           {"q1", s.q1 ? form_to_json(*s.q1) : json(nullptr)},
           {"q2_tilde", s.q2_tilde ? io::matrix(*s.q2_tilde) : json(nullptr)},
           {"normal_form", s.normal_form ? json(*s.normal_form) : json(nullptr)},
           {"cross_residual", s.cross_residual},
           {"symplectic_residual", s.symplectic_residual},
           {"q2_real_residual", s.q2_real_residual},
           {"q1_singular_dim", s.q1_singular_dim},
           {"diagnostics", s.diagnostics}};
}
inline void from_json(const json& j, SymplecticSplit& s) {
  s.n_prime = j.at("n_prime").get<int>();
  s.n_dprime = j.at("n_dprime").get<int>();
  const int n = s.n_prime + s.n_dprime;
  s.chi = io::matrix(j.at("chi"), 2 * n, 2 * n);
  s.q1 = j.at("q1").is_null() ? std::nullopt : std::optional<QuadraticForm>(form_from_json(j.at("q1")));
  s.q2_tilde = j.at("q2_tilde").is_null()
                   ? std::nullopt
                   : std::optional<RMatrix>(io::matrix(j.at("q2_tilde"), 2 * s.n_dprime, 2 * s.n_dprime));
  s.normal_form = j.at("normal_form").is_null() ? std::nullopt
                                                : std::optional<NormalForm>(j.at("normal_form").get<NormalForm>());
  s.cross_residual = j.at("cross_residual").get<double>();
  s.symplectic_residual = j.at("symplectic_residual").get<double>();
  s.q2_real_residual = j.at("q2_real_residual").get<double>();
  s.q1_singular_dim = j.at("q1_singular_dim").get<int>();
  s.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
}

inline void to_json(json& j, const EigenCluster& c) {
  j = json{{"lambda_re", c.lambda.real()}, {"lambda_im", c.lambda.imag()}, {"r", c.r},
           {"mu_re", c.mu.real()},         {"mu_im", c.mu.imag()}};
}
inline void from_json(const json& j, EigenCluster& c) {
  c.lambda = {j.at("lambda_re").get<double>(), j.at("lambda_im").get<double>()};
  c.r = j.at("r").get<int>();
  c.mu = {j.at("mu_re").get<double>(), j.at("mu_im").get<double>()};
}

inline void to_json(json& j, const LatticePoint& p) {
  j = json{{"re", p.value.real()}, {"im", p.value.imag()}, {"count", p.count}};
}
inline void from_json(const json& j, LatticePoint& p) {
  p.value = {j.at("re").get<double>(), j.at("im").get<double>()};
  p.count = j.at("count").get<long>();
}

inline void to_json(json& j, const SpectrumPrediction& s) {
  j = json{{"available", s.available},
           {"verdict", s.verdict},
           {"mode", to_string(s.mode)},
           {"clusters", s.clusters},
           {"generators", s.generators},
           {"q1_generators", s.q1_generators},
           {"rect", {{"re_min", s.rect.re_min}, {"im_max", s.rect.im_max}}},
           {"lattice", s.lattice},
           {"decay_rate", s.decay_rate},
           {"diagnostics", s.diagnostics}};
}
inline void from_json(const json& j, SpectrumPrediction& s) {
  s.available = j.at("available").get<bool>();
  s.verdict = j.at("verdict").get<std::string>();
  s.mode = selection_mode_from_string(j.at("mode").get<std::string>());
  s.clusters = j.at("clusters").get<std::vector<EigenCluster>>();
  s.generators = j.at("generators").get<std::vector<EigenCluster>>();
  s.q1_generators = j.at("q1_generators").get<std::vector<EigenCluster>>();
  s.rect = {j.at("rect").at("re_min").get<double>(), j.at("rect").at("im_max").get<double>()};
  s.lattice = j.at("lattice").get<std::vector<LatticePoint>>();
  s.decay_rate = j.at("decay_rate").get<double>();
  s.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
}

inline void to_json(json& j, const NormSample& s) { j = json{{"t", s.t}, {"norm", s.norm}}; }
inline void from_json(const json& j, NormSample& s) {
  s.t = j.at("t").get<double>();
  s.norm = j.at("norm").get<double>();
}

inline void to_json(json& j, const SmoothingRow& r) {
  j = json{{"vector", r.vector},
           {"value_coarse", r.value_coarse},
           {"value_fine", r.value_fine},
           {"relative_change", r.relative_change},
           {"stabilized", r.stabilized}};
}
inline void from_json(const json& j, SmoothingRow& r) {
  r.vector = j.at("vector").get<std::string>();
  r.value_coarse = j.at("value_coarse").get<double>();
  r.value_fine = j.at("value_fine").get<double>();
  r.relative_change = j.at("relative_change").get<double>();
  r.stabilized = j.at("stabilized").get<bool>();
}

inline void to_json(json& j, const SmoothingTable& t) {
  j = json{{"t", t.t}, {"p", t.p}, {"N", t.N}, {"dN", t.dN}, {"tol", t.tolerance}, {"rows", t.rows}};
}
inline void from_json(const json& j, SmoothingTable& t) {
  t.t = j.at("t").get<double>();
  t.p = j.at("p").get<int>();
  t.N = j.at("N").get<int>();
  t.dN = j.at("dN").get<int>();
  t.tolerance = j.at("tol").get<double>();
  t.rows = j.at("rows").get<std::vector<SmoothingRow>>();
}

// ---------------------------------------------------------------------------
// Oracle comparison

struct OracleRow {
  cplx galerkin;
  double movement = 0.0;  // between the two truncations
  cplx predicted;
  double distance = kInf;
  bool matched = false;
};

inline void to_json(json& j, const OracleRow& r) {
  j = json{{"galerkin", io::complex(r.galerkin)},
           {"movement", r.movement},
           {"predicted", io::complex(r.predicted)},
           {"distance", io::number(r.distance)},
           {"matched", r.matched}};
}
inline void from_json(const json& j, OracleRow& r) {
  r.galerkin = io::complex(j.at("galerkin"));
  r.movement = j.at("movement").get<double>();
  r.predicted = io::complex(j.at("predicted"));
  r.distance = io::number(j.at("distance"));
  r.matched = j.at("matched").get<bool>();
}

struct Matching {
  std::vector<OracleRow> rows;
  bool bijective = false;
};

/// Pairs converged eigenvalues with lattice points (each point usable `count`
/// times), closest pairs first. Bijective means every eigenvalue found a
/// point within tol_match and no lattice point above the lowest matched one
/// was left out.
inline Matching match_spectra(const std::vector<ConvergedEigenvalue>& converged,
                              const std::vector<LatticePoint>& lattice, double tol_match) {
  Matching out;
  struct Cand {
    double d;
    std::size_t i, j;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < converged.size(); ++i)
    for (std::size_t j = 0; j < lattice.size(); ++j)
      cands.push_back({std::abs(converged[i].value - lattice[j].value), i, j});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.d < b.d; });
  std::vector<long> left(lattice.size());
  for (std::size_t j = 0; j < lattice.size(); ++j) left[j] = lattice[j].count;
  out.rows.resize(converged.size());
  std::vector<bool> done(converged.size(), false);
  for (std::size_t i = 0; i < converged.size(); ++i) {
    out.rows[i].galerkin = converged[i].value;
    out.rows[i].movement = converged[i].movement;
  }
  for (const auto& c : cands) {
    if (done[c.i] || left[c.j] == 0) continue;
    done[c.i] = true;
    --left[c.j];
    auto& row = out.rows[c.i];
    row.predicted = lattice[c.j].value;
    row.distance = c.d;
    row.matched = c.d < tol_match;
  }
  bool ok = !converged.empty();
  double lowest = kInf;
  for (const auto& r : out.rows) {
    ok = ok && r.matched;
    lowest = std::min(lowest, r.predicted.real());
  }
  for (std::size_t j = 0; ok && j < lattice.size(); ++j)
    if (lattice[j].value.real() > lowest + tol_match && left[j] != 0) ok = false;
  out.bijective = ok;
  return out;
}

// ---------------------------------------------------------------------------
// Full analysis

struct AnalysisOptions {
  bool validate = false;
  int N = 30;
  int dN = 10;
  int k = 6;
  std::vector<double> times;  // empty: 0, 0.5, ..., 8
  double window_lo = 3.0;
  double window_hi = 8.0;
  double tol_match = 1e-4;
  double decay_tolerance = 0.1;  // relative, fitted vs predicted rate
  double smoothing_t = 0.2;
  int smoothing_p = 1;
  unsigned seed = 1;
  std::optional<LatticeRect> rect;
};

struct ValidationSection {
  int N = 0, dN = 0, k = 0;
  double tol_conv = 0.0;
  double tol_match = 0.0;
  std::vector<OracleRow> comparison;
  bool all_matched = false;
  std::vector<NormSample> curve;
  double window_lo = 0.0, window_hi = 0.0;
  std::optional<double> fitted_rate;
  std::optional<double> predicted_rate;
  std::optional<double> decay_relative_error;
  double decay_tolerance = 0.1;
  std::optional<SmoothingTable> smoothing;
  std::vector<std::string> warnings;
};

inline void to_json(json& j, const ValidationSection& v) {
  auto opt = [](const std::optional<double>& x) { return x ? io::number(*x) : json(nullptr); };
  j = json{{"N", v.N},
           {"dN", v.dN},
           {"k", v.k},
           {"tol_conv", v.tol_conv},
           {"tol_match", v.tol_match},
           {"comparison", v.comparison},
           {"all_matched", v.all_matched},
           {"curve", v.curve},
           {"window", {v.window_lo, v.window_hi}},
           {"fitted_rate", opt(v.fitted_rate)},
           {"predicted_rate", opt(v.predicted_rate)},
           {"decay_relative_error", opt(v.decay_relative_error)},
           {"decay_tolerance", v.decay_tolerance},
           {"smoothing", v.smoothing ? json(*v.smoothing) : json(nullptr)},
           {"warnings", v.warnings}};
}
inline void from_json(const json& j, ValidationSection& v) {
  auto opt = [](const json& x) { return x.is_null() ? std::nullopt : std::optional<double>(io::number(x)); };
  v.N = j.at("N").get<int>();
  v.dN = j.at("dN").get<int>();
  v.k = j.at("k").get<int>();
  v.tol_conv = j.at("tol_conv").get<double>();
  v.tol_match = j.at("tol_match").get<double>();
  v.comparison = j.at("comparison").get<std::vector<OracleRow>>();
  v.all_matched = j.at("all_matched").get<bool>();
  v.curve = j.at("curve").get<std::vector<NormSample>>();
  v.window_lo = j.at("window").at(0).get<double>();
  v.window_hi = j.at("window").at(1).get<double>();
  v.fitted_rate = opt(j.at("fitted_rate"));
  v.predicted_rate = opt(j.at("predicted_rate"));
  v.decay_relative_error = opt(j.at("decay_relative_error"));
  v.decay_tolerance = j.at("decay_tolerance").get<double>();
  v.smoothing = j.at("smoothing").is_null() ? std::nullopt
                                            : std::optional<SmoothingTable>(j.at("smoothing").get<SmoothingTable>());
  v.warnings = j.at("warnings").get<std::vector<std::string>>();
}

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int malformed = 1;
inline constexpr int hypothesis = 2;
inline constexpr int dimension = 3;
}  // namespace exit_code

struct AnalysisReport {
  json input;
  bool dissipative = false;
  double max_re_eigenvalue = 0.0;
  double dissipative_tol = 0.0;
  std::optional<SingularSpaceReport> singular;
  std::optional<SymplecticSplit> split;
  std::optional<SpectrumPrediction> spectrum;
  std::optional<ValidationSection> validation;
  std::vector<std::string> theorems;
  std::string verdict;
  int exit_code = exit_code::ok;
  Tolerances tolerances;
};

inline void to_json(json& j, const AnalysisReport& r) {
  j = json{{"input", r.input},
           {"dissipativity",
            {{"dissipative", r.dissipative}, {"max_re_eigenvalue", r.max_re_eigenvalue}, {"tol", r.dissipative_tol}}},
           {"singular_space", r.singular ? json(*r.singular) : json(nullptr)},
           {"split", r.split ? json(*r.split) : json(nullptr)},
           {"spectrum", r.spectrum ? json(*r.spectrum) : json(nullptr)},
           {"validation", r.validation ? json(*r.validation) : json(nullptr)},
           {"theorems", r.theorems},
           {"verdict", r.verdict},
           {"exit_code", r.exit_code},
           {"tolerances", r.tolerances.as_map()}};
}
inline void from_json(const json& j, AnalysisReport& r) {
  r.input = j.at("input");
  const json& d = j.at("dissipativity");
  r.dissipative = d.at("dissipative").get<bool>();
  r.max_re_eigenvalue = d.at("max_re_eigenvalue").get<double>();
  r.dissipative_tol = d.at("tol").get<double>();
  r.singular = j.at("singular_space").is_null()
                   ? std::nullopt
                   : std::optional<SingularSpaceReport>(j.at("singular_space").get<SingularSpaceReport>());
  r.split = j.at("split").is_null() ? std::nullopt : std::optional<SymplecticSplit>(j.at("split").get<SymplecticSplit>());
  r.spectrum = j.at("spectrum").is_null()
                   ? std::nullopt
                   : std::optional<SpectrumPrediction>(j.at("spectrum").get<SpectrumPrediction>());
  r.validation = j.at("validation").is_null()
                     ? std::nullopt
                     : std::optional<ValidationSection>(j.at("validation").get<ValidationSection>());
  r.theorems = j.at("theorems").get<std::vector<std::string>>();
  r.verdict = j.at("verdict").get<std::string>();
  r.exit_code = j.at("exit_code").get<int>();
  for (const auto& [name, value] : j.at("tolerances").items()) r.tolerances.apply_override(name, value.get<double>());
}

/// Galerkin stages: oracle comparison against the prediction (if any),
/// semigroup norm curve with decay fit, smoothing table (if a split exists).
inline ValidationSection run_validation(const QuadraticForm& q, const SpectrumPrediction* prediction,
                                        const SymplecticSplit* sp, const AnalysisOptions& opt,
                                        const Tolerances& tol) {
  check_galerkin_bounds(q.n(), opt.N + opt.dN);
  ValidationSection v;
  v.N = opt.N;
  v.dN = opt.dN;
  v.k = opt.k;
  v.tol_conv = tol.convergence;
  v.tol_match = opt.tol_match;
  v.decay_tolerance = opt.decay_tolerance;

  const ConvergedEigenvalues conv = numerical_spectrum(q, opt.N, opt.dN, opt.k, tol);
  v.warnings = conv.warnings;
  if (prediction != nullptr && prediction->available && prediction->mode == SelectionMode::partial) {
    const Matching m = match_spectra(conv.values, prediction->lattice, opt.tol_match);
    v.comparison = m.rows;
    v.all_matched = m.bijective;
  } else {
    for (const auto& c : conv.values) v.comparison.push_back({c.value, c.movement, cplx(0.0), kInf, false});
  }

  std::vector<double> times = opt.times;
  if (times.empty())
    for (int i = 0; i <= 16; ++i) times.push_back(0.5 * i);
  v.curve = semigroup_norm_curve(q, opt.N, times);
  v.window_lo = opt.window_lo;
  v.window_hi = opt.window_hi;
  try {
    v.fitted_rate = decay_fit(v.curve, opt.window_lo, opt.window_hi).rate;
  } catch (const PreconditionError& e) {
    v.warnings.push_back(e.what());
  }
  if (prediction != nullptr && prediction->available) {
    v.predicted_rate = prediction->decay_rate;
    if (v.fitted_rate) {
      const double a = prediction->decay_rate;
      v.decay_relative_error = a > 0.0 ? std::abs(*v.fitted_rate - a) / a : std::abs(*v.fitted_rate);
    }
  }
  if (sp != nullptr)
    v.smoothing = smoothing_diagnostic(q, *sp, opt.N, opt.dN, opt.smoothing_t, opt.smoothing_p, opt.seed, tol);
  return v;
}

/// Pipeline: dissipativity, singular space, split, spectrum and optionally
/// the Galerkin validation. Hypothesis failures produce a report with
/// exit_code 2 instead of an exception.
inline AnalysisReport analyze(const QuadraticForm& q, const AnalysisOptions& opt = {}, const Tolerances& tol = {},
                              json input = nullptr) {
  AnalysisReport r;
  r.input = input.is_null() ? form_to_json(q) : std::move(input);
  r.tolerances = tol;
  r.max_re_eigenvalue = q.max_real_eigenvalue();
  r.dissipative_tol = tol.dissipative * std::max(q.norm(), 1e-300);
  r.dissipative = r.max_re_eigenvalue <= r.dissipative_tol;
  if (!r.dissipative) {
    r.verdict = "real part is not negative semidefinite";
    r.theorems.push_back("hypotheses_unmet");
    r.exit_code = exit_code::hypothesis;
    return r;
  }
  r.singular = analyze_singular_space(q, tol);
  const auto& S = *r.singular;
  if (!S.is_symplectic) {
    r.verdict =
        "singular space not symplectic: smoothing, spectral and decay conclusions do not apply; the semigroup "
        "may keep norm 1 for all times (as for multiplication by -x^2)";
    r.theorems.push_back("hypotheses_unmet");
    r.exit_code = exit_code::hypothesis;
    if (opt.validate) r.validation = run_validation(q, nullptr, nullptr, opt, tol);
    return r;
  }
  r.split = split(q, S, tol);
  r.spectrum = predict_spectrum(q, S, &*r.split, opt.rect, tol);
  r.theorems.push_back("smoothing_off_singular_space");
  if (S.is_partially_elliptic) r.theorems.push_back("discrete_spectrum_lattice");
  if (S.S.dim() == 2 * q.n()) r.theorems.push_back("unitary_semigroup");
  else r.theorems.push_back("exponential_decay");
  if (S.S.dim() == 0) r.theorems.push_back("trivial_singular_space");
  r.verdict = r.spectrum->verdict;
  if (opt.validate) r.validation = run_validation(q, &*r.spectrum, &*r.split, opt, tol);
  return r;
}

// ---------------------------------------------------------------------------
// Bundled fixtures

struct Fixture {
  std::string name;
  std::string provenance;
  QuadraticForm form;
};

/// -eta^2 - v^2/4 - i(v xi - a x eta) in coordinates (x, v; xi, eta).
inline QuadraticForm kfp_form(double a) {
  RMatrix re = RMatrix::Zero(4, 4), im = RMatrix::Zero(4, 4);
  re(1, 1) = -0.25;
  re(3, 3) = -1.0;
  im(1, 2) = im(2, 1) = -0.5;
  im(0, 3) = im(3, 0) = 0.5 * a;
  return QuadraticForm(2, re, im);
}

inline std::vector<Fixture> fixtures() {
  std::vector<Fixture> out;
  out.push_back({"kfp_a1",
                 "Kramers-Fokker-Planck operator with quadratic potential (a = 1); singular space {0}",
                 kfp_form(1.0)});
  {
    RMatrix re = RMatrix::Zero(2, 2);
    re(0, 0) = -1.0;
    out.push_back({"mult_x2", "multiplication by -x^2; singular space is the xi-axis, not symplectic",
                   QuadraticForm(1, re, RMatrix(RMatrix::Zero(2, 2)))});
  }
  out.push_back({"harmonic", "harmonic oscillator -(x^2 + xi^2); elliptic",
                 QuadraticForm(1, RMatrix(-RMatrix::Identity(2, 2)), RMatrix(RMatrix::Zero(2, 2)))});
  out.push_back({"imag_harmonic", "i (x^2 + xi^2); purely imaginary, unitary semigroup",
                 QuadraticForm(1, RMatrix(RMatrix::Zero(2, 2)), RMatrix(RMatrix::Identity(2, 2)))});
  {
    // -(x1^2 + xi1^2) + i (x2^2 + xi2^2): singular space is the (x2, xi2) plane
    RMatrix re = RMatrix::Zero(4, 4), im = RMatrix::Zero(4, 4);
    re(0, 0) = re(2, 2) = -1.0;
    im(1, 1) = im(3, 3) = 1.0;
    out.push_back({"mixed_partial", "damped oscillator in (x1, xi1) plus rotation in (x2, xi2); partially elliptic",
                   QuadraticForm(2, re, im)});
  }
  return out;
}

inline const Fixture& fixture(const std::string& name) {
  static const std::vector<Fixture> all = fixtures();
  for (const auto& f : all)
    if (f.name == name) return f;
  throw Error("unknown fixture '" + name + "'");
}

/// Tolerances with overrides from a JSON object {"name": value, ...}.
inline Tolerances tolerances_from_json(const json& overrides, Tolerances base = {}) {
  if (!overrides.is_object()) throw Error("tolerance overrides must be a JSON object");
  for (const auto& [name, value] : overrides.items()) base.apply_override(name, value.get<double>());
  return base;
}

}  // namespace quadspec
