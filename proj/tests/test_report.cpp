#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "quadspec/random.hpp"
#include "quadspec/report.hpp"

using namespace quadspec;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" QUADSPEC_CLI "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {};
  CliResult r;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture_path(const std::string& name) { return std::string(QUADSPEC_FIXTURE_DIR) + "/" + name + ".json"; }

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("quadspec_test_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

AnalysisOptions small_validation() {
  AnalysisOptions opt;
  opt.validate = true;
  opt.N = 10;
  opt.dN = 4;
  opt.k = 2;
  opt.times = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
  opt.window_lo = 0.0;
  opt.window_hi = 2.5;
  opt.tol_match = 1e-2;
  return opt;
}

}  // namespace

TEST(FormJson, RoundTripIsExact) {
  random::Rng rng(51);
  for (int n = 1; n <= 4; ++n) {
    const QuadraticForm q = random::form(rng, n);
    const QuadraticForm back = form_from_json(json::parse(form_to_json(q).dump()));
    EXPECT_EQ(back.re(), q.re());
    EXPECT_EQ(back.im(), q.im());
  }
}

TEST(FormJson, ImaginaryPartIsOptional) {
  const QuadraticForm q = form_from_json(json::parse(R"({"n": 1, "Q_re": [[-1, 0], [0, -1]]})"));
  EXPECT_TRUE(q.im().isZero(0.0));
  EXPECT_EQ(q.re()(0, 0), -1.0);
}

TEST(FormJson, MalformedInputs) {
  EXPECT_THROW(form_from_json(json::parse("[1, 2]")), Error);
  EXPECT_THROW(form_from_json(json::parse(R"({"Q_re": [[1]]})")), Error);
  EXPECT_THROW(form_from_json(json::parse(R"({"n": 1})")), Error);
  EXPECT_THROW(form_from_json(json::parse(R"({"n": 1, "Q_re": [[1, 0]]})")), DimensionError);
  EXPECT_THROW(form_from_json(json::parse(R"({"n": 0, "Q_re": []})")), DimensionError);
  json big = form_to_json(QuadraticForm(1, RMatrix(RMatrix::Zero(2, 2)), RMatrix(RMatrix::Zero(2, 2))));
  big["n"] = 5;
  EXPECT_THROW(form_from_json(big), DimensionError);
}

TEST(NumberJson, NonFiniteValuesRoundTrip) {
  EXPECT_EQ(io::number(kInf), json("inf"));
  EXPECT_EQ(io::number(io::number(-kInf)), -kInf);
  EXPECT_TRUE(std::isnan(io::number(io::number(std::nan("")))));
  EXPECT_EQ(io::number(json(0.1)), 0.1);
  EXPECT_THROW(io::number(json("infinity")), Error);
}

TEST(NumberJson, DoublesSurviveTextRoundTrip) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(u(rng) * 30));
    EXPECT_EQ(json::parse(json(v).dump()).get<double>(), v);
  }
}

TEST(ReportJson, RoundTripIsLossless) {
  for (const auto& fx : fixtures()) {
    const AnalysisReport r = analyze(fx.form, small_validation());
    const json first = r;
    const AnalysisReport back = json::parse(first.dump()).get<AnalysisReport>();
    EXPECT_EQ(json(back), first) << fx.name;
  }
}

TEST(ReportJson, CarriesTolerances) {
  Tolerances tol;
  tol.convergence = 3e-7;
  const AnalysisReport r = analyze(fixture("harmonic").form, small_validation(), tol);
  const json j = r;
  EXPECT_EQ(j.at("tolerances").at("convergence").get<double>(), 3e-7);
  EXPECT_EQ(j.at("validation").at("tol_conv").get<double>(), 3e-7);
  EXPECT_EQ(j.at("validation").at("tol_match").get<double>(), 1e-2);
  EXPECT_GT(j.at("dissipativity").at("tol").get<double>(), 0.0);
}

TEST(Tolerances, OverridesFromJson) {
  const Tolerances t = tolerances_from_json(json::parse(R"({"rank": 1e-9, "stabilization": 0.05})"));
  EXPECT_EQ(t.rank, 1e-9);
  EXPECT_EQ(t.stabilization, 0.05);
  EXPECT_EQ(t.convergence, Tolerances{}.convergence);
  EXPECT_THROW(tolerances_from_json(json::parse(R"({"nope": 1})")), Error);
  EXPECT_THROW(tolerances_from_json(json::parse(R"({"rank": -1})")), Error);
  EXPECT_THROW(tolerances_from_json(json::parse("[1]")), Error);
}

TEST(MatchSpectra, PairsClosestFirstAndRespectsCounts) {
  const std::vector<LatticePoint> lattice = {{cplx(-1.0), 1}, {cplx(-2.0), 2}, {cplx(-3.0), 1}};
  const std::vector<ConvergedEigenvalue> conv = {
      {cplx(-1.0 + 1e-6), cplx(-1.0), 1e-6}, {cplx(-2.0 - 1e-6), cplx(-2.0), 0.0}, {cplx(-2.0 + 2e-6), cplx(-2.0), 0.0}};
  const Matching m = match_spectra(conv, lattice, 1e-4);
  EXPECT_TRUE(m.bijective);
  for (const auto& r : m.rows) EXPECT_TRUE(r.matched);
  EXPECT_EQ(m.rows[2].predicted, cplx(-2.0));
}

TEST(MatchSpectra, MissingPointBreaksBijectivity) {
  const std::vector<LatticePoint> lattice = {{cplx(-1.0), 1}, {cplx(-2.0), 1}, {cplx(-3.0), 1}};
  const std::vector<ConvergedEigenvalue> skip = {{cplx(-1.0), cplx(-1.0), 0.0}, {cplx(-3.0), cplx(-3.0), 0.0}};
  EXPECT_FALSE(match_spectra(skip, lattice, 1e-4).bijective);
  const std::vector<ConvergedEigenvalue> far = {{cplx(-1.0), cplx(-1.0), 0.0}, {cplx(-2.5), cplx(-2.5), 0.0}};
  const Matching m = match_spectra(far, lattice, 1e-4);
  EXPECT_FALSE(m.bijective);
  EXPECT_FALSE(m.rows[1].matched);
  EXPECT_FALSE(match_spectra({}, lattice, 1e-4).bijective);
}

TEST(MatchSpectra, AgreementOnTheHalfWindow) {
  // every converged eigenvalue with Re > re_min / 2 (and |Im| <= im_max) is
  // near a predicted point, and every predicted point there is hit
  struct Case {
    std::string name;
    LatticeRect rect;
    int N, dN, k;
    double tol;
  };
  const Case cases[] = {{"kfp_a1", {-4.0, 4.0}, 30, 10, 12, 1e-4},
                        {"harmonic", {-10.0, 10.0}, 40, 10, 10, 1e-10},
                        {"mixed_partial", {-4.0, 6.0}, 20, 6, 10, 1e-8},
                        {"imag_harmonic", {-4.0, 8.0}, 30, 10, 6, 1e-8}};
  for (const Case& c : cases) {
    const QuadraticForm& q = fixture(c.name).form;
    const SpectrumPrediction pred = predict_spectrum(q, analyze_singular_space(q), nullptr, c.rect);
    const ConvergedEigenvalues conv = numerical_spectrum(q, c.N, c.dN, c.k);
    auto in_window = [&](cplx z) { return z.real() > c.rect.re_min / 2 + 1e-6 && std::abs(z.imag()) <= c.rect.im_max; };
    int predicted_in_window = 0;
    for (const auto& p : pred.lattice) {
      if (!in_window(p.value)) continue;
      ++predicted_in_window;
      double best = kInf;
      for (const auto& v : conv.values) best = std::min(best, std::abs(v.value - p.value));
      EXPECT_LT(best, c.tol) << c.name << " predicted " << p.value;
    }
    EXPECT_GT(predicted_in_window, 1) << c.name;
    for (const auto& v : conv.values) {
      if (!in_window(v.value)) continue;
      double best = kInf;
      for (const auto& p : pred.lattice) best = std::min(best, std::abs(v.value - p.value));
      EXPECT_LT(best, c.tol) << c.name << " converged " << v.value;
    }
  }
}

TEST(Analyze, NonDissipativeStopsEarly) {
  const QuadraticForm q(1, RMatrix(RMatrix::Identity(2, 2)), RMatrix(RMatrix::Zero(2, 2)));
  const AnalysisReport r = analyze(q);
  EXPECT_EQ(r.exit_code, exit_code::hypothesis);
  EXPECT_FALSE(r.dissipative);
  EXPECT_FALSE(r.singular.has_value());
  EXPECT_EQ(r.theorems, std::vector<std::string>{"hypotheses_unmet"});
}

TEST(Analyze, MinusXSquaredReportsCounterexample) {
  const AnalysisReport r = analyze(fixture("mult_x2").form, small_validation());
  EXPECT_EQ(r.exit_code, exit_code::hypothesis);
  ASSERT_TRUE(r.singular.has_value());
  EXPECT_EQ(r.singular->S.dim(), 1);
  EXPECT_NE(r.verdict.find("singular space not symplectic"), std::string::npos);
  EXPECT_NE(r.verdict.find("norm 1"), std::string::npos);
  EXPECT_TRUE(r.validation.has_value());
  EXPECT_FALSE(r.spectrum.has_value());
}

TEST(Analyze, TheoremTags) {
  auto tags = [](const std::string& name) { return analyze(fixture(name).form).theorems; };
  const std::vector<std::string> kfp = tags("kfp_a1");
  EXPECT_NE(std::find(kfp.begin(), kfp.end(), "exponential_decay"), kfp.end());
  EXPECT_NE(std::find(kfp.begin(), kfp.end(), "trivial_singular_space"), kfp.end());
  const std::vector<std::string> imag = tags("imag_harmonic");
  EXPECT_NE(std::find(imag.begin(), imag.end(), "unitary_semigroup"), imag.end());
  EXPECT_NE(std::find(imag.begin(), imag.end(), "discrete_spectrum_lattice"), imag.end());
}

TEST(Analyze, KfpReport) {
  const AnalysisReport r = analyze(fixture("kfp_a1").form);
  EXPECT_EQ(r.exit_code, exit_code::ok);
  EXPECT_EQ(r.singular->S.dim(), 0);
  EXPECT_TRUE(r.singular->is_partially_elliptic);
  EXPECT_NEAR(r.spectrum->decay_rate, 0.5, 1e-12);
  EXPECT_FALSE(r.validation.has_value());
}

TEST(Fixtures, NamesAndLookup) {
  std::vector<std::string> names;
  for (const auto& f : fixtures()) names.push_back(f.name);
  EXPECT_EQ(names, (std::vector<std::string>{"kfp_a1", "mult_x2", "harmonic", "imag_harmonic", "mixed_partial"}));
  EXPECT_THROW(fixture("nope"), Error);
}

TEST(Fixtures, FilesMatchBundledForms) {
  for (const auto& f : fixtures()) {
    std::ifstream in(fixture_path(f.name));
    ASSERT_TRUE(in) << f.name;
    const json j = json::parse(in);
    const QuadraticForm q = form_from_json(j);
    EXPECT_EQ(q.matrix(), f.form.matrix()) << f.name;
    EXPECT_EQ(j.at("name").get<std::string>(), f.name);
  }
}

TEST(Cli, FixturesCommandListsNames) {
  const CliResult r = run_cli("fixtures");
  EXPECT_EQ(r.code, 0);
  for (const char* name : {"kfp_a1", "mult_x2", "harmonic"}) EXPECT_NE(r.out.find(name), std::string::npos);
}

TEST(Cli, AnalyzeKfpSucceeds) {
  const CliResult r = run_cli("analyze " + fixture_path("kfp_a1"));
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("singular_space").at("S").at("dim").get<int>(), 0);
  EXPECT_TRUE(j.at("singular_space").at("is_partially_elliptic").get<bool>());
  EXPECT_GT(j.at("spectrum").at("decay_rate").get<double>(), 0.0);
  EXPECT_TRUE(j.at("validation").is_null());
}

TEST(Cli, HypothesisFailureStillEmitsJson) {
  TempDir dir;
  const CliResult r = run_cli("analyze " + fixture_path("mult_x2") + " --json " + (dir / "r.json").string());
  EXPECT_EQ(r.code, 2);
  std::ifstream in(dir / "r.json");
  const json j = json::parse(in);
  EXPECT_NE(j.at("verdict").get<std::string>().find("singular space not symplectic"), std::string::npos);
  EXPECT_EQ(j.at("exit_code").get<int>(), 2);
}

TEST(Cli, MalformedInputExitsOne) {
  TempDir dir;
  write_text(dir / "bad.json", "{ not json");
  EXPECT_EQ(run_cli("analyze " + (dir / "bad.json").string()).code, 1);
  write_text(dir / "noq.json", R"({"n": 1})");
  EXPECT_EQ(run_cli("analyze " + (dir / "noq.json").string()).code, 1);
  EXPECT_EQ(run_cli("analyze " + (dir / "missing.json").string()).code, 1);
  EXPECT_EQ(run_cli("analyze").code, 1);
  EXPECT_EQ(run_cli("analyze " + fixture_path("harmonic"), "QUADSPEC_TOL_OVERRIDES='{\"nope\": 1}'").code, 1);
}

TEST(Cli, DimensionBoundsExitThree) {
  TempDir dir;
  json big = json::parse(R"({"n": 5})");
  big["Q_re"] = io::matrix(RMatrix(-RMatrix::Identity(10, 10)));
  write_text(dir / "big.json", big.dump());
  EXPECT_EQ(run_cli("analyze " + (dir / "big.json").string()).code, 3);
  EXPECT_EQ(run_cli("validate " + fixture_path("harmonic") + " --N 70").code, 3);
}

TEST(Cli, ToleranceOverridesReachTheReport) {
  const CliResult r = run_cli("analyze " + fixture_path("harmonic"), "QUADSPEC_TOL_OVERRIDES='{\"rank\": 1e-9}'");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out).at("tolerances").at("rank").get<double>(), 1e-9);
}

TEST(Cli, ValidateWritesCsv) {
  TempDir dir;
  const CliResult r = run_cli("validate " + fixture_path("harmonic") +
                              " --N 20 --dN 4 --k 3 --times 0,1,2,3,4,5 --window 1,5 --csv-dir " +
                              (dir / "csv").string());
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_TRUE(j.at("validation").at("all_matched").get<bool>());
  EXPECT_NEAR(j.at("validation").at("fitted_rate").get<double>(), 1.0, 1e-8);

  std::ifstream curve(dir / "csv" / "norm_curve.csv");
  std::string line;
  std::getline(curve, line);
  EXPECT_EQ(line, "t,norm");
  int rows = 0;
  while (std::getline(curve, line)) {
    const auto comma = line.find(',');
    const double t = std::stod(line.substr(0, comma));
    EXPECT_NEAR(std::stod(line.substr(comma + 1)), std::exp(-t), 1e-12);
    ++rows;
  }
  EXPECT_EQ(rows, 6);

  std::ifstream eig(dir / "csv" / "eigenvalues.csv");
  std::getline(eig, line);
  EXPECT_EQ(line, "re,im,converged_flag");
  std::getline(eig, line);
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "1");
  EXPECT_NEAR(std::stod(line.substr(0, line.find(','))), -1.0, 1e-12);
}

TEST(Cli, FileDefaultsAndFlagsCombine) {
  // harmonic.json stores k = 10; --k overrides it
  const CliResult r = run_cli("validate " + fixture_path("harmonic") + " --N 20 --dN 4 --k 2");
  ASSERT_EQ(r.code, 0);
  const json v = json::parse(r.out).at("validation");
  EXPECT_EQ(v.at("k").get<int>(), 2);
  EXPECT_EQ(v.at("comparison").size(), 2u);
  EXPECT_EQ(v.at("tol_match").get<double>(), 1e-10);
}
