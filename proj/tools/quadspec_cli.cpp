// quadspec_cli: analyze quadratic forms and validate the predictions against
// the Hermite-Galerkin discretization.
//
//   quadspec_cli analyze <file> [--validate] [--json out] [--seed S]
//   quadspec_cli validate <file> --N 30 --dN 10 --k 6 --times 0,0.5,1 [--csv-dir dir]
//   quadspec_cli fixtures [--write dir]
//
// Exit codes: 0 success, 1 malformed input, 2 hypothesis failure (report is
// still written), 3 dimension bounds exceeded.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "quadspec/quadspec.hpp"

namespace fs = std::filesystem;
using namespace quadspec;

namespace {

struct Input {
  QuadraticForm form;
  json raw;
};

Input load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  json raw;
  try {
    in >> raw;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
  try {
    return {form_from_json(raw), raw};
  } catch (const json::exception& e) {
    throw Error(std::string("bad quadratic form: ") + e.what());
  }
}

Tolerances tolerances_from_env() {
  const char* env = std::getenv("QUADSPEC_TOL_OVERRIDES");
  if (env == nullptr || *env == '\0') return {};
  try {
    return tolerances_from_json(json::parse(env));
  } catch (const json::exception& e) {
    throw Error(std::string("QUADSPEC_TOL_OVERRIDES: ") + e.what());
  }
}

/// Defaults stored in the input file under "validation" (N, dN, k, tol_match,
/// window); command line flags given explicitly take precedence.
void apply_file_defaults(const json& raw, AnalysisOptions& opt) {
  if (!raw.contains("validation")) return;
  const json& v = raw.at("validation");
  if (v.contains("N")) opt.N = v.at("N").get<int>();
  if (v.contains("dN")) opt.dN = v.at("dN").get<int>();
  if (v.contains("k")) opt.k = v.at("k").get<int>();
  if (v.contains("tol_match")) opt.tol_match = v.at("tol_match").get<double>();
  if (v.contains("window")) {
    opt.window_lo = v.at("window").at(0).get<double>();
    opt.window_hi = v.at("window").at(1).get<double>();
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw Error("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void write_json(const json& j, const std::string& path) {
  const std::string text = j.dump(2);
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text << "\n";
}

void write_csv(const AnalysisReport& r, const fs::path& dir) {
  if (!r.validation) return;
  fs::create_directories(dir);
  std::ofstream curve(dir / "norm_curve.csv");
  curve << std::setprecision(17) << "t,norm\n";
  for (const auto& s : r.validation->curve) curve << s.t << "," << s.norm << "\n";
  std::ofstream eig(dir / "eigenvalues.csv");
  eig << std::setprecision(17) << "re,im,converged_flag\n";
  for (const auto& row : r.validation->comparison)
    eig << row.galerkin.real() << "," << row.galerkin.imag() << "," << (row.matched ? 1 : 0) << "\n";
}

struct Flags {
  std::string file;
  std::string json_out;
  std::string csv_dir;
  bool validate = false;
  unsigned seed = 1;
  int N = -1, dN = -1, k = -1, p = 1;
  double smoothing_t = 0.2;
  double tol_match = -1.0;
  std::string times;
  std::string window;
};

int run(const Flags& f, bool validate) {
  const Input in = load(f.file);
  const Tolerances tol = tolerances_from_env();
  AnalysisOptions opt;
  opt.validate = validate;
  opt.seed = f.seed;
  apply_file_defaults(in.raw, opt);
  if (f.N >= 0) opt.N = f.N;
  if (f.dN >= 0) opt.dN = f.dN;
  if (f.k >= 0) opt.k = f.k;
  if (f.tol_match > 0) opt.tol_match = f.tol_match;
  opt.smoothing_p = f.p;
  opt.smoothing_t = f.smoothing_t;
  if (!f.times.empty()) opt.times = parse_list(f.times);
  if (!f.window.empty()) {
    const auto w = parse_list(f.window);
    if (w.size() != 2) throw Error("--window expects two numbers a,b");
    opt.window_lo = w[0];
    opt.window_hi = w[1];
  }
  const AnalysisReport report = analyze(in.form, opt, tol, in.raw);
  write_json(json(report), f.json_out);
  if (!f.csv_dir.empty()) write_csv(report, f.csv_dir);
  if (report.exit_code != exit_code::ok) std::cerr << "hypothesis failure: " << report.verdict << "\n";
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis of quadratic differential operators"};
  app.require_subcommand(1);
  Flags f;
  std::string write_dir;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("file", f.file, "QuadraticForm JSON file")->required();
    cmd->add_option("--json", f.json_out, "write the report here instead of stdout");
    cmd->add_option("--seed", f.seed, "seed for randomized diagnostics");
    cmd->add_option("--N", f.N, "Galerkin truncation degree");
    cmd->add_option("--dN", f.dN, "truncation increment for convergence checks");
    cmd->add_option("--k", f.k, "number of eigenvalues to validate");
    cmd->add_option("--times", f.times, "comma separated times for the norm curve");
    cmd->add_option("--window", f.window, "decay fit window a,b");
    cmd->add_option("--tol-match", f.tol_match, "prediction/Galerkin matching tolerance");
    cmd->add_option("--p", f.p, "weight power for the smoothing diagnostic (1 or 2)");
    cmd->add_option("--smoothing-t", f.smoothing_t, "time for the smoothing diagnostic");
    cmd->add_option("--csv-dir", f.csv_dir, "directory for norm_curve.csv and eigenvalues.csv");
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "run the analysis pipeline");
  add_common(analyze_cmd);
  analyze_cmd->add_flag("--validate", f.validate, "also run the Galerkin validation");
  auto* validate_cmd = app.add_subcommand("validate", "analysis plus Galerkin validation");
  add_common(validate_cmd);
  auto* fixtures_cmd = app.add_subcommand("fixtures", "list bundled fixtures");
  fixtures_cmd->add_option("--write", write_dir, "also write each fixture as <dir>/<name>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : exit_code::malformed;
  }

  try {
    if (*fixtures_cmd) {
      for (const auto& fx : fixtures()) {
        std::cout << fx.name << "\t" << fx.provenance << "\n";
        if (!write_dir.empty()) {
          fs::create_directories(write_dir);
          json j = form_to_json(fx.form);
          j["name"] = fx.name;
          j["description"] = fx.provenance;
          write_json(j, (fs::path(write_dir) / (fx.name + ".json")).string());
        }
      }
      return exit_code::ok;
    }
    return run(f, *validate_cmd || f.validate);
  } catch (const DimensionError& e) {
    std::cerr << "dimension bound: " << e.what() << "\n";
    return exit_code::dimension;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    return exit_code::hypothesis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::malformed;
  }
}
