// Convergence study for the manufactured p-Navier-Stokes benchmark.
#include "pldg/pldg.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <string>

namespace {

std::pair<int, int> parse_levels(const std::string& s) {
  static const std::regex range(R"(\s*(\d+)\s*\.\.\s*(\d+)\s*)");
  static const std::regex single(R"(\s*(\d+)\s*)");
  std::smatch m;
  if (std::regex_match(s, m, range)) return {std::stoi(m[1]), std::stoi(m[2])};
  if (std::regex_match(s, m, single)) return {std::stoi(m[1]), std::stoi(m[1])};
  throw CLI::ValidationError("--levels", "expected N or A..B, got '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EOC study for the LDG discretization of the steady p-Navier-Stokes equations"};
  pldg::RunConfig config;
  config.p_values.clear();
  std::string levels = "0..5";
  std::string out = "-";
  std::string format = "csv";
  std::string mode = "navier-stokes";
  std::string base = "beta";
  bool no_damping = false;
  bool no_timing = false;

  app.add_option("--p", config.p_values, "power-law exponents (p > 2)")->required()->check(CLI::Range(2.0, 1e3));
  app.add_option("--case", config.case_id, "pressure regularity case")->check(CLI::IsMember({1, 2}));
  app.add_option("--mode", mode, "flow model")->check(CLI::IsMember({"navier-stokes", "stokes"}));
  app.add_option("--levels", levels, "refinement levels, N or A..B (level 0: 32 triangles, h = 1/sqrt(2))");
  app.add_option("--alpha", config.alpha, "stabilization parameter")->check(CLI::PositiveNumber);
  app.add_option("--delta", config.delta, "shift delta >= 0")->check(CLI::NonNegativeNumber);
  app.add_option("--degree", config.degree, "polynomial degree k")->check(CLI::Range(1, 6));
  app.add_option("--out", out, "output file, '-' for stdout");
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--case2-exponent-base", base, "constant c in gamma = c(p-2)/2 for case 2")
      ->check(CLI::IsMember({"alpha", "beta"}));
  app.add_flag("--warm-start", config.warm_start, "start Newton from the prolongated coarser solution");
  app.add_flag("--no-damping", no_damping, "disable the Newton line search");
  app.add_option("--max-iterations", config.newton.max_iterations, "Newton iteration limit")->check(CLI::PositiveNumber);
  app.add_flag("--no-timing", no_timing, "report 0 in the seconds column (byte-reproducible output)");
  CLI11_PARSE(app, argc, argv);

  try {
    std::tie(config.first_level, config.last_level) = parse_levels(levels);
    if (config.first_level > config.last_level) throw CLI::ValidationError("--levels", "empty range");
    for (double p : config.p_values)
      if (!(p > 2.0)) throw CLI::ValidationError("--p", "p must exceed 2");
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
  config.mode = mode == "stokes" ? pldg::FlowMode::stokes : pldg::FlowMode::navier_stokes;
  config.case2_base = base == "beta" ? pldg::ExponentBase::beta : pldg::ExponentBase::alpha;
  config.newton.damping = !no_damping;

  std::vector<pldg::EOCReport> reports;
  try {
    reports = pldg::run_series(config, &std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
#ifdef PLDG_HAVE_UMFPACK
  if (pldg::linear_solver_name() != "UMFPACK")
    std::cerr << "note: UMFPACK returned inaccurate solutions and was replaced by SparseLU; "
                 "if OpenBLAS is in use, OPENBLAS_CORETYPE=Haswell usually fixes this\n";
#endif
  if (no_timing)
    for (auto& r : reports)
      for (auto& row : r.rows) row.seconds = 0.0;

  std::ofstream file;
  if (out != "-") {
    file.open(out);
    if (!file) {
      std::cerr << "error: cannot open " << out << '\n';
      return 2;
    }
  }
  std::ostream& os = out == "-" ? std::cout : file;
  if (format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) j.push_back(pldg::to_json(r));
    os << j.dump(2) << '\n';
  } else {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (reports.size() > 1) os << (i ? "\n" : "") << "# p=" << reports[i].p << '\n';
      pldg::write_csv(os, reports[i]);
    }
  }

  bool ok = true;
  for (const auto& r : reports) ok = ok && r.all_converged();
  if (!ok) std::cerr << "error: Newton did not converge on every level\n";
  return ok ? 0 : 1;
}
