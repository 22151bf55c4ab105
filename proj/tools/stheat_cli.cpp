// Experiment driver: reproduces the convergence studies and the coercivity
// eigenvalue table as plot-ready data files.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stheat/experiments.hpp"

namespace {

bool parse_levels(const std::string& text, int& lo, int& hi) {
  const auto pos = text.find(':');
  try {
    if (pos == std::string::npos) {
      lo = hi = std::stoi(text);
    } else {
      lo = std::stoi(text.substr(0, pos));
      hi = std::stoi(text.substr(pos + 1));
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

std::vector<double> parse_alphas(const std::string& text) {
  std::vector<double> alphas;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) alphas.push_back(std::stod(item));
  return alphas;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time FOSLS-BEM solver for the parabolic transmission problem"};

  std::string experiment;
  std::string levels = "2:4";
  std::string alpha = "1";
  std::string out_path;
  std::string eig_method = "auto";
  stheat::RunConfig cfg;

  app.add_option("--experiment", experiment, "ex1 | ex2 | ex3 | ex4 | eig")->required();
  app.add_option("--levels", levels, "refinement level range a:b (within 1..6)");
  app.add_option("--alpha", alpha, "FOSLS weight; comma-separated list for eig");
  app.add_option("--quad-space", cfg.quad_space, "spatial quadrature points per direction");
  app.add_option("--quad-time", cfg.quad_time, "temporal quadrature points");
  app.add_option("--out", out_path, "output data file (default <experiment>.dat)");
  app.add_option("--threads", cfg.threads, "assembly thread count");
  app.add_option("--eig-method", eig_method, "auto | dense | lanczos");
  app.add_flag("--no-toeplitz", "assemble every time block independently instead of "
                                "computing each time offset once");

  CLI11_PARSE(app, argc, argv);

  cfg.experiment = experiment;
  cfg.out_path = out_path.empty() ? experiment + ".dat" : out_path;
  if (!parse_levels(levels, cfg.level_min, cfg.level_max)) {
    std::cerr << "invalid --levels '" << levels << "' (expected a:b)\n";
    return 1;
  }
  try {
    cfg.alphas = parse_alphas(alpha);
  } catch (const std::exception&) {
    std::cerr << "invalid --alpha '" << alpha << "'\n";
    return 1;
  }
  if (eig_method == "dense")
    cfg.eig_method = stheat::EigMethod::Dense;
  else if (eig_method == "lanczos")
    cfg.eig_method = stheat::EigMethod::Lanczos;
  else if (eig_method == "auto")
    cfg.eig_method = stheat::EigMethod::Auto;
  else {
    std::cerr << "invalid --eig-method '" << eig_method << "'\n";
    return 1;
  }
  cfg.replicate_time_blocks = app.count("--no-toeplitz") == 0;

  try {
    stheat::run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
