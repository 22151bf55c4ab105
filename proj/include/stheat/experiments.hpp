#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "stheat/analysis.hpp"
#include "stheat/coupling.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stheat {

/// Configuration of one experiment run.
struct RunConfig {
  std::string experiment;  // ex1 | ex2 | ex3 | ex4 | eig
  int level_min = 2;
  int level_max = 4;
  std::vector<double> alphas = {1.0};
  int quad_space = 3;
  int quad_time = 3;
  int error_quad_space = 5;
  int error_quad_time = 5;
  std::string out_path;  // default: "<experiment>.dat"
  int threads = 1;
  EigMethod eig_method = EigMethod::Auto;
  bool replicate_time_blocks = true;
};

struct ExperimentResult {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, double> fitted_rates;
};

namespace detail {

inline void validate(const RunConfig& cfg) {
  const bool known = cfg.experiment == "ex1" || cfg.experiment == "ex2" ||
                     cfg.experiment == "ex3" || cfg.experiment == "ex4" ||
                     cfg.experiment == "eig";
  if (!known) throw std::invalid_argument("run: unknown experiment '" + cfg.experiment + "'");
  if (cfg.level_min < 1 || cfg.level_max > 6 || cfg.level_min > cfg.level_max)
    throw std::invalid_argument("run: levels must satisfy 1 <= a <= b <= 6");
  for (double a : cfg.alphas)
    if (!(a > 0.0)) throw std::invalid_argument("run: alpha must be positive");
  if (cfg.alphas.empty()) throw std::invalid_argument("run: need at least one alpha");
}

inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

}  // namespace detail

/// Runs one experiment over the configured levels and writes the paper-layout
/// data file; fitted rates go to standard output. Returns the table.
inline ExperimentResult run(const RunConfig& cfg) {
  detail::validate(cfg);
#ifdef _OPENMP
  omp_set_num_threads(std::max(1, cfg.threads));
#endif
  const std::string path =
      cfg.out_path.empty() ? cfg.experiment + ".dat" : cfg.out_path;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("run: cannot open output path '" + path + "'");

  BemConfig bem_cfg;
  bem_cfg.replicate_time_blocks = cfg.replicate_time_blocks;

  ExperimentResult result;
  const bool is_eig = cfg.experiment == "eig";
  const bool is_ex4 = cfg.experiment == "ex4";
  if (is_eig) {
    result.columns = {"Nh", "alpha", "lambda_min"};
    out << "Nh alpha lambda_min\n";
  } else if (is_ex4) {
    result.columns = {"dofsh", "e_eq"};
    out << "dofsh e_eq\n";
  } else {
    result.columns = {"dofsh", "e_usigmah_Hdiv", "e_uh_L2L2", "e_uh_L2H1", "e_sigmah_L2"};
    out << "dofsh e_usigmah_Hdiv e_uh_L2L2 e_uh_L2H1 e_sigmah_L2\n";
  }

  ManufacturedCase mcase;
  if (!is_eig) mcase = make_case(cfg.experiment);
  ProblemData eig_data;
  if (is_eig) {
    eig_data.A = identity_diffusion();
    eig_data.f = [](double, const Eigen::Vector2d&) { return 0.0; };
    eig_data.u0 = [](const Eigen::Vector2d&) { return 0.0; };
    eig_data.uD = [](double, const Eigen::Vector2d&) { return 0.0; };
    eig_data.phiN = [](double, const Eigen::Vector2d&, const Eigen::Vector2d&) { return 0.0; };
  }
  const ProblemData& data = is_eig ? eig_data : mcase.data;

  for (int level = cfg.level_min; level <= cfg.level_max; ++level) {
    try {
      const SpaceTimeMesh mesh = build_unit_square_mesh(level);
      const double nh = static_cast<double>(mesh.node_count());
      const CouplingBlocks blocks =
          assemble_coupling_blocks(mesh, data, cfg.quad_space, cfg.quad_time, bem_cfg);
      if (is_eig) {
        EigenvalueStudy study(blocks);
        for (double alpha : cfg.alphas) {
          const double lambda = study.min_eigenvalue(alpha, cfg.eig_method);
          out << static_cast<long long>(nh) << " " << detail::format_value(alpha) << " "
              << detail::format_value(lambda) << "\n";
          result.rows.push_back({nh, alpha, lambda});
        }
      } else {
        const CoupledSystem system = make_coupled_system(mesh, blocks, data, cfg.alphas.front());
        const SolutionField field = solve(mesh, system);
        if (is_ex4) {
          const double e_eq =
              fosls_residual_norm_sq(field, data, cfg.error_quad_space, cfg.error_quad_time);
          out << static_cast<long long>(nh) << " " << detail::format_value(e_eq) << "\n";
          result.rows.push_back({nh, e_eq});
        } else {
          const ErrorRow row =
              error_norms(field, mcase, cfg.error_quad_space, cfg.error_quad_time);
          out << static_cast<long long>(nh) << " " << detail::format_value(row.div_sq) << " "
              << detail::format_value(row.l2_sq) << " " << detail::format_value(row.h1_sq) << " "
              << detail::format_value(row.sigma_sq) << "\n";
          result.rows.push_back({nh, row.div_sq, row.l2_sq, row.h1_sq, row.sigma_sq});
        }
      }
      out.flush();
    } catch (const std::exception& e) {
      std::cerr << "run: level " << level << " failed: " << e.what() << "\n";
    }
  }

  // Fitted rates of log(value) vs log(N_h).
  if (!is_eig && result.rows.size() >= 2) {
    std::vector<double> nh;
    for (const auto& r : result.rows) nh.push_back(r[0]);
    for (std::size_t col = 1; col < result.columns.size(); ++col) {
      std::vector<double> vals;
      for (const auto& r : result.rows) vals.push_back(r[col]);
      try {
        const double slope = fit_rate(nh, vals);
        result.fitted_rates[result.columns[col]] = slope;
        std::cout << cfg.experiment << " rate " << result.columns[col] << " " << slope << "\n";
        if (is_ex4 && result.rows.size() >= 2) {
          const double tail = fit_rate(nh, vals, 2);
          result.fitted_rates["e_eq_last2"] = tail;
          std::cout << cfg.experiment << " rate e_eq (two finest) " << tail << "\n";
        }
      } catch (const std::exception& e) {
        std::cerr << "run: rate fit for " << result.columns[col] << " failed: " << e.what()
                  << "\n";
      }
    }
  }
  return result;
}

}  // namespace stheat
