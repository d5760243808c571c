#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grm/fit.hpp"
#include "grm/quadrature.hpp"
#include "grm/types.hpp"

namespace grm {

// Scenario grid and execution knobs for the recovery study. The shipped
// example config lowers replicates to 200 to keep desk runs short; the
// original comparison used 1000.
struct StudyConfig {
  std::vector<int> sample_sizes{50, 100, 250, 500};
  std::vector<int> item_counts{5, 20};
  int replicates = 1000;
  std::uint64_t base_seed = 1;
  std::vector<FitMethod> methods{FitMethod::Laplace, FitMethod::GhqEm};
  int quadrature_points = 61;
  int jobs = 1;
  std::string output_dir = "study_out";
  FitConfig fit;
  double trim_fraction = 0.01;
  bool include_nonconverged = false;
};

StudyConfig study_config_from_json(const std::string& text);
StudyConfig study_config_from_json_file(const std::string& path);

struct StudyRunStats {
  int fits_run = 0;
  int fits_skipped = 0;
};

// Runs the grid: per (scenario, replicate) simulate once, share the starting
// values across methods, fit each method, persist everything, then aggregate.
// Completed fits found on disk under a matching task key are not re-executed.
StudyRunStats run_study(const StudyConfig& config);

// Rebuild summary.csv, scores.csv, completion.csv, and loglik.csv from a
// persisted study tree; byte-identical to the inline aggregation.
void aggregate_study(const std::string& in_dir, const std::string& out_dir,
                     double trim_fraction = 0.01, bool include_nonconverged = false);

// psi grid used for the expected-score error curves (-4..4, step 0.25).
std::vector<double> score_error_grid();

// One row of the likelihood-approximation figure data: item ICCs, the data
// likelihood, the joint density, the Gaussian curve at the mode, and (on node
// rows) the discrete GHQ mass w_q * exp(pattern loglik).
struct FigureRow {
  double psi = 0.0;
  bool is_node = false;
  double data_likelihood = 0.0;
  double joint_density = 0.0;
  double laplace_approx = 0.0;
  double ghq_mass = 0.0;
  Eigen::VectorXd icc;
};

std::vector<FigureRow> emit_likelihood_figure(const ItemSet& items, const ResponseRow& responses,
                                              const QuadratureRule& rule,
                                              const std::vector<double>& psi_grid);

void write_figure_csv(const std::string& path, const std::vector<FigureRow>& rows);

}  // namespace grm
