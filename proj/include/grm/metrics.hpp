#pragma once

#include <utility>
#include <vector>

#include "grm/fit.hpp"
#include "grm/types.hpp"

namespace grm {

enum class ParameterKind { A, B1, B2, B3, B4 };

inline constexpr ParameterKind kParameterKinds[] = {
    ParameterKind::A, ParameterKind::B1, ParameterKind::B2, ParameterKind::B3,
    ParameterKind::B4};

std::string to_string(ParameterKind kind);

// One estimation error e = estimate - truth for one item parameter.
struct ErrorRecord {
  int scenario_id = 0;
  int replicate = 0;
  int item_id = 0;
  ParameterKind parameter = ParameterKind::A;
  double error = 0.0;
};

std::vector<ErrorRecord> estimation_errors(const ItemSet& estimates, const ItemSet& truth,
                                           int scenario_id, int replicate);

// Bias, RMSE, and robust RMSE per parameter class. The robust version drops
// the ceil(trim_fraction * n) largest and smallest signed errors before the
// RMSE, i.e. a two-tailed trim of the error distribution.
struct RecoverySummary {
  ParameterKind parameter = ParameterKind::A;
  double bias = 0.0;
  double rmse = 0.0;
  double rrmse = 0.0;
  int n = 0;
};

std::vector<RecoverySummary> recovery_summary(const std::vector<ErrorRecord>& records,
                                              double trim_fraction = 0.01);

// Type-7 (linear interpolation) empirical quantile of a sample.
double quantile_type7(std::vector<double> values, double p);

// Mean and 2.5%/97.5% percentiles across replicates of the expected-total-
// score error (TS(estimates) - TS(truth)) / item count at each grid point.
struct ScoreErrorPoint {
  double psi = 0.0;
  double mean_error = 0.0;
  double p2_5 = 0.0;
  double p97_5 = 0.0;
};

std::vector<ScoreErrorPoint> expected_score_error_curve(const std::vector<ItemSet>& estimates,
                                                        const std::vector<ItemSet>& truths,
                                                        const std::vector<double>& psi_grid);

double completion_rate(const std::vector<FitResult>& results);

// Signed per-replicate log-likelihood differences (Laplace minus GHQ-EM) and
// the fractions the study reports: how often Laplace lands lower than GHQ-EM
// by more than lower_threshold (relative), and how often the two differ by
// more than large_threshold in relative terms.
struct LoglikComparison {
  std::vector<double> differences;
  double laplace_lower_fraction = 0.0;
  double large_relative_fraction = 0.0;
};

LoglikComparison loglik_comparison(const std::vector<std::pair<FitResult, FitResult>>& pairs,
                                   double lower_threshold = 0.0, double large_threshold = 0.05);

}  // namespace grm
