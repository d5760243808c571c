#pragma once

#include <string>
#include <vector>

#include "grm/types.hpp"

namespace grm {

enum class FitMethod { Laplace, GhqEm };

enum class FitStatus {
  Converged,
  MaxIterations,
  LineSearchFailure,
  BoundaryStuck,
  NumericalFailure,
};

// Box constraints on the natural scale. Thresholds share one interval; the
// paper sets only the upper threshold bound to 10, the symmetric lower bound
// and the discrimination cap are engine defaults.
struct ParameterBounds {
  double a_lower = 1e-6;
  double a_upper = 50.0;
  double b_lower = -10.0;
  double b_upper = 10.0;
};

// Shared fit configuration for both estimators. quadrature_points is unused
// by the Laplace path.
struct FitConfig {
  int max_outer_iterations = 500;
  double outer_tolerance = 1e-7;   // relative objective change (Laplace)
  double inner_tolerance = 1e-8;   // |g'| threshold for mode finding
  double em_param_tolerance = 1e-4;  // max absolute parameter change (EM)
  ParameterBounds bounds;
  int quadrature_points = 61;
};

struct FitResult {
  ItemSet estimates;
  double loglik = 0.0;
  bool converged = false;
  FitStatus status = FitStatus::NumericalFailure;
  int outer_iterations = 0;
  std::int64_t wall_time_ms = 0;
  FitMethod method = FitMethod::Laplace;

  // Objective value after each accepted outer iteration (Laplace) or the GHQ
  // log-likelihood before each EM cycle plus the final value (EM). Kept in
  // memory for monotonicity checks; not serialized.
  std::vector<double> loglik_trace;
};

std::string to_string(FitMethod method);
std::string to_string(FitStatus status);
FitMethod fit_method_from_string(const std::string& s);
FitStatus fit_status_from_string(const std::string& s);

// JSON with fields: method, converged, status, loglik, outer_iterations,
// wall_time_ms, items:[{item,a,b1,b2,b3,b4}].
std::string fit_result_to_json(const FitResult& result);
FitResult fit_result_from_json(const std::string& text);

void write_fit_result(const std::string& path, const FitResult& result);
FitResult read_fit_result(const std::string& path);

}  // namespace grm
