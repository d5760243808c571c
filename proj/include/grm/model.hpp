#pragma once

#include <Eigen/Core>

#include "grm/types.hpp"

namespace grm {

// Probabilities are floored here before logs so impossible-looking responses
// stay on finite terrain.
inline constexpr double kProbFloor = 1e-300;

// Logistic in the stable branch form: only ever exponentiates -|z|.
inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// P(Y >= s | psi) for s in {1..4}: the cumulative logistic curve of Eq-style
// exceedance form exp(a(psi-b_s)) / (1 + exp(a(psi-b_s))).
double prob_at_least(const ItemParameters& item, int s, double psi);

// The five category masses P(Y = s | psi), s = 0..4; adjacent exceedance
// differences, each clamped at >= 0, summing to 1.
Eigen::Matrix<double, 5, 1> category_probabilities(const ItemParameters& item, double psi);

// Sum over items of log P(Y_j = y_j | psi), with the kProbFloor floor.
double pattern_loglik(const ItemSet& items, const ResponseRow& responses, double psi);

// Pattern log-likelihood together with its first and second psi-derivatives.
struct PatternDerivs {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};
PatternDerivs pattern_loglik_derivs(const ItemSet& items, const ResponseRow& responses,
                                    double psi);

// Expected total score sum_j sum_s s * P(Y_j = s | psi); strictly increasing
// in psi since every a is positive.
double expected_total_score(const ItemSet& items, double psi);

SlopeInterceptParameters to_slope_intercept(const ItemParameters& item);
ItemParameters from_slope_intercept(const SlopeInterceptParameters& item);

}  // namespace grm
