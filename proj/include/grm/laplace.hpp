#pragma once

#include "grm/fit.hpp"
#include "grm/types.hpp"

namespace grm {

// Joint log-density of (responses, eta) under the standard-normal prior,
// g(eta) = pattern_loglik(eta) - eta^2/2 - log(2 pi)/2, with analytic
// derivatives.
struct JointDensity {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};
JointDensity joint_logdensity(const ItemSet& items, const ResponseRow& responses, double eta);

// Posterior mode of the latent variable with the curvature H = -g''(eta_hat)
// at the mode. The pattern log-likelihood is concave in eta, so H >= 1.
struct ModeResult {
  double eta_hat = 0.0;
  double curvature = 1.0;
  int iterations = 0;
};
ModeResult find_posterior_mode(const ItemSet& items, const ResponseRow& responses,
                               double inner_tolerance, double eta_start = 0.0);

// Laplace approximation to the per-subject marginal log-likelihood:
// g(eta_hat) + log(2 pi)/2 - log(H)/2. Exact for the zero-item (pure
// Gaussian) case.
double marginal_loglik_laplace(const ItemSet& items, const ResponseRow& responses,
                               double inner_tolerance = 1e-8);

// Sum of per-subject Laplace marginals; the outer objective of fit_laplace.
double dataset_loglik_laplace(const ItemSet& items, const ResponseMatrix& data,
                              double inner_tolerance = 1e-8);

// Maximum-likelihood fit of the item parameters under the Laplace
// approximation: quasi-Newton outer loop on the ordered-gap coordinates,
// forward finite-difference gradients, per-subject modes warm-started from
// the previous outer iteration.
FitResult fit_laplace(const ResponseMatrix& data, const ItemSet& init, const FitConfig& config);

}  // namespace grm
