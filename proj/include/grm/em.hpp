#pragma once

#include "grm/fit.hpp"
#include "grm/quadrature.hpp"
#include "grm/reparam.hpp"
#include "grm/types.hpp"

namespace grm {

// Complete-data sufficient statistics of the quadrature-discretized model:
// node_mass[q] = sum_i pi_iq and category_mass[j](s, q) = expected count of
// response s to item j at node q.
struct ExpectedCounts {
  Eigen::VectorXd node_mass;
  std::vector<Eigen::Matrix<double, 5, Eigen::Dynamic>> category_mass;
  double loglik = 0.0;  // dataset GHQ log-likelihood at the E-step parameters
};

// Correlation-based starting values: discrimination from the item-rest-score
// correlation, thresholds from inverse-logit exceedance fractions, clipped to
// keep strict ordering with a minimum gap of 0.05.
ItemSet starting_values(const ResponseMatrix& data);

ExpectedCounts e_step(const ResponseMatrix& data, const ItemSet& items,
                      const QuadratureRule& rule);

// Per-item Newton maximization of the complete-data objective, warm-started
// at the current parameters; guaranteed not to decrease any item objective.
ItemSet m_step(const ExpectedCounts& counts, const ItemSet& items, const QuadratureRule& rule);

// Complete-data objective for one item in ordered-gap coordinates, with
// analytic gradient and Hessian.
struct ItemObjective {
  double value = 0.0;
  ItemVector grad = ItemVector::Zero();
  Eigen::Matrix<double, 5, 5> hess = Eigen::Matrix<double, 5, 5>::Zero();
};
ItemObjective item_complete_data_objective(const ItemVector& u,
                                           const Eigen::Matrix<double, 5, Eigen::Dynamic>& counts,
                                           const QuadratureRule& rule);

// Fixed-grid EM: alternate e_step/m_step until the maximum absolute parameter
// change falls under config.em_param_tolerance.
FitResult fit_ghq_em(const ResponseMatrix& data, const ItemSet& init, const FitConfig& config);

}  // namespace grm
