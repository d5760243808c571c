#pragma once

#include <Eigen/Core>

#include "grm/types.hpp"

namespace grm {

// Nodes and weights approximating expectations under the standard normal
// density: sum_q w_q f(x_q) ~ E[f(Z)]. Nodes ascend and the rule is symmetric
// about zero; weights are positive and sum to one.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

// Probabilists' Gauss-Hermite rule with q nodes, exact for polynomials of
// degree <= 2q-1 against the standard normal.
QuadratureRule gauss_hermite_normal(int q);

// log integral of the pattern likelihood against the normal prior, replaced
// by the weighted sum over grid points and evaluated with log-sum-exp.
double marginal_loglik_ghq(const ItemSet& items, const ResponseRow& responses,
                           const QuadratureRule& rule);

// Sum of per-subject GHQ marginals over all rows.
double dataset_loglik_ghq(const ItemSet& items, const ResponseMatrix& data,
                          const QuadratureRule& rule);

// Per-item, per-category log-probability table at the rule's nodes:
// table[j](s, q) = log P(Y_j = s | x_q). Shared by the GHQ likelihood and the
// EM steps so the dataset scan is a pure gather.
std::vector<Eigen::Matrix<double, 5, Eigen::Dynamic>> node_logprob_table(
    const ItemSet& items, const QuadratureRule& rule);

}  // namespace grm
