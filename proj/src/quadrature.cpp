#include "grm/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "grm/model.hpp"

namespace grm {

QuadratureRule gauss_hermite_normal(int q) {
  if (q < 1) throw std::domain_error("quadrature needs at least one node");
  if (q > 10000) throw std::length_error("quadrature size above 10000");

  QuadratureRule rule;
  if (q == 1) {
    rule.nodes = Eigen::VectorXd::Zero(1);
    rule.weights = Eigen::VectorXd::Ones(1);
    return rule;
  }

  // Golub-Welsch on the probabilists' recurrence: the Jacobi matrix has zero
  // diagonal and off-diagonals sqrt(k). Nodes are its eigenvalues; weights
  // come from the orthonormal polynomial he_{q-1} at each node, which equals
  // the squared first eigenvector component without forming eigenvectors.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd subdiag(q - 1);
  for (int k = 1; k < q; ++k) subdiag[k - 1] = std::sqrt(static_cast<double>(k));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, subdiag, Eigen::EigenvaluesOnly);
  Eigen::VectorXd nodes = solver.eigenvalues();

  // Enforce exact symmetry about zero.
  for (int i = 0; i < q / 2; ++i) {
    const double t = 0.5 * (nodes[i] - nodes[q - 1 - i]);
    nodes[i] = t;
    nodes[q - 1 - i] = -t;
  }
  if (q % 2 == 1) nodes[q / 2] = 0.0;

  // w_i = 1 / (q * he_{q-1}(x_i)^2) with the orthonormal recurrence
  // he_{k+1} = (x he_k - sqrt(k) he_{k-1}) / sqrt(k+1).
  Eigen::VectorXd weights(q);
  for (int i = 0; i < q; ++i) {
    const double x = nodes[i];
    double prev = 0.0, cur = 1.0;
    for (int k = 0; k < q - 1; ++k) {
      const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                          std::sqrt(static_cast<double>(k + 1));
      prev = cur;
      cur = next;
    }
    weights[i] = 1.0 / (q * cur * cur);
  }
  for (int i = 0; i < q / 2; ++i) {
    const double w = 0.5 * (weights[i] + weights[q - 1 - i]);
    weights[i] = w;
    weights[q - 1 - i] = w;
  }
  weights /= weights.sum();

  rule.nodes = std::move(nodes);
  rule.weights = std::move(weights);
  return rule;
}

double marginal_loglik_ghq(const ItemSet& items, const ResponseRow& responses,
                           const QuadratureRule& rule) {
  if (static_cast<int>(items.size()) != responses.size())
    throw DimensionError("response row length does not match item count");
  const int q = rule.size();
  Eigen::VectorXd lw(q);
  for (int k = 0; k < q; ++k)
    lw[k] = std::log(rule.weights[k]) + pattern_loglik(items, responses, rule.nodes[k]);
  const double m = lw.maxCoeff();
  return m + std::log((lw.array() - m).exp().sum());
}

double dataset_loglik_ghq(const ItemSet& items, const ResponseMatrix& data,
                          const QuadratureRule& rule) {
  if (static_cast<int>(items.size()) != data.items())
    throw DimensionError("data column count does not match item count");
  const auto table = node_logprob_table(items, rule);
  const int q = rule.size();
  const Eigen::ArrayXd logw = rule.weights.array().log();

  double total = 0.0;
  Eigen::ArrayXd lw(q);
  for (int i = 0; i < data.subjects(); ++i) {
    lw = logw;
    for (int j = 0; j < data.items(); ++j) lw += table[j].row(data.y(i, j)).array();
    const double m = lw.maxCoeff();
    total += m + std::log((lw - m).exp().sum());
  }
  return total;
}

std::vector<Eigen::Matrix<double, 5, Eigen::Dynamic>> node_logprob_table(
    const ItemSet& items, const QuadratureRule& rule) {
  const int q = rule.size();
  std::vector<Eigen::Matrix<double, 5, Eigen::Dynamic>> table(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    table[j].resize(5, q);
    for (int k = 0; k < q; ++k) {
      const auto p = category_probabilities(items[j], rule.nodes[k]);
      for (int s = 0; s < kCategories; ++s)
        table[j](s, k) = std::log(std::max(p[s], kProbFloor));
    }
  }
  return table;
}

}  // namespace grm
