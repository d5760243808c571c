#include "grm/em.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>

#include "grm/model.hpp"

namespace grm {

namespace {

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double mx = x.mean(), my = y.mean();
  const Eigen::ArrayXd dx = x.array() - mx, dy = y.array() - my;
  const double denom = std::sqrt(dx.square().sum() * dy.square().sum());
  if (!(denom > 0.0)) return 0.0;
  return (dx * dy).sum() / denom;
}

// Gradient and Hessian of sum_s counts(s) * log P_s at one node, accumulated
// in the natural coordinates (a, b1..b4).
void accumulate_node(const ItemParameters& item, double x,
                     const Eigen::Ref<const Eigen::Matrix<double, 5, 1>>& counts, double& value,
                     Eigen::Matrix<double, 5, 1>& grad, Eigen::Matrix<double, 5, 5>& hess) {
  double sigma[6] = {1.0, 0, 0, 0, 0, 0.0};
  double uu[6] = {0.0, 0, 0, 0, 0, 0.0};
  double ww[6] = {0.0, 0, 0, 0, 0, 0.0};
  for (int t = 1; t <= kThresholds; ++t) {
    const double s = logistic(item.a * (x - item.b[t - 1]));
    sigma[t] = s;
    uu[t] = s * (1.0 - s);
    ww[t] = uu[t] * (1.0 - 2.0 * s);
  }

  Eigen::Matrix<double, 5, 1> dp;
  Eigen::Matrix<double, 5, 5> d2p;
  for (int s = 0; s < kCategories; ++s) {
    const double r = counts[s];
    if (r == 0.0) continue;
    const double p = std::max(sigma[s] - sigma[s + 1], kProbFloor);
    value += r * std::log(p);

    dp.setZero();
    d2p.setZero();
    // dsigma_t = u_t v_t with v_t = (x - b_t) on the a axis and -a on the b_t
    // axis; d2sigma_t = w_t v_t v_t' plus the cross term from d2z/da db = -1.
    for (int which = 0; which < 2; ++which) {
      const int t = which == 0 ? s : s + 1;
      if (t < 1 || t > kThresholds) continue;
      const double sign = which == 0 ? 1.0 : -1.0;
      const double va = x - item.b[t - 1];
      dp[0] += sign * uu[t] * va;
      dp[t] += sign * uu[t] * -item.a;
      d2p(0, 0) += sign * ww[t] * va * va;
      d2p(0, t) += sign * (ww[t] * va * -item.a - uu[t]);
      d2p(t, 0) = d2p(0, t);
      d2p(t, t) += sign * ww[t] * item.a * item.a;
    }
    grad += (r / p) * dp;
    hess += (r / p) * d2p - (r / (p * p)) * (dp * dp.transpose());
  }
}

}  // namespace

ItemSet starting_values(const ResponseMatrix& data) {
  validate(data);
  const int n = data.subjects(), m = data.items();

  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) total[i] = data.y.row(i).sum();

  ItemSet items(m);
  for (int j = 0; j < m; ++j) {
    const Eigen::VectorXd col = data.y.col(j).cast<double>();
    if ((col.array() == col[0]).all())
      throw DegenerateItemError("item " + std::to_string(j) + " has a constant column");

    const double r = std::clamp(pearson(col, total - col), -0.999, 0.999);
    const double a = std::clamp(2.0 * r / std::sqrt(1.0 - r * r), 0.2, 5.0);

    ItemParameters item;
    item.item_id = j;
    item.a = a;
    for (int s = 1; s <= kThresholds; ++s) {
      double frac = (col.array() >= static_cast<double>(s)).cast<double>().mean();
      frac = std::clamp(frac, 0.5 / n, 1.0 - 0.5 / n);
      item.b[s - 1] = -std::log(frac / (1.0 - frac)) / a;
      if (s > 1) item.b[s - 1] = std::max(item.b[s - 1], item.b[s - 2] + 0.05);
    }
    items[j] = item;
  }
  return items;
}

ExpectedCounts e_step(const ResponseMatrix& data, const ItemSet& items,
                      const QuadratureRule& rule) {
  if (static_cast<int>(items.size()) != data.items())
    throw DimensionError("data column count does not match item count");
  const int n = data.subjects(), m = data.items(), q = rule.size();

  const auto table = node_logprob_table(items, rule);
  const Eigen::ArrayXd logw = rule.weights.array().log();

  ExpectedCounts counts;
  counts.node_mass = Eigen::VectorXd::Zero(q);
  counts.category_mass.assign(m, Eigen::Matrix<double, 5, Eigen::Dynamic>::Zero(5, q));

  Eigen::ArrayXd lw(q), pi(q);
  for (int i = 0; i < n; ++i) {
    lw = logw;
    for (int j = 0; j < m; ++j) lw += table[j].row(data.y(i, j)).array();
    const double mx = lw.maxCoeff();
    pi = (lw - mx).exp();
    const double norm = pi.sum();
    counts.loglik += mx + std::log(norm);
    pi /= norm;
    counts.node_mass.array() += pi;
    for (int j = 0; j < m; ++j) counts.category_mass[j].row(data.y(i, j)).array() += pi.transpose();
  }
  return counts;
}

ItemObjective item_complete_data_objective(const ItemVector& u,
                                           const Eigen::Matrix<double, 5, Eigen::Dynamic>& counts,
                                           const QuadratureRule& rule) {
  if (counts.cols() != rule.size())
    throw DimensionError("count columns do not match quadrature size");
  const ItemParameters item = unpack_item(0, u);

  ItemObjective nat;
  for (int k = 0; k < rule.size(); ++k)
    accumulate_node(item, rule.nodes[k], counts.col(k), nat.value, nat.grad, nat.hess);

  // Chain rule into (log a, b1, log-gap) coordinates: theta = theta(u) with
  // jacobian J, hess_u = J' H J + sum_i grad_i d2theta_i.
  Eigen::Matrix<double, 5, 5> jac = Eigen::Matrix<double, 5, 5>::Zero();
  jac(0, 0) = item.a;
  for (int t = 1; t <= kThresholds; ++t) jac(t, 1) = 1.0;
  for (int k = 2; k <= kThresholds; ++k) {
    const double gap = item.b[k - 1] - item.b[k - 2];
    for (int t = k; t <= kThresholds; ++t) jac(t, k) = gap;
  }

  ItemObjective out;
  out.value = nat.value;
  out.grad = jac.transpose() * nat.grad;
  out.hess = jac.transpose() * nat.hess * jac;
  out.hess(0, 0) += nat.grad[0] * item.a;
  for (int k = 2; k <= kThresholds; ++k) {
    const double gap = item.b[k - 1] - item.b[k - 2];
    double tail = 0.0;
    for (int t = k; t <= kThresholds; ++t) tail += nat.grad[t];
    out.hess(k, k) += tail * gap;
  }
  return out;
}

namespace {

ItemVector maximize_item(const ItemVector& start,
                         const Eigen::Matrix<double, 5, Eigen::Dynamic>& counts,
                         const QuadratureRule& rule) {
  ItemVector u = start;
  ItemObjective obj = item_complete_data_objective(u, counts, rule);

  for (int step = 0; step < 50; ++step) {
    if (obj.grad.cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, std::abs(obj.value))) break;

    // Newton direction on -hess, Levenberg-damped until positive definite.
    Eigen::Matrix<double, 5, 5> neg = -obj.hess;
    double lambda = 0.0;
    ItemVector dir;
    bool solved = false;
    for (int escalation = 0; escalation <= 50; ++escalation) {
      Eigen::LDLT<Eigen::Matrix<double, 5, 5>> ldlt(neg +
                                                    lambda * Eigen::Matrix<double, 5, 5>::Identity());
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        dir = ldlt.solve(obj.grad);
        if (dir.allFinite() && dir.dot(obj.grad) > 0.0) {
          solved = true;
          break;
        }
      }
      lambda = lambda == 0.0 ? 1e-6 * std::max(1.0, neg.diagonal().cwiseAbs().maxCoeff())
                             : lambda * 10.0;
    }
    if (!solved) throw ItemUpdateError("item update: curvature not negative-definite");

    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      const ItemVector u_try = u + t * dir;
      const ItemObjective obj_try = item_complete_data_objective(u_try, counts, rule);
      if (std::isfinite(obj_try.value) && obj_try.value >= obj.value) {
        u = u_try;
        obj = obj_try;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if ((t * dir).cwiseAbs().maxCoeff() < 1e-10) break;
  }
  return u;
}

}  // namespace

ItemSet m_step(const ExpectedCounts& counts, const ItemSet& items, const QuadratureRule& rule) {
  if (counts.category_mass.size() != items.size())
    throw DimensionError("count blocks do not match item count");
  ItemSet updated(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    const ItemVector u = maximize_item(pack_item(items[j]), counts.category_mass[j], rule);
    updated[j] = unpack_item(items[j].item_id, u);
  }
  return updated;
}

FitResult fit_ghq_em(const ResponseMatrix& data, const ItemSet& init, const FitConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  validate(data);
  if (static_cast<int>(init.size()) != data.items())
    throw DimensionError("initial item count does not match data columns");
  for (const ItemParameters& item : init) validate(item);

  const QuadratureRule rule = gauss_hermite_normal(config.quadrature_points);

  FitResult result;
  result.method = FitMethod::GhqEm;
  result.estimates = init;

  ItemSet items = init;
  FitStatus status = FitStatus::MaxIterations;
  int iterations = 0;

  try {
    for (int iter = 1; iter <= config.max_outer_iterations; ++iter) {
      iterations = iter;
      const ExpectedCounts counts = e_step(data, items, rule);
      result.loglik_trace.push_back(counts.loglik);
      const ItemSet updated = m_step(counts, items, rule);

      double delta = 0.0;
      for (std::size_t j = 0; j < items.size(); ++j) {
        delta = std::max(delta, std::abs(updated[j].a - items[j].a));
        delta = std::max(delta, (updated[j].b - items[j].b).cwiseAbs().maxCoeff());
      }
      items = updated;
      if (delta < config.em_param_tolerance) {
        status = FitStatus::Converged;
        break;
      }
    }
    result.estimates = items;
    result.loglik = dataset_loglik_ghq(items, data, rule);
    result.loglik_trace.push_back(result.loglik);
  } catch (const ItemUpdateError&) {
    status = FitStatus::NumericalFailure;
    result.estimates = items;
    result.loglik = result.loglik_trace.empty() ? std::nan("") : result.loglik_trace.back();
  }

  result.status = status;
  result.converged = status == FitStatus::Converged;
  result.outer_iterations = iterations;
  result.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t_start)
                            .count();
  return result;
}

}  // namespace grm
