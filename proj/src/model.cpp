#include "grm/model.hpp"

#include <cmath>

namespace grm {

namespace {

// Exceedance probabilities sigma_s = P(Y >= s) and their building blocks for
// one item at one psi. sigma_0 = 1 and sigma_5 = 0 by convention.
inline void exceedance(const ItemParameters& item, double psi, double sigma[6]) {
  sigma[0] = 1.0;
  for (int s = 1; s <= kThresholds; ++s)
    sigma[s] = logistic(item.a * (psi - item.b[s - 1]));
  sigma[5] = 0.0;
}

}  // namespace

double prob_at_least(const ItemParameters& item, int s, double psi) {
  if (s < 1 || s > kThresholds) throw std::domain_error("score index must be in 1..4");
  return logistic(item.a * (psi - item.b[s - 1]));
}

Eigen::Matrix<double, 5, 1> category_probabilities(const ItemParameters& item, double psi) {
  double sigma[6];
  exceedance(item, psi, sigma);
  Eigen::Matrix<double, 5, 1> p;
  for (int s = 0; s < kCategories; ++s) p[s] = std::max(sigma[s] - sigma[s + 1], 0.0);
  return p;
}

double pattern_loglik(const ItemSet& items, const ResponseRow& responses, double psi) {
  if (static_cast<int>(items.size()) != responses.size())
    throw DimensionError("response row length does not match item count");
  double ll = 0.0;
  for (std::size_t j = 0; j < items.size(); ++j) {
    const ItemParameters& item = items[j];
    const int y = responses[static_cast<int>(j)];
    const double hi = y == 0 ? 1.0 : logistic(item.a * (psi - item.b[y - 1]));
    const double lo = y == kThresholds ? 0.0 : logistic(item.a * (psi - item.b[y]));
    ll += std::log(std::max(hi - lo, kProbFloor));
  }
  return ll;
}

PatternDerivs pattern_loglik_derivs(const ItemSet& items, const ResponseRow& responses,
                                    double psi) {
  if (static_cast<int>(items.size()) != responses.size())
    throw DimensionError("response row length does not match item count");
  PatternDerivs out;
  for (std::size_t j = 0; j < items.size(); ++j) {
    const ItemParameters& item = items[j];
    const int y = responses[static_cast<int>(j)];
    // sigma' = a*u and sigma'' = a^2*w with u = sigma(1-sigma), w = u(1-2 sigma).
    double s_hi = 1.0, u_hi = 0.0, w_hi = 0.0;
    if (y > 0) {
      s_hi = logistic(item.a * (psi - item.b[y - 1]));
      u_hi = s_hi * (1.0 - s_hi);
      w_hi = u_hi * (1.0 - 2.0 * s_hi);
    }
    double s_lo = 0.0, u_lo = 0.0, w_lo = 0.0;
    if (y < kThresholds) {
      s_lo = logistic(item.a * (psi - item.b[y]));
      u_lo = s_lo * (1.0 - s_lo);
      w_lo = u_lo * (1.0 - 2.0 * s_lo);
    }
    const double p = std::max(s_hi - s_lo, kProbFloor);
    const double d1 = item.a * (u_hi - u_lo) / p;
    const double d2 = item.a * item.a * (w_hi - w_lo) / p - d1 * d1;
    out.value += std::log(p);
    out.d1 += d1;
    out.d2 += d2;
  }
  return out;
}

double expected_total_score(const ItemSet& items, double psi) {
  if (items.empty()) throw std::domain_error("expected total score needs at least one item");
  // sum_s s * (sigma_s - sigma_{s+1}) telescopes to sum_s sigma_s.
  double ts = 0.0;
  for (const ItemParameters& item : items)
    for (int s = 1; s <= kThresholds; ++s)
      ts += logistic(item.a * (psi - item.b[s - 1]));
  return ts;
}

SlopeInterceptParameters to_slope_intercept(const ItemParameters& item) {
  if (!(item.a > 0.0)) throw std::domain_error("discrimination must be positive");
  SlopeInterceptParameters out;
  out.item_id = item.item_id;
  out.a = item.a;
  out.d = -item.a * item.b;
  return out;
}

ItemParameters from_slope_intercept(const SlopeInterceptParameters& item) {
  if (!(item.a > 0.0)) throw std::domain_error("discrimination must be positive");
  ItemParameters out;
  out.item_id = item.item_id;
  out.a = item.a;
  out.b = -item.d / item.a;
  return out;
}

}  // namespace grm
