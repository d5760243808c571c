#include "grm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "grm/model.hpp"

namespace grm {

std::string to_string(ParameterKind kind) {
  switch (kind) {
    case ParameterKind::A: return "a";
    case ParameterKind::B1: return "b1";
    case ParameterKind::B2: return "b2";
    case ParameterKind::B3: return "b3";
    case ParameterKind::B4: return "b4";
  }
  return "a";
}

std::vector<ErrorRecord> estimation_errors(const ItemSet& estimates, const ItemSet& truth,
                                           int scenario_id, int replicate) {
  if (estimates.size() != truth.size())
    throw PairingError("estimate and truth item counts differ");
  std::map<int, const ItemParameters*> by_id;
  for (const ItemParameters& item : truth) by_id[item.item_id] = &item;

  std::vector<ErrorRecord> records;
  records.reserve(estimates.size() * 5);
  for (const ItemParameters& est : estimates) {
    const auto it = by_id.find(est.item_id);
    if (it == by_id.end())
      throw PairingError("no true item with id " + std::to_string(est.item_id));
    const ItemParameters& tru = *it->second;
    records.push_back({scenario_id, replicate, est.item_id, ParameterKind::A, est.a - tru.a});
    for (int k = 0; k < kThresholds; ++k)
      records.push_back({scenario_id, replicate, est.item_id, kParameterKinds[k + 1],
                         est.b[k] - tru.b[k]});
  }
  return records;
}

std::vector<RecoverySummary> recovery_summary(const std::vector<ErrorRecord>& records,
                                              double trim_fraction) {
  if (records.empty()) throw std::invalid_argument("no error records");
  if (trim_fraction < 0.0 || trim_fraction >= 0.5)
    throw std::domain_error("trim fraction must be in [0, 0.5)");

  std::vector<RecoverySummary> out;
  for (ParameterKind kind : kParameterKinds) {
    std::vector<double> e;
    for (const ErrorRecord& r : records)
      if (r.parameter == kind) e.push_back(r.error);
    if (e.empty()) continue;

    // sorted accumulation keeps every statistic exactly permutation-invariant
    std::sort(e.begin(), e.end());

    RecoverySummary s;
    s.parameter = kind;
    s.n = static_cast<int>(e.size());
    double sum = 0.0, sumsq = 0.0;
    for (double v : e) {
      sum += v;
      sumsq += v * v;
    }
    s.bias = sum / s.n;
    s.rmse = std::sqrt(sumsq / s.n);

    const int k = static_cast<int>(std::ceil(trim_fraction * s.n));
    if (2 * k >= s.n)
      throw std::invalid_argument("trim fraction removes every record");
    double trimmed = 0.0;
    for (int i = k; i < s.n - k; ++i) trimmed += e[i] * e[i];
    s.rrmse = std::sqrt(trimmed / (s.n - 2 * k));
    out.push_back(s);
  }
  if (out.empty()) throw std::invalid_argument("no error records in any class");
  return out;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - lo) * (values[lo + 1] - values[lo]);
}

std::vector<ScoreErrorPoint> expected_score_error_curve(const std::vector<ItemSet>& estimates,
                                                        const std::vector<ItemSet>& truths,
                                                        const std::vector<double>& psi_grid) {
  if (psi_grid.empty()) throw std::invalid_argument("empty psi grid");
  if (estimates.size() != truths.size() || estimates.empty())
    throw PairingError("estimate and truth replicate lists differ");
  for (std::size_t r = 0; r < estimates.size(); ++r)
    if (estimates[r].size() != truths[r].size())
      throw PairingError("replicate " + std::to_string(r) + " has mismatched item counts");

  std::vector<ScoreErrorPoint> curve(psi_grid.size());
  std::vector<double> errs(estimates.size());
  for (std::size_t g = 0; g < psi_grid.size(); ++g) {
    const double psi = psi_grid[g];
    for (std::size_t r = 0; r < estimates.size(); ++r) {
      const double m = static_cast<double>(truths[r].size());
      errs[r] = (expected_total_score(estimates[r], psi) - expected_total_score(truths[r], psi)) / m;
    }
    ScoreErrorPoint& pt = curve[g];
    pt.psi = psi;
    double sum = 0.0;
    for (double v : errs) sum += v;
    pt.mean_error = sum / static_cast<double>(errs.size());
    pt.p2_5 = quantile_type7(errs, 0.025);
    pt.p97_5 = quantile_type7(errs, 0.975);
  }
  return curve;
}

double completion_rate(const std::vector<FitResult>& results) {
  if (results.empty()) throw std::invalid_argument("no fit results");
  int converged = 0;
  for (const FitResult& r : results) converged += r.converged ? 1 : 0;
  return static_cast<double>(converged) / static_cast<double>(results.size());
}

LoglikComparison loglik_comparison(const std::vector<std::pair<FitResult, FitResult>>& pairs,
                                   double lower_threshold, double large_threshold) {
  if (pairs.empty()) throw std::invalid_argument("no fit pairs");
  LoglikComparison out;
  out.differences.reserve(pairs.size());
  int lower = 0, large = 0;
  for (const auto& [laplace, ghq] : pairs) {
    if (laplace.method != FitMethod::Laplace || ghq.method != FitMethod::GhqEm)
      throw PairingError("pair is not (Laplace, GhqEm)");
    const double diff = laplace.loglik - ghq.loglik;
    out.differences.push_back(diff);
    const double scale = std::max(std::abs(laplace.loglik), std::abs(ghq.loglik));
    if (diff < -lower_threshold * scale) ++lower;
    if (std::abs(diff) > large_threshold * scale) ++large;
  }
  out.laplace_lower_fraction = static_cast<double>(lower) / static_cast<double>(pairs.size());
  out.large_relative_fraction = static_cast<double>(large) / static_cast<double>(pairs.size());
  return out;
}

}  // namespace grm
