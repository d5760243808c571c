#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grm/em.hpp"
#include "grm/model.hpp"
#include "grm/rng.hpp"
#include "grm/simulate.hpp"
#include "oracles.hpp"

using namespace grm;

TEST_CASE("starting values reproduce the exceedance mapping") {
  StreamRng rng(41, 0);
  const ItemSet truth = sample_item_parameters(6, rng.next_u64());
  const SimulatedData sim = simulate_dataset(truth, 400, rng.next_u64());
  const ItemSet init = starting_values(sim.data);
  REQUIRE(init.size() == 6);

  const int n = sim.data.subjects();
  for (int j = 0; j < 6; ++j) {
    CHECK_NOTHROW(validate(init[j]));
    CHECK(init[j].a >= 0.2);
    CHECK(init[j].a <= 5.0);

    // independent re-derivation of the mapping for untouched thresholds
    for (int s = 1; s <= kThresholds; ++s) {
      int count = 0;
      for (int i = 0; i < n; ++i) count += sim.data.y(i, j) >= s ? 1 : 0;
      double frac = static_cast<double>(count) / n;
      frac = std::clamp(frac, 0.5 / n, 1.0 - 0.5 / n);
      const double raw = -std::log(frac / (1.0 - frac)) / init[j].a;
      CHECK(init[j].b[s - 1] >= raw - 1e-12);  // only ever pushed up by the gap rule
      if (s == 1) CHECK(init[j].b[0] == doctest::Approx(raw).epsilon(1e-12));
    }
  }
}

TEST_CASE("flat exceedance fractions get the minimum gap") {
  // responses only in {0, 4}: all four exceedance fractions coincide
  ResponseMatrix data;
  data.y.resize(8, 2);
  data.y.col(0) << 0, 4, 0, 4, 0, 4, 0, 4;
  data.y.col(1) << 0, 0, 4, 4, 0, 0, 4, 4;
  const ItemSet init = starting_values(data);
  for (const ItemParameters& item : init) {
    CHECK(item.b[1] == doctest::Approx(item.b[0] + 0.05).epsilon(1e-12));
    CHECK(item.b[2] == doctest::Approx(item.b[1] + 0.05).epsilon(1e-12));
    CHECK(item.b[3] == doctest::Approx(item.b[2] + 0.05).epsilon(1e-12));
  }
}

TEST_CASE("uncorrelated item gets the floor discrimination") {
  ResponseMatrix data;
  data.y.resize(4, 2);
  data.y.col(0) << 0, 0, 4, 4;
  data.y.col(1) << 0, 4, 0, 4;  // orthogonal to the rest score
  const ItemSet init = starting_values(data);
  CHECK(init[1].a == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("constant item column is degenerate") {
  ResponseMatrix data;
  data.y.resize(5, 2);
  data.y.col(0) << 0, 1, 2, 3, 4;
  data.y.col(1) << 2, 2, 2, 2, 2;
  CHECK_THROWS_AS(starting_values(data), DegenerateItemError);
}

TEST_CASE("e-step masses are a partition of the sample") {
  StreamRng rng(42, 0);
  const ItemSet items = sample_item_parameters(5, rng.next_u64());
  const SimulatedData sim = simulate_dataset(items, 120, rng.next_u64());
  const QuadratureRule rule = gauss_hermite_normal(31);

  const ExpectedCounts counts = e_step(sim.data, items, rule);
  CHECK(counts.node_mass.sum() == doctest::Approx(120.0).epsilon(1e-8));
  for (std::size_t j = 0; j < items.size(); ++j) {
    for (int q = 0; q < rule.size(); ++q) {
      CHECK(counts.category_mass[j].col(q).sum() ==
            doctest::Approx(counts.node_mass[q]).epsilon(1e-8));
      for (int s = 0; s < kCategories; ++s) CHECK(counts.category_mass[j](s, q) >= 0.0);
    }
  }
}

TEST_CASE("two-node e-step equals direct Bayes arithmetic") {
  ItemParameters item;
  item.item_id = 0;
  item.a = 1.3;
  item.b << -1.0, -0.3, 0.4, 1.2;
  const ItemSet items{item};

  ResponseMatrix data;
  data.y.resize(2, 1);
  data.y << 3, 0;

  const QuadratureRule rule = gauss_hermite_normal(2);  // nodes -1, 1; weights 1/2
  const ExpectedCounts counts = e_step(data, items, rule);

  double expected_mass[2] = {0.0, 0.0};
  double expected_ll = 0.0;
  for (int i = 0; i < 2; ++i) {
    double joint[2];
    for (int q = 0; q < 2; ++q)
      joint[q] = rule.weights[q] * category_probabilities(item, rule.nodes[q])[data.y(i, 0)];
    const double denom = joint[0] + joint[1];
    expected_ll += std::log(denom);
    for (int q = 0; q < 2; ++q) expected_mass[q] += joint[q] / denom;
  }
  CHECK(counts.node_mass[0] == doctest::Approx(expected_mass[0]).epsilon(1e-12));
  CHECK(counts.node_mass[1] == doctest::Approx(expected_mass[1]).epsilon(1e-12));
  CHECK(counts.loglik == doctest::Approx(expected_ll).epsilon(1e-12));

  // single subject normalizes to one
  ResponseMatrix one;
  one.y.resize(1, 1);
  one.y << 2;
  CHECK(e_step(one, items, rule).node_mass.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("complete-data objective derivatives match finite differences") {
  const QuadratureRule rule = gauss_hermite_normal(15);
  StreamRng rng(43, 0);
  for (int trial = 0; trial < 100; ++trial) {
    // counts as the E-step would produce them: node masses spread over the
    // prior, category masses from a nearby generating item
    const ItemParameters generator = oracle::random_item(rng.next_u64(), 0);
    Eigen::Matrix<double, 5, Eigen::Dynamic> counts(5, rule.size());
    for (int q = 0; q < rule.size(); ++q) {
      const double mass = 60.0 * rule.weights[q];
      const auto p = category_probabilities(generator, rule.nodes[q]);
      for (int s = 0; s < kCategories; ++s) counts(s, q) = mass * p[s];
    }
    const ItemParameters item = oracle::random_item(rng.next_u64());

    const ItemVector u = pack_item(item);
    const ItemObjective obj = item_complete_data_objective(u, counts, rule);

    for (int k = 0; k < 5; ++k) {
      const double fd = oracle::central_diff(
          [&](double x) {
            ItemVector v = u;
            v[k] = x;
            return item_complete_data_objective(v, counts, rule).value;
          },
          u[k]);
      CHECK(obj.grad[k] ==
            doctest::Approx(fd).epsilon(1e-6).scale(std::max(1.0, std::abs(obj.grad[k]))));
      for (int l = 0; l <= k; ++l) {
        const double fd2 = oracle::central_diff(
            [&](double x) {
              ItemVector v = u;
              v[k] = x;
              return item_complete_data_objective(v, counts, rule).grad[l];
            },
            u[k]);
        CHECK(obj.hess(k, l) ==
              doctest::Approx(fd2).epsilon(1e-6).scale(std::max(1.0, std::abs(obj.hess(k, l)))));
        CHECK(obj.hess(k, l) == doctest::Approx(obj.hess(l, k)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("m-step is stationary at self-consistent counts") {
  const QuadratureRule rule = gauss_hermite_normal(21);
  StreamRng rng(44, 0);
  ItemSet items;
  for (int j = 0; j < 3; ++j) items.push_back(oracle::random_item(rng.next_u64(), j));

  ExpectedCounts counts;
  counts.node_mass = 50.0 * rule.weights;
  counts.category_mass.resize(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    counts.category_mass[j].resize(5, rule.size());
    for (int q = 0; q < rule.size(); ++q) {
      const auto p = category_probabilities(items[j], rule.nodes[q]);
      for (int s = 0; s < kCategories; ++s)
        counts.category_mass[j](s, q) = counts.node_mass[q] * p[s];
    }
  }

  const ItemSet updated = m_step(counts, items, rule);
  for (std::size_t j = 0; j < items.size(); ++j) {
    CHECK(updated[j].a == doctest::Approx(items[j].a).epsilon(1e-6));
    for (int k = 0; k < kThresholds; ++k)
      CHECK(updated[j].b[k] == doctest::Approx(items[j].b[k]).epsilon(1e-6));
  }
}

TEST_CASE("m-step never decreases the complete-data objective") {
  const QuadratureRule rule = gauss_hermite_normal(21);
  StreamRng rng(45, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const ItemSet truth = sample_item_parameters(4, rng.next_u64());
    const SimulatedData sim = simulate_dataset(truth, 80, rng.next_u64());
    const ItemSet start = starting_values(sim.data);
    const ExpectedCounts counts = e_step(sim.data, start, rule);
    const ItemSet updated = m_step(counts, start, rule);

    for (std::size_t j = 0; j < truth.size(); ++j) {
      const double before =
          item_complete_data_objective(pack_item(start[j]), counts.category_mass[j], rule).value;
      const double after =
          item_complete_data_objective(pack_item(updated[j]), counts.category_mass[j], rule).value;
      CHECK(after >= before - 1e-12);
    }
  }
}

TEST_CASE("m-step recovers parameters from exact large-sample counts") {
  const QuadratureRule rule = gauss_hermite_normal(61);
  ItemParameters star;
  star.item_id = 0;
  star.a = 1.4;
  star.b << -1.8, -0.4, 0.6, 1.7;

  ExpectedCounts counts;
  counts.node_mass = 1e5 * rule.weights;
  counts.category_mass.resize(1);
  counts.category_mass[0].resize(5, rule.size());
  for (int q = 0; q < rule.size(); ++q) {
    const auto p = category_probabilities(star, rule.nodes[q]);
    for (int s = 0; s < kCategories; ++s)
      counts.category_mass[0](s, q) = counts.node_mass[q] * p[s];
  }

  ItemParameters perturbed = star;
  perturbed.a = 1.0;
  perturbed.b << -1.0, -0.2, 0.3, 1.0;
  const ItemSet updated = m_step(counts, {perturbed}, rule);
  CHECK(updated[0].a == doctest::Approx(star.a).epsilon(1e-2));
  for (int k = 0; k < kThresholds; ++k)
    CHECK(updated[0].b[k] == doctest::Approx(star.b[k]).epsilon(1e-2));
}

TEST_CASE("EM: monotone log-likelihood, convergence, determinism") {
  StreamRng rng(46, 0);
  const ItemSet truth = sample_item_parameters(4, rng.next_u64());
  const SimulatedData sim = simulate_dataset(truth, 150, rng.next_u64());
  const ItemSet init = starting_values(sim.data);

  FitConfig config;
  const FitResult fit = fit_ghq_em(sim.data, init, config);
  CHECK(fit.method == FitMethod::GhqEm);
  CHECK(fit.converged == (fit.status == FitStatus::Converged));
  REQUIRE(fit.loglik_trace.size() >= 2);
  for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k)
    CHECK(fit.loglik_trace[k] >= fit.loglik_trace[k - 1] - 1e-10);
  for (const ItemParameters& item : fit.estimates) CHECK_NOTHROW(validate(item));

  const FitResult again = fit_ghq_em(sim.data, init, config);
  CHECK(again.loglik == fit.loglik);
  for (std::size_t j = 0; j < fit.estimates.size(); ++j) {
    CHECK(again.estimates[j].a == fit.estimates[j].a);
    for (int k = 0; k < kThresholds; ++k)
      CHECK(again.estimates[j].b[k] == fit.estimates[j].b[k]);
  }
}

TEST_CASE("EM from the truth dominates the truth's likelihood") {
  StreamRng rng(47, 0);
  const ItemSet truth = sample_item_parameters(5, rng.next_u64());
  const SimulatedData sim = simulate_dataset(truth, 200, rng.next_u64());

  FitConfig config;
  const QuadratureRule rule = gauss_hermite_normal(config.quadrature_points);
  const FitResult fit = fit_ghq_em(sim.data, truth, config);
  CHECK(fit.converged);
  CHECK(fit.loglik >= dataset_loglik_ghq(truth, sim.data, rule) - 1e-10);
}
