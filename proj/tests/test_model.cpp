#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "grm/csv.hpp"
#include "grm/model.hpp"
#include "grm/rng.hpp"
#include "oracles.hpp"

using namespace grm;

namespace {

ItemParameters make_item(double a, double b1, double b2, double b3, double b4, int id = 0) {
  ItemParameters item;
  item.item_id = id;
  item.a = a;
  item.b << b1, b2, b3, b4;
  return item;
}

const ItemParameters kSymmetric = make_item(1.0, -2.0, -1.0, 1.0, 2.0);

}  // namespace

TEST_CASE("prob_at_least matches the logistic exceedance form") {
  CHECK(prob_at_least(make_item(1.0, 0.0, 1.0, 2.0, 3.0), 1, 0.0) == doctest::Approx(0.5));
  CHECK(prob_at_least(make_item(2.0, -1.0, 1.3, 2.0, 3.0), 2, 1.3) == doctest::Approx(0.5));

  // scalar oracle: direct evaluation of the exceedance formula
  const double direct = 1.0 / (1.0 + std::exp(-1.2 * (1.0 - 0.5)));
  CHECK(prob_at_least(make_item(1.2, 0.5, 1.0, 2.0, 3.0), 1, 1.0) ==
        doctest::Approx(direct).epsilon(1e-12));
  CHECK(direct == doctest::Approx(0.645656).epsilon(1e-5));
}

TEST_CASE("prob_at_least rejects invalid score indices") {
  CHECK_THROWS_AS(prob_at_least(kSymmetric, 0, 0.0), std::domain_error);
  CHECK_THROWS_AS(prob_at_least(kSymmetric, 5, 0.0), std::domain_error);
}

TEST_CASE("prob_at_least is stable at extreme logits") {
  const ItemParameters item = make_item(50.0, -10.0, -5.0, 5.0, 10.0);
  CHECK(prob_at_least(item, 4, -4.0) > 0.0);
  CHECK(std::isfinite(prob_at_least(item, 1, 4.0)));
  CHECK(prob_at_least(item, 1, 4.0) == doctest::Approx(1.0));
  CHECK(prob_at_least(item, 4, -4.0) < 1e-300 * 1e10);
}

TEST_CASE("category probabilities: limits, symmetry, and normalization") {
  const auto low = category_probabilities(make_item(1.0, -2.0, -1.0, 0.0, 1.0), -50.0);
  CHECK(low[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (int s = 1; s < kCategories; ++s) CHECK(low[s] == doctest::Approx(0.0));

  const auto p = category_probabilities(kSymmetric, 0.0);
  CHECK(p[2] == doctest::Approx(logistic(1.0) - logistic(-1.0)).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.46212).epsilon(1e-4));
  CHECK(p[0] == doctest::Approx(p[4]).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(p[3]).epsilon(1e-12));
}

TEST_CASE("category probabilities sum to one on random inputs") {
  StreamRng rng(2024, 0);
  for (int trial = 0; trial < 10000; ++trial) {
    const ItemParameters item = oracle::random_item(rng.next_u64());
    const double psi = rng.uniform(-6.0, 6.0);
    const auto p = category_probabilities(item, psi);
    double sum = 0.0;
    for (int s = 0; s < kCategories; ++s) {
      CHECK(p[s] >= 0.0);
      CHECK(p[s] <= 1.0);
      sum += p[s];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("exceedance decreases in s and increases in psi") {
  StreamRng rng(99, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const ItemParameters item = oracle::random_item(rng.next_u64());
    const double psi = rng.uniform(-4.0, 4.0);
    for (int s = 1; s < kThresholds; ++s)
      CHECK(prob_at_least(item, s, psi) > prob_at_least(item, s + 1, psi));
    const double lo = rng.uniform(-4.0, 0.0);
    const double hi = lo + rng.uniform(0.01, 4.0);
    for (int s = 1; s <= kThresholds; ++s)
      CHECK(prob_at_least(item, s, hi) > prob_at_least(item, s, lo));
  }
}

TEST_CASE("pattern loglik reduces to per-item log probabilities") {
  const ItemSet empty;
  Eigen::RowVectorXi none(0);
  CHECK(pattern_loglik(empty, none, 0.7) == 0.0);

  const ItemSet one{kSymmetric};
  Eigen::RowVectorXi y1(1);
  y1 << 2;
  CHECK(pattern_loglik(one, y1, 0.3) ==
        doctest::Approx(std::log(category_probabilities(kSymmetric, 0.3)[2])).epsilon(1e-14));

  const ItemSet three{make_item(0.8, -1.5, -0.5, 0.5, 1.5, 0),
                      make_item(1.4, -2.0, -0.2, 0.4, 2.2, 1),
                      make_item(2.1, -1.0, 0.0, 1.0, 2.0, 2)};
  Eigen::RowVectorXi y3(3);
  y3 << 0, 2, 4;
  double expected = 0.0;
  for (int j = 0; j < 3; ++j)
    expected += std::log(category_probabilities(three[j], 0.0)[y3[j]]);
  CHECK(pattern_loglik(three, y3, 0.0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("pattern loglik is floored, never -inf") {
  const ItemSet items{make_item(50.0, -8.0, -6.0, 2.0, 4.0)};
  Eigen::RowVectorXi y(1);
  y << 4;
  const double ll = pattern_loglik(items, y, -10.0);  // logit -700
  CHECK(std::isfinite(ll));
  CHECK(ll >= std::log(1e-300));
}

TEST_CASE("pattern loglik rejects mismatched lengths") {
  const ItemSet items{kSymmetric};
  Eigen::RowVectorXi y(2);
  y << 1, 2;
  CHECK_THROWS_AS(pattern_loglik(items, y, 0.0), DimensionError);
}

TEST_CASE("pattern loglik derivative matches central differences") {
  StreamRng rng(7, 0);
  for (int trial = 0; trial < 200; ++trial) {
    ItemSet items;
    for (int j = 0; j < 5; ++j) items.push_back(oracle::random_item(rng.next_u64(), j));
    const Eigen::RowVectorXi row = oracle::random_pattern(items, rng.next_u64());
    const double psi = rng.uniform(-3.0, 3.0);

    const PatternDerivs d = pattern_loglik_derivs(items, row, psi);
    CHECK(d.value == doctest::Approx(pattern_loglik(items, row, psi)).epsilon(1e-14));
    const double fd =
        oracle::central_diff([&](double x) { return pattern_loglik(items, row, x); }, psi);
    CHECK(d.d1 == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("expected total score: limits, symmetry, monotonicity") {
  const ItemSet items{kSymmetric};
  CHECK(expected_total_score(items, 50.0) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(expected_total_score(items, 0.0) == doctest::Approx(2.0).epsilon(1e-12));

  const ItemParameters item = make_item(1.2, -2.0, -0.5, 0.5, 2.0);
  const auto p = category_probabilities(item, 1.0);
  double direct = 0.0;
  for (int s = 1; s < kCategories; ++s) direct += s * p[s];
  CHECK(expected_total_score({item}, 1.0) == doctest::Approx(direct).epsilon(1e-12));

  StreamRng rng(11, 0);
  ItemSet many;
  for (int j = 0; j < 8; ++j) many.push_back(oracle::random_item(rng.next_u64(), j));
  for (int trial = 0; trial < 200; ++trial) {
    const double lo = rng.uniform(-5.0, 5.0);
    const double hi = lo + rng.uniform(1e-3, 2.0);
    CHECK(expected_total_score(many, hi) > expected_total_score(many, lo));
  }

  CHECK_THROWS_AS(expected_total_score(ItemSet{}, 0.0), std::domain_error);
}

TEST_CASE("slope-intercept conversion and roundtrip") {
  const auto si = to_slope_intercept(make_item(1.0, -1.0, 0.0, 1.0, 2.0));
  CHECK(si.d[0] == doctest::Approx(1.0));
  CHECK(si.d[1] == doctest::Approx(0.0));
  CHECK(si.d[2] == doctest::Approx(-1.0));
  CHECK(si.d[3] == doctest::Approx(-2.0));

  CHECK(to_slope_intercept(make_item(2.0, -1.5, 0.0, 1.0, 2.0)).d[0] == doctest::Approx(3.0));

  StreamRng rng(5, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const ItemParameters item = oracle::random_item(rng.next_u64(), trial);
    const ItemParameters back = from_slope_intercept(to_slope_intercept(item));
    CHECK(back.a == doctest::Approx(item.a).epsilon(1e-12));
    for (int k = 0; k < kThresholds; ++k)
      CHECK(back.b[k] == doctest::Approx(item.b[k]).epsilon(1e-12));
    // intercepts strictly decreasing
    const auto si = to_slope_intercept(item);
    for (int k = 1; k < kThresholds; ++k) CHECK(si.d[k] < si.d[k - 1]);
  }

  SlopeInterceptParameters bad;
  bad.a = -1.0;
  CHECK_THROWS_AS(from_slope_intercept(bad), std::domain_error);
}

TEST_CASE("item and response CSV round trips") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "grm_csv_test";
  fs::create_directories(dir);

  ItemSet items;
  StreamRng rng(31, 0);
  for (int j = 0; j < 6; ++j) items.push_back(oracle::random_item(rng.next_u64(), j));
  const std::string item_path = (dir / "items.csv").string();
  write_items_csv(item_path, items);
  const ItemSet back = read_items_csv(item_path);
  REQUIRE(back.size() == items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    CHECK(back[j].item_id == items[j].item_id);
    CHECK(back[j].a == items[j].a);  // bit-exact through 17 significant digits
    for (int k = 0; k < kThresholds; ++k) CHECK(back[j].b[k] == items[j].b[k]);
  }

  ResponseMatrix data;
  data.y.resize(7, 6);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 6; ++j) data.y(i, j) = static_cast<int>(rng.next_u64() % 5);
  const std::string resp_path = (dir / "responses.csv").string();
  write_responses_csv(resp_path, data);
  const ResponseMatrix data_back = read_responses_csv(resp_path);
  CHECK(data_back.y == data.y);
}

TEST_CASE("CSV parse errors carry line and field context") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "grm_csv_test";
  fs::create_directories(dir);
  const std::string path = (dir / "bad.csv").string();
  {
    std::ofstream out(path);
    out << "item,a,b1,b2,b3,b4\n0,not_a_number,-1,0,1,2\n";
  }
  CHECK_THROWS_WITH_AS(read_items_csv(path),
                       doctest::Contains(":2: field 2"), ParseError);

  {
    std::ofstream out(path);
    out << "subject,item,response\n0,0,1\n0,0,3\n";
  }
  CHECK_THROWS_AS(read_responses_csv(path), ParseError);
}
