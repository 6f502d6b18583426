#include <doctest.h>

#include <cmath>

#include "mimca/multi.hpp"
#include "mimca/table.hpp"

using namespace mimca;

namespace {

CategoricalTable incomplete_table() {
  CategoricalTable t({{"v1", {"A", "B"}}, {"v2", {"x", "y", "z"}}, {"v3", {"p", "q"}}},
                     {{0, 0, 0}, {0, 0, 1}, {1, 1, 0}, {1, 2, 1}, {0, 1, 0},
                      {1, 2, 1}, {0, 0, 0}, {1, 1, 1}, {0, 2, 0}, {1, 0, 1}});
  t.set_cell(1, 0, kMissing);
  t.set_cell(4, 1, kMissing);
  t.set_cell(7, 2, kMissing);
  t.set_cell(8, 1, kMissing);
  return t;
}

}  // namespace

TEST_CASE("bootstrap weights: normalization and expectation") {
  Rng rng(1);
  SUBCASE("single individual") {
    Eigen::VectorXd w = bootstrap_weights(1, rng);
    CHECK(w.size() == 1);
    CHECK(w(0) == 1.0);
  }
  SUBCASE("weights sum to one and are multiples of 1/I") {
    Eigen::VectorXd w = bootstrap_weights(40, rng);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 40; ++i) {
      CHECK(w(i) >= 0.0);
      double scaled = w(i) * 40.0;
      CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
    }
  }
  SUBCASE("mean weight 1/I and zero fraction near (1-1/I)^I") {
    const int n = 50;
    const int draws = 4000;
    double zero_count = 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (int d = 0; d < draws; ++d) {
      Eigen::VectorXd w = bootstrap_weights(n, rng);
      mean += w;
      for (int i = 0; i < n; ++i)
        if (w(i) == 0.0) zero_count += 1.0;
    }
    mean /= draws;
    for (int i = 0; i < n; ++i) CHECK(mean(i) == doctest::Approx(1.0 / n).epsilon(0.25));
    const double p_zero = std::pow(1.0 - 1.0 / n, n);
    const double observed = zero_count / (static_cast<double>(draws) * n);
    const double sigma = std::sqrt(p_zero * (1.0 - p_zero) / (static_cast<double>(draws) * n));
    CHECK(std::abs(observed - p_zero) < 3.0 * sigma);
  }
}

TEST_CASE("coin flip clamps, rescales, then draws") {
  Rng rng(2);
  SUBCASE("negative entries clamp to zero") {
    // [-0.1, 0.6, 0.5] -> probabilities [0, 6/11, 5/11]
    const std::vector<double> span = {-0.1, 0.6, 0.5};
    int counts[3] = {0, 0, 0};
    const int draws = 100000;
    for (int d = 0; d < draws; ++d) ++counts[coin_flip(span, rng)];
    CHECK(counts[0] == 0);
    const double expected[] = {0.0, 6.0 / 11.0, 5.0 / 11.0};
    for (int c = 1; c < 3; ++c) {
      double sigma = std::sqrt(expected[c] * (1 - expected[c]) * draws);
      CHECK(std::abs(counts[c] - expected[c] * draws) < 3.0 * sigma);
    }
  }
  SUBCASE("point mass") {
    const std::vector<double> span = {0.0, 0.0, 1.0};
    for (int d = 0; d < 100; ++d) CHECK(coin_flip(span, rng) == 2);
  }
  SUBCASE("empirical frequencies match within 3 sigma") {
    const std::vector<double> span = {0.2, 0.3, 0.5};
    int counts[3] = {0, 0, 0};
    const int draws = 100000;
    for (int d = 0; d < draws; ++d) ++counts[coin_flip(span, rng)];
    for (int c = 0; c < 3; ++c) {
      double sigma = std::sqrt(span[c] * (1 - span[c]) * draws);
      CHECK(std::abs(counts[c] - span[c] * draws) < 3.0 * sigma);
    }
  }
  SUBCASE("all-zero clamped span is degenerate") {
    const std::vector<double> span = {-0.5, -0.1};
    CHECK_THROWS_WITH_AS(coin_flip(span, rng), "degenerate probabilities",
                         std::invalid_argument);
  }
}

TEST_CASE("mimca preserves observed cells in every imputation") {
  CategoricalTable t = incomplete_table();
  MimcaConfig cfg;
  cfg.rank = 2;
  cfg.num_imputations = 5;
  ImputationSet set = mimca_impute(t, cfg, 99);
  REQUIRE(set.tables.size() == 5);
  for (const auto& imputed : set.tables) {
    CHECK(imputed.complete());
    for (int i = 0; i < t.rows(); ++i)
      for (int k = 0; k < t.num_variables(); ++k)
        if (!t.is_missing(i, k)) CHECK(imputed.cell(i, k) == t.cell(i, k));
  }
}

TEST_CASE("mimca is deterministic given the seed") {
  CategoricalTable t = incomplete_table();
  MimcaConfig cfg;
  cfg.rank = 2;
  ImputationSet a = mimca_impute(t, cfg, 1234);
  ImputationSet b = mimca_impute(t, cfg, 1234);
  for (int m = 0; m < cfg.num_imputations; ++m)
    CHECK(format_table(a.tables[m]) == format_table(b.tables[m]));
}

TEST_CASE("mimca is deterministic across thread counts") {
  CategoricalTable t = incomplete_table();
  MimcaConfig serial;
  serial.rank = 2;
  serial.threads = 1;
  MimcaConfig parallel = serial;
  parallel.threads = 4;
  ImputationSet a = mimca_impute(t, serial, 77);
  ImputationSet b = mimca_impute(t, parallel, 77);
  for (int m = 0; m < serial.num_imputations; ++m)
    CHECK(format_table(a.tables[m]) == format_table(b.tables[m]));
}

TEST_CASE("imputations differ across m for a genuinely incomplete table") {
  CategoricalTable t = incomplete_table();
  MimcaConfig cfg;
  cfg.rank = 2;
  ImputationSet set = mimca_impute(t, cfg, 5);
  bool any_differ = false;
  for (std::size_t m = 1; m < set.tables.size(); ++m)
    if (format_table(set.tables[m]) != format_table(set.tables[0])) any_differ = true;
  CHECK(any_differ);
}

TEST_CASE("complete input yields M copies and a warning") {
  CategoricalTable t({{"v1", {"A", "B"}}, {"v2", {"x", "y"}}},
                     {{0, 0}, {1, 1}, {0, 1}, {1, 0}});
  MimcaConfig cfg;
  cfg.rank = 1;
  ImputationSet set = mimca_impute(t, cfg, 3);
  for (const auto& imputed : set.tables) CHECK(format_table(imputed) == format_table(t));
  REQUIRE_FALSE(set.warnings.empty());
  CHECK(set.warnings[0].find("no missing values") != std::string::npos);
}

TEST_CASE("sample imputation draws from the observed marginals") {
  Rng rng(8);
  SUBCASE("complete input is the identity") {
    CategoricalTable t({{"v", {"A", "B"}}}, {{0}, {1}, {0}});
    CategoricalTable out = sample_impute(t, rng);
    CHECK(format_table(out) == format_table(t));
  }
  SUBCASE("draw frequencies match the marginals within 3 sigma") {
    // variable observed as [A, A, B] plus one missing: P(A) = 2/3
    CategoricalTable t({{"v", {"A", "B"}}}, {{0}, {0}, {1}, {kMissing}});
    const int draws = 100000;
    int count_a = 0;
    for (int d = 0; d < draws; ++d)
      if (sample_impute(t, rng).cell(3, 0) == 0) ++count_a;
    const double p = 2.0 / 3.0;
    double sigma = std::sqrt(p * (1 - p) * draws);
    CHECK(std::abs(count_a - p * draws) < 3.0 * sigma);
  }
  SUBCASE("observed cells preserved") {
    CategoricalTable t = incomplete_table();
    CategoricalTable out = sample_impute(t, rng);
    CHECK(out.complete());
    for (int i = 0; i < t.rows(); ++i)
      for (int k = 0; k < t.num_variables(); ++k)
        if (!t.is_missing(i, k)) CHECK(out.cell(i, k) == t.cell(i, k));
  }
}

TEST_CASE("listwise deletion keeps exactly the complete rows in order") {
  CategoricalTable t({{"v1", {"A", "B"}}, {"v2", {"x", "y"}}},
                     {{0, 0}, {kMissing, 1}, {1, 1}});
  CategoricalTable out = listwise_delete(t);
  REQUIRE(out.rows() == 2);
  CHECK(out.cell(0, 0) == 0);
  CHECK(out.cell(1, 0) == 1);

  CategoricalTable complete({{"v", {"A", "B"}}}, {{0}, {1}});
  CHECK(format_table(listwise_delete(complete)) == format_table(complete));

  CategoricalTable empty({{"v", {"A", "B"}}}, {{kMissing}, {kMissing}});
  CHECK_THROWS_AS(listwise_delete(empty), std::invalid_argument);
}
