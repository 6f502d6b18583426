#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "mimca/mca.hpp"
#include "mimca/rng.hpp"
#include "mimca/table.hpp"

using namespace mimca;

namespace {

CategoricalTable random_complete_table(Rng& rng, int rows, const std::vector<int>& categories) {
  std::vector<VariableMeta> vars;
  for (std::size_t k = 0; k < categories.size(); ++k) {
    VariableMeta v;
    v.name = "v" + std::to_string(k);
    for (int c = 0; c < categories[k]; ++c) v.labels.push_back(std::string(1, 'a' + c));
    vars.push_back(v);
  }
  std::vector<std::vector<int>> cells(rows, std::vector<int>(categories.size()));
  for (int i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < categories.size(); ++k)
      cells[i][k] = static_cast<int>(rng.uniform_index(categories[k]));
  for (std::size_t k = 0; k < categories.size(); ++k)
    for (int c = 0; c < categories[k] && c < rows; ++c) cells[c][k] = c;
  return CategoricalTable(vars, cells);
}

// Independent oracle: eigendecomposition of the metric-weighted
// cross-product C = diag(sqrt(m)) A^T diag(w) A diag(sqrt(m)).
struct EigenOracle {
  Eigen::VectorXd singular;      // descending
  Eigen::MatrixXd right;         // metric-orthonormal right vectors
};

EigenOracle eigen_oracle(const Eigen::MatrixXd& centered, const Eigen::VectorXd& metric,
                         const Eigen::VectorXd& weights) {
  Eigen::VectorXd sqrt_metric = metric.cwiseSqrt();
  Eigen::MatrixXd cross = sqrt_metric.asDiagonal() * centered.transpose() *
                          weights.asDiagonal() * centered * sqrt_metric.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cross);
  const int j = static_cast<int>(cross.rows());
  EigenOracle oracle;
  oracle.singular.resize(j);
  oracle.right.resize(j, j);
  for (int s = 0; s < j; ++s) {
    const double lambda = std::max(0.0, eig.eigenvalues()(j - 1 - s));
    oracle.singular(s) = std::sqrt(lambda);
    oracle.right.col(s) = eig.eigenvectors().col(j - 1 - s).cwiseQuotient(sqrt_metric);
  }
  return oracle;
}

}  // namespace

TEST_CASE("triplet SVD matches the eigendecomposition oracle on random tables") {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int rows = 10 + static_cast<int>(rng.uniform_index(41));
    std::vector<int> categories;
    const int k = 2 + static_cast<int>(rng.uniform_index(5));
    for (int v = 0; v < k; ++v) categories.push_back(2 + static_cast<int>(rng.uniform_index(3)));
    CategoricalTable table = random_complete_table(rng, rows, categories);
    IndicatorMatrix z = encode_disjunctive(table);

    const int J = z.cols();
    const int K = z.num_variables();
    const int rank = std::min(3, J - K);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(rows, 1.0 / rows);
    McaModel model = fit_mca(z, w, rank);

    Eigen::MatrixXd centered = z.values().rowwise() - model.centering.transpose();
    Eigen::VectorXd metric = (1.0 / K) * model.proportions.cwiseInverse();
    EigenOracle oracle = eigen_oracle(centered, metric, w);

    for (int s = 0; s < rank; ++s)
      CHECK(model.singular(s) == doctest::Approx(oracle.singular(s)).epsilon(1e-8));

    // rank-S reconstruction through the oracle: A diag(m) V_S V_S^T + M
    Eigen::MatrixXd vs = oracle.right.leftCols(rank);
    Eigen::MatrixXd oracle_hat = centered * metric.asDiagonal() * vs * vs.transpose();
    oracle_hat.rowwise() += model.centering.transpose();
    Eigen::MatrixXd model_hat = reconstruct(model, false);
    CHECK((oracle_hat - model_hat).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("full-rank reconstruction reproduces a crisp table exactly") {
  Rng rng(5);
  CategoricalTable table = random_complete_table(rng, 20, {2, 3, 3});
  IndicatorMatrix z = encode_disjunctive(table);
  const int full = z.cols() - z.num_variables();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(20, 1.0 / 20);
  McaModel model = fit_mca(z, w, full);
  Eigen::MatrixXd z_hat = reconstruct(model, false);
  CHECK((z_hat - z.values()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("variable spans of any reconstruction sum to one") {
  Rng rng(9);
  CategoricalTable table = random_complete_table(rng, 40, {2, 4, 3, 2});
  IndicatorMatrix z = encode_disjunctive(table);
  Eigen::VectorXd w(40);
  for (int i = 0; i < 40; ++i) w(i) = rng.next_double();
  for (int rank = 1; rank <= 3; ++rank) {
    McaModel model = fit_mca(z, w, rank);
    for (bool shrunk : {false, true}) {
      Eigen::MatrixXd z_hat = reconstruct(model, shrunk);
      for (const auto& s : z.spans())
        for (int i = 0; i < 40; ++i)
          CHECK(z_hat.row(i).segment(s.begin, s.size).sum() ==
                doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("rank of the centered reconstruction equals S") {
  Rng rng(13);
  CategoricalTable table = random_complete_table(rng, 30, {3, 3, 2});
  IndicatorMatrix z = encode_disjunctive(table);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(30, 1.0 / 30);
  const int rank = 2;
  McaModel model = fit_mca(z, w, rank);
  Eigen::MatrixXd centered = reconstruct(model, false).rowwise() - model.centering.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  int numerical_rank = 0;
  for (int s = 0; s < svd.singularValues().size(); ++s)
    if (svd.singularValues()(s) > 1e-10 * svd.singularValues()(0)) ++numerical_rank;
  CHECK(numerical_rank == rank);
}

TEST_CASE("singular value shrinkage") {
  SUBCASE("eigenvalues [4,1] with tail mean 1") {
    Eigen::VectorXd singular(2);
    singular << 2.0, 1.0;  // lambda = [4, 1]
    Eigen::VectorXd shrunk = shrink_singular_values(singular, 1.0);
    CHECK(shrunk(0) == doctest::Approx(1.5));
    CHECK(shrunk(1) == doctest::Approx(0.0));
  }
  SUBCASE("zero tail mean is the identity") {
    Eigen::VectorXd singular(3);
    singular << 3.0, 2.0, 0.5;
    Eigen::VectorXd shrunk = shrink_singular_values(singular, 0.0);
    CHECK((shrunk - singular).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("outputs are nonnegative, bounded by inputs, order-preserving") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd singular(4);
      for (int s = 0; s < 4; ++s) singular(s) = rng.next_double() * 3.0;
      std::sort(singular.data(), singular.data() + 4, std::greater<double>());
      const double tail = rng.next_double() * singular(3) * singular(3);
      Eigen::VectorXd shrunk = shrink_singular_values(singular, tail);
      for (int s = 0; s < 4; ++s) {
        CHECK(shrunk(s) >= 0.0);
        CHECK(shrunk(s) <= singular(s) + 1e-15);
        if (s > 0) CHECK(shrunk(s - 1) >= shrunk(s) - 1e-15);
      }
    }
  }
}

TEST_CASE("parameter counts reproduce the reference values") {
  CHECK(normal_param_count(50, 10) == 860);
  CHECK(loglinear_twoway_param_count(std::vector<int>(10, 5)) == 760);
  CHECK(mca_param_count(100, 50, 10, 2) == 314);
}

TEST_CASE("orthonormality under the stated metrics") {
  Rng rng(21);
  CategoricalTable table = random_complete_table(rng, 25, {2, 3, 4});
  IndicatorMatrix z = encode_disjunctive(table);
  Eigen::VectorXd w(25);
  for (int i = 0; i < 25; ++i) w(i) = 0.5 + rng.next_double();
  McaModel model = fit_mca(z, w, 3);

  Eigen::MatrixXd left_gram =
      model.left.transpose() * model.row_weights.asDiagonal() * model.left;
  CHECK((left_gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);

  Eigen::VectorXd metric =
      (1.0 / z.num_variables()) * model.proportions.cwiseInverse();
  Eigen::MatrixXd right_gram = model.right.transpose() * metric.asDiagonal() * model.right;
  CHECK((right_gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);

  for (int s = 1; s < 3; ++s) CHECK(model.singular(s - 1) >= model.singular(s));
}

TEST_CASE("truncation error grows as the rank shrinks (Eckart-Young)") {
  Rng rng(31);
  CategoricalTable table = random_complete_table(rng, 35, {3, 3, 2, 4});
  IndicatorMatrix z = encode_disjunctive(table);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(35, 1.0 / 35);
  Eigen::VectorXd metric;
  double previous = -1.0;
  for (int rank = 4; rank >= 1; --rank) {
    McaModel model = fit_mca(z, w, rank);
    metric = (1.0 / z.num_variables()) * model.proportions.cwiseInverse();
    Eigen::MatrixXd residual = z.values() - reconstruct(model, false);
    double error = 0.0;
    for (int i = 0; i < 35; ++i)
      error += w(i) * residual.row(i).cwiseAbs2().dot(metric);
    CHECK(error >= previous - 1e-12);
    previous = error;
  }
}

TEST_CASE("row weights are scale-invariant") {
  Rng rng(17);
  CategoricalTable table = random_complete_table(rng, 20, {2, 3, 3});
  IndicatorMatrix z = encode_disjunctive(table);
  Eigen::VectorXd w(20);
  for (int i = 0; i < 20; ++i) w(i) = 0.2 + rng.next_double();
  McaModel a = fit_mca(z, w, 2);
  McaModel b = fit_mca(z, (42.0 * w).eval(), 2);
  CHECK((a.singular - b.singular).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.left - b.left).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a.right - b.right).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("duplicating a row equals doubling its weight") {
  Rng rng(23);
  CategoricalTable table = random_complete_table(rng, 12, {2, 3});
  IndicatorMatrix z = encode_disjunctive(table);

  // duplicated-row form
  std::vector<std::vector<int>> cells;
  for (int i = 0; i < 12; ++i) {
    std::vector<int> row = {table.cell(i, 0), table.cell(i, 1)};
    cells.push_back(row);
  }
  cells.push_back(cells[3]);
  CategoricalTable dup(table.variables(), cells);
  IndicatorMatrix z_dup = encode_disjunctive(dup);

  Eigen::VectorXd w_dup = Eigen::VectorXd::Constant(13, 1.0 / 13);
  Eigen::VectorXd w_weighted = Eigen::VectorXd::Constant(12, 1.0 / 13);
  w_weighted(3) = 2.0 / 13;

  McaModel a = fit_mca(z_dup, w_dup, 2);
  McaModel b = fit_mca(z, w_weighted, 2);

  CHECK((a.singular - b.singular).cwiseAbs().maxCoeff() < 1e-8);
  for (int s = 0; s < 2; ++s) {
    // align the sign on the largest element before comparing
    Eigen::VectorXd va = a.right.col(s), vb = b.right.col(s);
    int idx = 0;
    va.cwiseAbs().maxCoeff(&idx);
    if (va(idx) * vb(idx) < 0.0) vb = -vb;
    CHECK((va - vb).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("supplementary rows do not influence each other") {
  Rng rng(29);
  CategoricalTable table = random_complete_table(rng, 14, {2, 3, 2});
  IndicatorMatrix z = encode_disjunctive(table);

  Eigen::VectorXd w = Eigen::VectorXd::Constant(14, 1.0);
  w(12) = 0.0;
  w(13) = 0.0;
  McaModel with_both = fit_mca(z, w, 2);

  // drop the last zero-weight row entirely
  std::vector<std::vector<int>> cells;
  for (int i = 0; i < 13; ++i) {
    std::vector<int> row(3);
    for (int k = 0; k < 3; ++k) row[k] = table.cell(i, k);
    cells.push_back(row);
  }
  CategoricalTable smaller(table.variables(), cells);
  McaModel without = fit_mca(encode_disjunctive(smaller), w.head(13).eval(), 2);

  Eigen::MatrixXd recon_both = reconstruct(with_both, false);
  Eigen::MatrixXd recon_without = reconstruct(without, false);
  CHECK((recon_both.row(12) - recon_without.row(12)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rank beyond J-K is rejected") {
  Rng rng(2);
  CategoricalTable table = random_complete_table(rng, 10, {2, 2});
  IndicatorMatrix z = encode_disjunctive(table);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(10, 0.1);
  CHECK_THROWS_AS(fit_mca(z, w, 3), std::invalid_argument);
}
