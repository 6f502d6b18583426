#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mimca/table.hpp"

namespace mimca {

// Fitted MCA model: the SVD of (Z - M) under the row-weight metric
// diag(r) and the column metric (1/K) diag(p)^{-1}.
struct McaModel {
  Eigen::VectorXd centering;    // M, column means of the completed table
  Eigen::VectorXd proportions;  // diag of D_Sigma (possibly floored, see below)
  Eigen::VectorXd row_weights;  // r, normalized to sum 1
  Eigen::MatrixXd left;         // I x S, U^T diag(r) U = I
  Eigen::MatrixXd right;        // J x S, V^T (1/K) diag(p)^{-1} V = I
  Eigen::VectorXd singular;     // S, nonincreasing, >= 0
  int rank = 0;                 // S
  double tail_mean = 0.0;       // mean of discarded eigenvalues lambda_{S+1..J-K}
  bool floored_metric = false;  // an empty category's proportion was floored

  int num_variables = 0;  // K
};

struct TripletSpec {
  Eigen::MatrixXd data;           // I x J, already centered (Z - M)
  Eigen::VectorXd column_metric;  // J, (1/K) / p_j, entries > 0
  Eigen::VectorXd row_weights;    // I, >= 0, positive sum
};

// SVD of the triplet (data, diag(column_metric), diag(row_weights)).
// Zero-weight rows get left coordinates by supplementary projection.
// `centering`/`proportions`/`num_variables` of the result must be filled by
// the caller (they are not derivable from an already-centered triplet);
// fit_mca below does the full job from an indicator matrix.
McaModel weighted_svd_triplet(const TripletSpec& spec, int rank, int tail_dims);

// Full MCA fit from a completed (possibly fuzzy) indicator matrix:
// computes weighted centering and proportions, floors empty-category
// proportions for the metric, runs the triplet SVD.
McaModel fit_mca(const IndicatorMatrix& z, const Eigen::VectorXd& row_weights, int rank);

// Z_hat = U diag(sigma) V^T + M, with raw or shrunk singular values.
Eigen::MatrixXd reconstruct(const McaModel& model, bool shrunk);

// Regularization: sigma_s -> (lambda_s - tail_mean) / sqrt(lambda_s),
// lambda_s = sigma_s^2. Nonnegative, bounded by the input, order-preserving.
Eigen::VectorXd shrink_singular_values(const Eigen::VectorXd& singular, double tail_mean);

// Parameter-count accounting for the three imputation models.
std::int64_t mca_param_count(std::int64_t I, std::int64_t J, std::int64_t K, std::int64_t S);
std::int64_t normal_param_count(std::int64_t J, std::int64_t K);
std::int64_t loglinear_twoway_param_count(const std::vector<int>& categories);

}  // namespace mimca
