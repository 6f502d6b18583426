#include "mimca/mca.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace mimca {

namespace {
constexpr double kRankCutoff = 1e-12;  // relative to the largest singular value
}

McaModel weighted_svd_triplet(const TripletSpec& spec, int rank, int tail_dims) {
  const int I = static_cast<int>(spec.data.rows());
  const int J = static_cast<int>(spec.data.cols());
  if (spec.column_metric.size() != J || spec.row_weights.size() != I)
    throw std::invalid_argument("weighted_svd_triplet: dimension mismatch");
  if (spec.column_metric.minCoeff() <= 0.0)
    throw std::invalid_argument("weighted_svd_triplet: nonpositive column metric "
                                "(empty category)");
  if (rank < 1 || rank > tail_dims)
    throw std::invalid_argument("weighted_svd_triplet: rank must be in [1, J-K]");
  const double wsum = spec.row_weights.sum();
  if (!(wsum > 0.0) || spec.row_weights.minCoeff() < 0.0)
    throw std::invalid_argument("weighted_svd_triplet: invalid row weights");

  Eigen::VectorXd w = spec.row_weights / wsum;
  Eigen::VectorXd sqrt_metric = spec.column_metric.cwiseSqrt();

  std::vector<int> positive;
  positive.reserve(I);
  for (int i = 0; i < I; ++i)
    if (w(i) > 0.0) positive.push_back(i);
  const int n_pos = static_cast<int>(positive.size());

  // B = diag(sqrt(w)) (Z - M) diag(sqrt(metric)) over positive-weight rows
  Eigen::MatrixXd b(n_pos, J);
  for (int r = 0; r < n_pos; ++r)
    b.row(r) = std::sqrt(w(positive[r])) *
               spec.data.row(positive[r]).cwiseProduct(sqrt_metric.transpose());

  Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sigma = svd.singularValues();
  const double cutoff = sigma.size() ? kRankCutoff * sigma(0) : 0.0;
  for (int s = 0; s < sigma.size(); ++s)
    if (sigma(s) < cutoff) sigma(s) = 0.0;

  const int s_keep = std::min<int>(rank, static_cast<int>(sigma.size()));

  // mean of the discarded eigenvalues lambda_{S+1 .. J-K}; singular values
  // beyond the computed spectrum are exact zeros
  double tail_mean = 0.0;
  if (tail_dims > s_keep) {
    double tail_sum = 0.0;
    for (int s = s_keep; s < std::min<int>(tail_dims, static_cast<int>(sigma.size())); ++s)
      tail_sum += sigma(s) * sigma(s);
    tail_mean = tail_sum / static_cast<double>(tail_dims - s_keep);
  }

  McaModel model;
  model.rank = s_keep;
  model.singular = sigma.head(s_keep);
  model.row_weights = w;
  model.tail_mean = tail_mean;

  model.right = svd.matrixV().leftCols(s_keep);
  for (int j = 0; j < J; ++j) model.right.row(j) /= sqrt_metric(j);

  model.left = Eigen::MatrixXd::Zero(I, s_keep);
  for (int r = 0; r < n_pos; ++r)
    model.left.row(positive[r]) =
        svd.matrixU().row(r).head(s_keep) / std::sqrt(w(positive[r]));

  // supplementary projection for zero-weight rows,
  // u_i = (z_i - m) diag(metric) V Lambda^{-1/2}, pseudo-inverse on zeros
  Eigen::VectorXd inv_sigma(s_keep);
  for (int s = 0; s < s_keep; ++s)
    inv_sigma(s) = model.singular(s) > 0.0 ? 1.0 / model.singular(s) : 0.0;
  for (int i = 0; i < I; ++i) {
    if (w(i) > 0.0) continue;
    Eigen::RowVectorXd proj = spec.data.row(i).cwiseProduct(spec.column_metric.transpose()) *
                              model.right;
    model.left.row(i) = proj.cwiseProduct(inv_sigma.transpose());
  }
  return model;
}

McaModel fit_mca(const IndicatorMatrix& z, const Eigen::VectorXd& row_weights, int rank) {
  const int I = z.rows();
  const int J = z.cols();
  const int K = z.num_variables();
  const double wsum = row_weights.sum();
  if (!(wsum > 0.0)) throw std::invalid_argument("fit_mca: all-zero row weights");
  Eigen::VectorXd w = row_weights / wsum;

  Eigen::VectorXd centering = z.values().transpose() * w;
  Eigen::VectorXd p = column_proportions(z, w);

  int effective = 0;
  for (int i = 0; i < I; ++i)
    if (w(i) > 0.0) ++effective;
  const double floor = 1.0 / (2.0 * static_cast<double>(effective));
  bool floored = false;
  Eigen::VectorXd p_metric = p;
  for (int j = 0; j < J; ++j) {
    if (p_metric(j) < floor) {
      p_metric(j) = floor;
      floored = true;
    }
  }

  TripletSpec spec;
  spec.data = z.values().rowwise() - centering.transpose();
  spec.column_metric = (1.0 / static_cast<double>(K)) * p_metric.cwiseInverse();
  spec.row_weights = w;

  McaModel model = weighted_svd_triplet(spec, rank, J - K);
  model.centering = std::move(centering);
  model.proportions = std::move(p_metric);
  model.floored_metric = floored;
  model.num_variables = K;
  return model;
}

Eigen::MatrixXd reconstruct(const McaModel& model, bool shrunk) {
  Eigen::VectorXd sigma =
      shrunk ? shrink_singular_values(model.singular, model.tail_mean) : model.singular;
  Eigen::MatrixXd z_hat = model.left * sigma.asDiagonal() * model.right.transpose();
  z_hat.rowwise() += model.centering.transpose();
  return z_hat;
}

Eigen::VectorXd shrink_singular_values(const Eigen::VectorXd& singular, double tail_mean) {
  if (tail_mean < 0.0)
    throw std::invalid_argument("shrink_singular_values: negative tail mean");
  Eigen::VectorXd out(singular.size());
  for (int s = 0; s < singular.size(); ++s) {
    const double lambda = singular(s) * singular(s);
    out(s) = singular(s) > 0.0 ? std::max(0.0, (lambda - tail_mean) / singular(s)) : 0.0;
  }
  return out;
}

std::int64_t mca_param_count(std::int64_t I, std::int64_t J, std::int64_t K, std::int64_t S) {
  return J - K + S * (I - 1 + (J - K) - S);
}

std::int64_t normal_param_count(std::int64_t J, std::int64_t K) {
  const std::int64_t d = J - K;
  return d * (d + 1) / 2 + d;
}

std::int64_t loglinear_twoway_param_count(const std::vector<int>& categories) {
  std::int64_t main_effects = 0;
  for (int q : categories) main_effects += q - 1;
  std::int64_t pairwise = 0;
  for (std::size_t a = 0; a < categories.size(); ++a)
    for (std::size_t b = a + 1; b < categories.size(); ++b)
      pairwise += static_cast<std::int64_t>(categories[a] - 1) * (categories[b] - 1);
  return main_effects + pairwise;
}

}  // namespace mimca
