#include "mimca/pooling.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>

namespace mimca {

PoolComponents pool(const Eigen::VectorXd& estimates, const Eigen::VectorXd& variances) {
  const int m = static_cast<int>(estimates.size());
  if (m < 2) throw std::invalid_argument("pool: need at least two imputations");
  if (variances.size() != m) throw std::invalid_argument("pool: length mismatch");
  if (variances.minCoeff() < 0.0) throw std::invalid_argument("pool: negative variance");

  PoolComponents out{};
  out.estimate = estimates.mean();
  out.within = variances.mean();
  out.between = (estimates.array() - out.estimate).square().sum() / (m - 1);
  out.total = out.within + (1.0 + 1.0 / m) * out.between;
  return out;
}

double barnard_rubin_df(double within, double between, int num_imputations,
                        double complete_df) {
  if (num_imputations < 2)
    throw std::invalid_argument("barnard_rubin_df: need at least two imputations");
  const double total = within + (1.0 + 1.0 / num_imputations) * between;
  if (!(total > 0.0))
    throw std::invalid_argument("degenerate pooled variance");
  const double nu_com = complete_df;
  const double nu_obs =
      (nu_com + 1.0) / (nu_com + 3.0) * nu_com * within / total;
  if (between <= 0.0) return nu_obs;

  const double r = (1.0 + 1.0 / num_imputations) * between / within;
  const double nu_old = (num_imputations - 1) * (1.0 + 1.0 / r) * (1.0 + 1.0 / r);
  return 1.0 / (1.0 / nu_old + 1.0 / nu_obs);
}

double student_t_quantile(double df, double prob) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_quantile: df must be > 0");
  boost::math::students_t dist(df);
  return boost::math::quantile(dist, prob);
}

std::pair<double, double> confidence_interval(double estimate, double total_variance,
                                              double df, double level) {
  if (total_variance < 0.0)
    throw std::invalid_argument("confidence_interval: negative variance");
  if (total_variance == 0.0) return {estimate, estimate};
  const double t = student_t_quantile(df, 1.0 - (1.0 - level) / 2.0);
  const double half = t * std::sqrt(total_variance);
  return {estimate - half, estimate + half};
}

PooledEstimate pool_coefficient(const Eigen::VectorXd& estimates,
                                const Eigen::VectorXd& variances, double complete_df,
                                double level) {
  PoolComponents c = pool(estimates, variances);
  PooledEstimate out;
  out.estimate = c.estimate;
  out.within_variance = c.within;
  out.between_variance = c.between;
  out.total_variance = c.total;
  out.num_imputations = static_cast<int>(estimates.size());
  out.df = barnard_rubin_df(c.within, c.between, out.num_imputations, complete_df);
  auto [lo, hi] = confidence_interval(c.estimate, c.total, out.df, level);
  out.ci_low = lo;
  out.ci_high = hi;
  return out;
}

}  // namespace mimca
