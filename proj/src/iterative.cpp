#include "mimca/iterative.hpp"

#include <stdexcept>

namespace mimca {

IndicatorMatrix initialize_missing(const IndicatorMatrix& z,
                                   const Eigen::VectorXd& row_weights) {
  const int I = z.rows();
  if (row_weights.size() != I)
    throw std::invalid_argument("initialize_missing: weight length mismatch");
  if (row_weights.minCoeff() < 0.0 || !(row_weights.sum() > 0.0))
    throw std::invalid_argument("initialize_missing: invalid row weights");

  Eigen::MatrixXd values = z.values();
  for (int k = 0; k < z.num_variables(); ++k) {
    const auto& s = z.span(k);
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(s.size);
    Eigen::VectorXd unweighted = Eigen::VectorXd::Zero(s.size);
    double observed_mass = 0.0;
    int observed_count = 0;
    for (int i = 0; i < I; ++i) {
      if (!z.cell_observed(i, k)) continue;
      weighted += row_weights(i) * z.values().row(i).segment(s.begin, s.size);
      unweighted += z.values().row(i).segment(s.begin, s.size);
      observed_mass += row_weights(i);
      ++observed_count;
    }
    if (observed_count == 0)
      throw std::invalid_argument("fully missing variable at index " + std::to_string(k));
    // if every observer carries zero bootstrap weight, fall back to counts
    Eigen::VectorXd proportions = observed_mass > 0.0
                                      ? (weighted / observed_mass).eval()
                                      : (unweighted / observed_count).eval();
    for (int i = 0; i < I; ++i)
      if (!z.cell_observed(i, k))
        values.row(i).segment(s.begin, s.size) = proportions.transpose();
  }
  return IndicatorMatrix(std::move(values), z.mask(), z.spans());
}

IterativeResult iterative_mca(const IndicatorMatrix& z, const IterativeConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("iterative_mca: epsilon must be > 0");
  if (cfg.rank < 1) throw std::invalid_argument("iterative_mca: rank must be >= 1");

  Eigen::VectorXd w = cfg.row_weights.size()
                          ? cfg.row_weights
                          : Eigen::VectorXd::Constant(z.rows(), 1.0 / z.rows());

  IterativeResult result;
  if (z.all_observed()) {
    result.completed = z;
    result.model = fit_mca(z, w, cfg.rank);
    result.floored_metric = result.model.floored_metric;
    return result;
  }

  IndicatorMatrix current = initialize_missing(z, w);
  Eigen::MatrixXd previous_fit = current.values();

  const Eigen::MatrixXd& mask = z.mask();
  Eigen::MatrixXd hole = Eigen::MatrixXd::Ones(z.rows(), z.cols()) - mask;

  result.converged = false;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    result.model = fit_mca(current, w, cfg.rank);
    result.floored_metric = result.floored_metric || result.model.floored_metric;
    Eigen::MatrixXd fitted = reconstruct(result.model, cfg.regularized);

    result.final_delta = (fitted - previous_fit).squaredNorm();
    result.iterations = iter;

    current.values() = mask.cwiseProduct(z.values()) + hole.cwiseProduct(fitted);
    previous_fit = std::move(fitted);

    if (result.final_delta <= cfg.epsilon) {
      result.converged = true;
      break;
    }
  }
  result.completed = std::move(current);
  return result;
}

}  // namespace mimca
