#pragma once

#include <Eigen/Dense>

#include "mimca/mca.hpp"
#include "mimca/table.hpp"

namespace mimca {

struct IterativeConfig {
  int rank = 1;                 // S
  double epsilon = 1e-6;        // convergence threshold on sum of squared changes
  int max_iterations = 1000;
  bool regularized = true;      // shrink singular values in the reconstruction
  Eigen::VectorXd row_weights;  // empty means uniform
};

struct IterativeResult {
  IndicatorMatrix completed;  // observed cells exact, missing cells fuzzy fits
  McaModel model;
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = true;
  bool floored_metric = false;  // an empty category was floored at some iteration
};

// Replace masked cells by the weighted observed column proportions of
// their variable; observed cells untouched.
IndicatorMatrix initialize_missing(const IndicatorMatrix& z,
                                   const Eigen::VectorXd& row_weights);

// (Regularized) iterative MCA: alternate weighted MCA fit and missing-cell
// refit until the change in the fitted matrix falls below epsilon.
IterativeResult iterative_mca(const IndicatorMatrix& z, const IterativeConfig& cfg);

}  // namespace mimca
