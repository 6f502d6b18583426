#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mimca/table.hpp"

namespace mimca {

// `response=successCategory ~ v1 + v2`, main effects only
struct ModelFormula {
  std::string response;
  std::string success_category;
  std::vector<std::string> predictors;

  static ModelFormula parse(const std::string& text);
  std::string to_string() const;
};

struct LogisticFit {
  Eigen::VectorXd coefficients;  // intercept + dummy contrasts
  Eigen::MatrixXd covariance;    // inverse observed Fisher information
  bool converged = false;
  double log_likelihood = 0.0;
  int iterations = 0;
  std::vector<std::string> term_names;
};

struct DesignMatrix {
  Eigen::MatrixXd x;           // N x P, intercept first, reference coding
  Eigen::VectorXd y;           // 0/1 response
  std::vector<std::string> term_names;
};

// Dummy-coded design: intercept plus q_k - 1 indicators per predictor,
// dropping the first (reference) category.
DesignMatrix build_design(const CategoricalTable& table, const ModelFormula& formula);

LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                         int max_iter = 100, double tol = 1e-8);

double logistic_log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                               const Eigen::VectorXd& beta);
Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                  const Eigen::VectorXd& beta);

}  // namespace mimca
