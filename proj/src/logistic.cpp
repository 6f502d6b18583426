#include "mimca/logistic.hpp"

#include <Eigen/QR>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mimca {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

ModelFormula ModelFormula::parse(const std::string& text) {
  std::size_t tilde = text.find('~');
  if (tilde == std::string::npos)
    throw std::invalid_argument("formula must look like 'response=success ~ v1 + v2'");
  std::string lhs = trim(text.substr(0, tilde));
  std::string rhs = trim(text.substr(tilde + 1));

  ModelFormula f;
  std::size_t eq = lhs.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("formula response must specify a success category "
                                "('response=success')");
  f.response = trim(lhs.substr(0, eq));
  f.success_category = trim(lhs.substr(eq + 1));
  if (f.response.empty() || f.success_category.empty())
    throw std::invalid_argument("empty response or success category in formula");

  std::istringstream stream(rhs);
  std::string term;
  while (std::getline(stream, term, '+')) {
    term = trim(term);
    if (term.empty()) throw std::invalid_argument("empty predictor term in formula");
    if (term == f.response)
      throw std::invalid_argument("response cannot appear among the predictors");
    f.predictors.push_back(term);
  }
  if (f.predictors.empty()) throw std::invalid_argument("formula has no predictors");
  return f;
}

std::string ModelFormula::to_string() const {
  std::string s = response + "=" + success_category + " ~ ";
  for (std::size_t i = 0; i < predictors.size(); ++i) {
    if (i) s += " + ";
    s += predictors[i];
  }
  return s;
}

DesignMatrix build_design(const CategoricalTable& table, const ModelFormula& formula) {
  const int response_var = table.variable_index(formula.response);
  if (response_var < 0)
    throw std::invalid_argument("response variable '" + formula.response + "' not found");
  const int success = table.variable(response_var).label_index(formula.success_category);
  if (success < 0)
    throw std::invalid_argument("success category '" + formula.success_category +
                                "' not found in '" + formula.response + "'");

  std::vector<int> pred_vars;
  int p = 1;
  for (const auto& name : formula.predictors) {
    int k = table.variable_index(name);
    if (k < 0) throw std::invalid_argument("predictor variable '" + name + "' not found");
    pred_vars.push_back(k);
    p += table.variable(k).num_categories() - 1;
  }

  const int n = table.rows();
  for (int i = 0; i < n; ++i) {
    if (table.is_missing(i, response_var))
      throw std::invalid_argument("incomplete rows: imputation must precede analysis");
    for (int k : pred_vars)
      if (table.is_missing(i, k))
        throw std::invalid_argument("incomplete rows: imputation must precede analysis");
  }

  DesignMatrix d;
  d.x = Eigen::MatrixXd::Zero(n, p);
  d.x.col(0).setOnes();
  d.y = Eigen::VectorXd::Zero(n);
  d.term_names.push_back("(intercept)");
  int col = 1;
  for (int k : pred_vars) {
    const auto& meta = table.variable(k);
    for (int c = 1; c < meta.num_categories(); ++c)
      d.term_names.push_back(meta.name + "=" + meta.labels[c]);
    for (int i = 0; i < n; ++i) {
      int cat = table.cell(i, k);
      if (cat > 0) d.x(i, col + cat - 1) = 1.0;
    }
    col += meta.num_categories() - 1;
  }
  for (int i = 0; i < n; ++i)
    d.y(i) = table.cell(i, response_var) == success ? 1.0 : 0.0;
  return d;
}

double logistic_log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                               const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = design * beta;
  double ll = 0.0;
  for (int i = 0; i < eta.size(); ++i) {
    // y*eta - log(1 + exp(eta)), stable for large |eta|
    double log1pexp = eta(i) > 30.0 ? eta(i) : std::log1p(std::exp(eta(i)));
    ll += response(i) * eta(i) - log1pexp;
  }
  return ll;
}

Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                  const Eigen::VectorXd& beta) {
  Eigen::VectorXd mu = (design * beta).unaryExpr(
      [](double e) { return 1.0 / (1.0 + std::exp(-e)); });
  return design.transpose() * (response - mu);
}

LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                         int max_iter, double tol) {
  const int n = static_cast<int>(design.rows());
  const int p = static_cast<int>(design.cols());
  if (n <= p) throw std::invalid_argument("fit_logistic: need more rows than parameters");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) throw std::invalid_argument("fit_logistic: rank-deficient design");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double ll = logistic_log_likelihood(design, response, beta);

  LogisticFit fit;
  for (int iter = 1; iter <= max_iter; ++iter) {
    Eigen::VectorXd mu = (design * beta).unaryExpr(
        [](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
    Eigen::VectorXd grad = design.transpose() * (response - mu);
    if (grad.norm() <= tol) {
      fit.converged = true;
      break;
    }

    Eigen::MatrixXd hessian = design.transpose() * w.asDiagonal() * design;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("fit_logistic: singular information matrix");
    Eigen::VectorXd step = ldlt.solve(grad);

    // step-halving keeps the log-likelihood nondecreasing; the slack keeps
    // rounding noise near the optimum from collapsing the step to nothing
    const double slack = 1e-10 * (1.0 + std::abs(ll));
    double step_scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double candidate_ll = logistic_log_likelihood(design, response, candidate);
    int halvings = 0;
    while (candidate_ll < ll - slack && halvings < 30) {
      step_scale *= 0.5;
      candidate = beta + step_scale * step;
      candidate_ll = logistic_log_likelihood(design, response, candidate);
      ++halvings;
    }
    beta = candidate;
    ll = candidate_ll;
    fit.iterations = iter;

    if (beta.cwiseAbs().maxCoeff() > 30.0)
      throw std::runtime_error("separation: diverging coefficients");

    if (logistic_gradient(design, response, beta).norm() <= tol) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) throw std::runtime_error("separation: IRLS did not converge");

  Eigen::VectorXd mu = (design * beta).unaryExpr(
      [](double e) { return 1.0 / (1.0 + std::exp(-e)); });
  Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
  Eigen::MatrixXd hessian = design.transpose() * w.asDiagonal() * design;
  fit.covariance = hessian.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose().eval());
  fit.coefficients = beta;
  fit.log_likelihood = ll;
  return fit;
}

}  // namespace mimca
