#pragma once

#include <Eigen/Dense>
#include <utility>

namespace mimca {

struct PooledEstimate {
  double estimate = 0.0;          // psi_hat
  double within_variance = 0.0;   // W_bar
  double between_variance = 0.0;  // B
  double total_variance = 0.0;    // T = W_bar + (1 + 1/M) B
  double df = 0.0;                // nu (Barnard-Rubin)
  double ci_low = 0.0;
  double ci_high = 0.0;
  int num_imputations = 0;
};

struct PoolComponents {
  double estimate;
  double within;
  double between;
  double total;
};

PoolComponents pool(const Eigen::VectorXd& estimates, const Eigen::VectorXd& variances);

// Small-sample adjusted degrees of freedom (Barnard & Rubin 1999).
// complete_df is nu_com, the complete-data degrees of freedom (N - P).
double barnard_rubin_df(double within, double between, int num_imputations,
                        double complete_df);

double student_t_quantile(double df, double prob);

std::pair<double, double> confidence_interval(double estimate, double total_variance,
                                              double df, double level = 0.95);

// Full pipeline for one coefficient.
PooledEstimate pool_coefficient(const Eigen::VectorXd& estimates,
                                const Eigen::VectorXd& variances, double complete_df,
                                double level = 0.95);

}  // namespace mimca
