#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mimca/rng.hpp"
#include "mimca/table.hpp"

namespace mimca {

struct ImputationDiagnostics {
  int iterations = 0;
  bool converged = true;
  bool floored_metric = false;
  bool degenerate_span = false;  // a coin-flip span clamped to all zeros
  Eigen::VectorXd bootstrap_weights;
};

struct ImputationSet {
  std::vector<CategoricalTable> tables;  // M completed tables
  std::string method;
  std::uint64_t seed = 0;
  std::vector<ImputationDiagnostics> diagnostics;
  std::vector<std::string> warnings;
};

struct MimcaConfig {
  int rank = 2;           // S
  int num_imputations = 5;  // M
  double epsilon = 1e-6;
  int max_iterations = 1000;
  int threads = 1;
};

// Multiplicities of a size-I with-replacement draw, normalized to sum 1.
// Zero entries mark supplementary individuals.
Eigen::VectorXd bootstrap_weights(int count, Rng& rng);

// Clamp a fuzzy span to [0,1], rescale to sum 1, draw one category.
// Throws on an all-zero clamped span.
int coin_flip(std::span<const double> fuzzy_span, Rng& rng);

// MIMCA: for each of M imputations draw bootstrap weights, run weighted
// regularized iterative MCA, coin-flip the missing spans.
ImputationSet mimca_impute(const CategoricalTable& table, const MimcaConfig& cfg,
                           std::uint64_t seed);

// Baselines from the evaluation design.
CategoricalTable sample_impute(const CategoricalTable& table, Rng& rng);
CategoricalTable listwise_delete(const CategoricalTable& table);

// Observed marginal proportions of one variable (ignoring missing cells).
Eigen::VectorXd observed_marginals(const CategoricalTable& table, int variable);

}  // namespace mimca
