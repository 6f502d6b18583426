#pragma once

#include <vector>

#include "mimca/rng.hpp"
#include "mimca/table.hpp"

namespace mimca {

struct CrossValidationConfig {
  std::vector<int> candidates;  // values of S to try
  int repetitions = 5;          // k
  double add_fraction = 0.05;   // share of observed cells masked per repetition
  double epsilon = 1e-6;
  int max_iterations = 1000;
  int threads = 1;
};

struct CrossValidationResult {
  int best_rank = 0;                // S*, ties broken toward smaller S
  std::vector<double> mean_errors;  // per candidate, mean over repetitions
};

// Mask observed categorical cells completely at random, predict the hidden
// indicator entries with regularized iterative MCA, score by mean squared
// deviation. Works on complete or incomplete tables.
CrossValidationResult cross_validate_dims(const CategoricalTable& table,
                                          const CrossValidationConfig& cfg, Rng& rng);

}  // namespace mimca
