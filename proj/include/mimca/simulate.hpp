#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mimca/logistic.hpp"
#include "mimca/rng.hpp"
#include "mimca/table.hpp"

namespace mimca {

enum class Method { Mimca, Sample, Listwise, FullData };

std::string method_name(Method m);

struct SimulationConfig {
  CategoricalTable population;
  ModelFormula formula;
  int sample_size = 300;
  double missing_rate = 0.20;
  int replications = 200;   // T
  int num_imputations = 5;  // M
  int mimca_rank = 2;       // S
  double epsilon = 1e-6;
  std::vector<Method> methods = {Method::Mimca, Method::Sample, Method::Listwise,
                                 Method::FullData};
  bool amputate_response = true;
  std::uint64_t seed = 0;
  int threads = 1;
  double max_failure_fraction = 0.10;
};

struct RunRecord {
  int replication = 0;
  Method method = Method::Mimca;
  bool ok = false;
  std::string error;
  Eigen::VectorXd estimates;
  Eigen::VectorXd ci_low;
  Eigen::VectorXd ci_high;
};

struct CoefficientSummary {
  Method method;
  std::string term;
  double bias = 0.0;
  double coverage = 0.0;
  double median_width = 0.0;
  int successes = 0;
};

struct SimulationReport {
  std::vector<std::string> terms;
  Eigen::VectorXd truth;  // psi
  std::vector<CoefficientSummary> summaries;
  std::vector<RunRecord> runs;
  std::map<std::string, int> failures;  // per method

  const CoefficientSummary& summary(Method m, int coefficient) const;
};

// Logistic fit on the full population; coefficients become ground truth.
Eigen::VectorXd estimate_population_truth(const CategoricalTable& population,
                                          const ModelFormula& formula);

// n rows without replacement; the response cell is redrawn as a Bernoulli
// with success probability logistic(design * psi). Response must be binary.
CategoricalTable draw_sample_and_response(const CategoricalTable& population,
                                          const Eigen::VectorXd& psi,
                                          const ModelFormula& formula, int n, Rng& rng);

// Each in-scope cell is independently masked with the given probability.
// `scope` lists maskable variable indices; empty means all variables.
CategoricalTable amputate_mcar(const CategoricalTable& table, double rate, Rng& rng,
                               const std::vector<int>& scope = {});

SimulationReport run_simulation(const SimulationConfig& cfg);

double agresti_coull_lower(double p, int n, double level = 0.95);

// Desk-scale synthetic population: five covariates with latent-class
// association plus a binary response drawn from a known logistic model.
struct SyntheticPopulation {
  CategoricalTable table;
  ModelFormula formula;
  Eigen::VectorXd generating_coefficients;
};
SyntheticPopulation make_synthetic_population(int rows, std::uint64_t seed,
                                              double effect_scale = 1.0);

}  // namespace mimca
