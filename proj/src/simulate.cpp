#include "mimca/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "mimca/multi.hpp"
#include "mimca/pooling.hpp"

namespace mimca {

std::string method_name(Method m) {
  switch (m) {
    case Method::Mimca: return "mimca";
    case Method::Sample: return "sample";
    case Method::Listwise: return "listwise";
    case Method::FullData: return "fulldata";
  }
  return "?";
}

const CoefficientSummary& SimulationReport::summary(Method m, int coefficient) const {
  // summaries are stored method-major, coefficient-minor
  const int p = static_cast<int>(terms.size());
  for (std::size_t base = 0; base + p <= summaries.size(); base += p)
    if (summaries[base].method == m) return summaries[base + coefficient];
  throw std::out_of_range("no summary for requested method");
}

Eigen::VectorXd estimate_population_truth(const CategoricalTable& population,
                                          const ModelFormula& formula) {
  DesignMatrix d = build_design(population, formula);
  return fit_logistic(d.x, d.y).coefficients;
}

CategoricalTable draw_sample_and_response(const CategoricalTable& population,
                                          const Eigen::VectorXd& psi,
                                          const ModelFormula& formula, int n, Rng& rng) {
  if (n > population.rows())
    throw std::invalid_argument("draw_sample_and_response: n exceeds population size");
  const int response_var = population.variable_index(formula.response);
  if (response_var < 0) throw std::invalid_argument("response variable not found");
  if (population.variable(response_var).num_categories() != 2)
    throw std::invalid_argument("response variable must be binary");
  const int success =
      population.variable(response_var).label_index(formula.success_category);
  if (success < 0) throw std::invalid_argument("success category not found");
  const int failure = 1 - success;

  std::vector<std::size_t> picks =
      rng.sample_without_replacement(population.rows(), static_cast<std::size_t>(n));
  std::vector<std::vector<int>> cells(n);
  for (int i = 0; i < n; ++i) {
    cells[i].resize(population.num_variables());
    for (int k = 0; k < population.num_variables(); ++k)
      cells[i][k] = population.cell(static_cast<int>(picks[i]), k);
  }
  CategoricalTable sample(population.variables(), std::move(cells));

  DesignMatrix d = build_design(sample, formula);
  Eigen::VectorXd eta = d.x * psi;
  for (int i = 0; i < n; ++i) {
    const double prob = 1.0 / (1.0 + std::exp(-eta(i)));
    sample.set_cell(i, response_var, rng.bernoulli(prob) ? success : failure);
  }
  return sample;
}

CategoricalTable amputate_mcar(const CategoricalTable& table, double rate, Rng& rng,
                               const std::vector<int>& scope) {
  if (!(rate > 0.0 && rate < 1.0))
    throw std::invalid_argument("amputate_mcar: rate must be in (0,1)");
  std::vector<int> vars = scope;
  if (vars.empty())
    for (int k = 0; k < table.num_variables(); ++k) vars.push_back(k);

  constexpr int kMaxRetries = 100;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    CategoricalTable out = table;
    for (int i = 0; i < table.rows(); ++i)
      for (int k : vars)
        if (!table.is_missing(i, k) && rng.bernoulli(rate)) out.set_cell(i, k, kMissing);
    bool ok = true;
    for (int k = 0; k < table.num_variables() && ok; ++k) {
      bool any = false;
      for (int i = 0; i < table.rows() && !any; ++i) any = !out.is_missing(i, k);
      ok = any;
    }
    if (ok) return out;
  }
  throw std::runtime_error("amputate_mcar: a variable was repeatedly left fully missing");
}

double agresti_coull_lower(double p, int n, double level) {
  if (!(p > 0.0 && p < 1.0) || n < 1)
    throw std::invalid_argument("agresti_coull_lower: invalid arguments");
  boost::math::normal standard;
  const double z = boost::math::quantile(standard, 1.0 - (1.0 - level) / 2.0);
  const double n_tilde = n + z * z;
  const double p_tilde = (n * p + z * z / 2.0) / n_tilde;
  return p_tilde - z * std::sqrt(p_tilde * (1.0 - p_tilde) / n_tilde);
}

namespace {

struct MethodResult {
  Eigen::VectorXd estimates;
  Eigen::VectorXd ci_low;
  Eigen::VectorXd ci_high;
};

MethodResult wald_fit(const CategoricalTable& table, const ModelFormula& formula) {
  DesignMatrix d = build_design(table, formula);
  LogisticFit fit = fit_logistic(d.x, d.y);
  const int p = static_cast<int>(fit.coefficients.size());
  const double df = static_cast<double>(d.x.rows() - p);
  MethodResult out;
  out.estimates = fit.coefficients;
  out.ci_low.resize(p);
  out.ci_high.resize(p);
  for (int j = 0; j < p; ++j) {
    auto [lo, hi] =
        confidence_interval(fit.coefficients(j), fit.covariance(j, j), df);
    out.ci_low(j) = lo;
    out.ci_high(j) = hi;
  }
  return out;
}

MethodResult mimca_fit(const CategoricalTable& amputated, const ModelFormula& formula,
                       const SimulationConfig& cfg, std::uint64_t seed) {
  MimcaConfig mcfg;
  mcfg.rank = cfg.mimca_rank;
  mcfg.num_imputations = cfg.num_imputations;
  mcfg.epsilon = cfg.epsilon;
  ImputationSet set = mimca_impute(amputated, mcfg, seed);

  const int m = cfg.num_imputations;
  std::vector<LogisticFit> fits;
  fits.reserve(m);
  int n = 0, p = 0;
  for (const auto& table : set.tables) {
    DesignMatrix d = build_design(table, formula);
    fits.push_back(fit_logistic(d.x, d.y));
    n = static_cast<int>(d.x.rows());
    p = static_cast<int>(d.x.cols());
  }
  const double complete_df = static_cast<double>(n - p);

  MethodResult out;
  out.estimates.resize(p);
  out.ci_low.resize(p);
  out.ci_high.resize(p);
  Eigen::VectorXd estimates(m), variances(m);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < m; ++i) {
      estimates(i) = fits[i].coefficients(j);
      variances(i) = fits[i].covariance(j, j);
    }
    PooledEstimate pooled = pool_coefficient(estimates, variances, complete_df);
    out.estimates(j) = pooled.estimate;
    out.ci_low(j) = pooled.ci_low;
    out.ci_high(j) = pooled.ci_high;
  }
  return out;
}

}  // namespace

SimulationReport run_simulation(const SimulationConfig& cfg) {
  if (cfg.replications < 1)
    throw std::invalid_argument("run_simulation: need at least one replication");

  SimulationReport report;
  report.truth = estimate_population_truth(cfg.population, cfg.formula);
  report.terms = build_design(cfg.population, cfg.formula).term_names;
  const int p = static_cast<int>(report.truth.size());

  std::vector<int> scope;
  if (!cfg.amputate_response) {
    const int response_var = cfg.population.variable_index(cfg.formula.response);
    for (int k = 0; k < cfg.population.num_variables(); ++k)
      if (k != response_var) scope.push_back(k);
  }

  Rng root(cfg.seed);
  const int num_methods = static_cast<int>(cfg.methods.size());
  report.runs.resize(static_cast<std::size_t>(cfg.replications) * num_methods);

  auto run_one = [&](int t) {
    Rng sub = root.substream(static_cast<std::uint64_t>(t));
    CategoricalTable sample =
        draw_sample_and_response(cfg.population, report.truth, cfg.formula,
                                 cfg.sample_size, sub);
    CategoricalTable amputated = amputate_mcar(sample, cfg.missing_rate, sub, scope);
    const std::uint64_t mimca_seed = sub.next_u64();

    for (int mi = 0; mi < num_methods; ++mi) {
      RunRecord& record = report.runs[static_cast<std::size_t>(t) * num_methods + mi];
      record.replication = t;
      record.method = cfg.methods[mi];
      try {
        MethodResult result;
        switch (cfg.methods[mi]) {
          case Method::FullData:
            result = wald_fit(sample, cfg.formula);
            break;
          case Method::Listwise:
            result = wald_fit(listwise_delete(amputated), cfg.formula);
            break;
          case Method::Sample: {
            CategoricalTable imputed = sample_impute(amputated, sub);
            result = wald_fit(imputed, cfg.formula);
            break;
          }
          case Method::Mimca:
            result = mimca_fit(amputated, cfg.formula, cfg, mimca_seed);
            break;
        }
        record.ok = true;
        record.estimates = std::move(result.estimates);
        record.ci_low = std::move(result.ci_low);
        record.ci_high = std::move(result.ci_high);
      } catch (const std::exception& e) {
        record.ok = false;
        record.error = e.what();
      }
    }
  };

  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    for (int t = 0; t < cfg.replications; ++t) run_one(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(threads, cfg.replications); ++w)
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < cfg.replications; t = next.fetch_add(1))
          run_one(t);
      });
    for (auto& th : pool) th.join();
  }

  for (Method m : cfg.methods) report.failures[method_name(m)] = 0;
  for (const auto& record : report.runs)
    if (!record.ok) ++report.failures[method_name(record.method)];
  for (const auto& [name, count] : report.failures)
    if (count > cfg.max_failure_fraction * cfg.replications)
      throw std::runtime_error("run_simulation: method '" + name + "' failed in " +
                               std::to_string(count) + " of " +
                               std::to_string(cfg.replications) + " replications");

  for (Method m : cfg.methods) {
    for (int j = 0; j < p; ++j) {
      CoefficientSummary s;
      s.method = m;
      s.term = report.terms[j];
      double sum = 0.0;
      int covered = 0;
      std::vector<double> widths;
      for (const auto& record : report.runs) {
        if (record.method != m || !record.ok) continue;
        sum += record.estimates(j) - report.truth(j);
        if (report.truth(j) >= record.ci_low(j) && report.truth(j) <= record.ci_high(j))
          ++covered;
        widths.push_back(record.ci_high(j) - record.ci_low(j));
        ++s.successes;
      }
      if (s.successes > 0) {
        s.bias = sum / s.successes;
        s.coverage = static_cast<double>(covered) / s.successes;
        std::sort(widths.begin(), widths.end());
        const std::size_t mid = widths.size() / 2;
        s.median_width = widths.size() % 2 ? widths[mid]
                                           : 0.5 * (widths[mid - 1] + widths[mid]);
      }
      report.summaries.push_back(std::move(s));
    }
  }
  return report;
}

SyntheticPopulation make_synthetic_population(int rows, std::uint64_t seed,
                                              double effect_scale) {
  Rng rng(seed);
  std::vector<VariableMeta> variables = {
      {"y", {"no", "yes"}},
      {"v1", {"a", "b"}},
      {"v2", {"a", "b", "c"}},
      {"v3", {"a", "b", "c", "d"}},
      {"v4", {"a", "b"}},
      {"v5", {"a", "b", "c"}},
  };

  // covariates share a three-class latent structure so they are mutually
  // associated and recoverable by a low-rank MCA fit
  std::vector<std::vector<int>> cells(rows, std::vector<int>(6, 0));
  for (int i = 0; i < rows; ++i) {
    const int latent = static_cast<int>(rng.uniform_index(3));
    for (int k = 1; k <= 5; ++k) {
      const int q = variables[k].num_categories();
      std::vector<double> probs(q, 0.3 / (q - 1));
      probs[latent % q] = 0.7;
      cells[i][k] = static_cast<int>(rng.categorical(probs));
    }
  }
  CategoricalTable table(variables, std::move(cells));

  // generating logistic coefficients over the dummy-coded covariates
  ModelFormula formula = ModelFormula::parse("y=yes ~ v1 + v2 + v3 + v4 + v5");
  DesignMatrix d = build_design(table, formula);
  const int p = static_cast<int>(d.x.cols());
  Eigen::VectorXd beta(p);
  beta(0) = -0.4 * effect_scale;
  const double pattern[] = {1.2, -0.9, 0.8, 1.1, -0.7, 0.9, 1.0, -1.1, 0.8, 1.2};
  for (int j = 1; j < p; ++j) beta(j) = effect_scale * pattern[(j - 1) % 10];

  Eigen::VectorXd eta = d.x * beta;
  for (int i = 0; i < rows; ++i) {
    const double prob = 1.0 / (1.0 + std::exp(-eta(i)));
    table.set_cell(i, 0, rng.bernoulli(prob) ? 1 : 0);
  }
  return {std::move(table), std::move(formula), std::move(beta)};
}

}  // namespace mimca
