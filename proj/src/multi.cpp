#include "mimca/multi.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

#include "mimca/iterative.hpp"

namespace mimca {

Eigen::VectorXd bootstrap_weights(int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("bootstrap_weights: count must be >= 1");
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(count);
  for (int d = 0; d < count; ++d) weights(rng.uniform_index(count)) += 1.0;
  return weights / static_cast<double>(count);
}

int coin_flip(std::span<const double> fuzzy_span, Rng& rng) {
  if (fuzzy_span.size() < 2) throw std::invalid_argument("coin_flip: span too short");
  std::vector<double> probs(fuzzy_span.size());
  double total = 0.0;
  for (std::size_t j = 0; j < fuzzy_span.size(); ++j) {
    probs[j] = std::clamp(fuzzy_span[j], 0.0, 1.0);
    total += probs[j];
  }
  if (!(total > 0.0)) throw std::invalid_argument("degenerate probabilities");
  return static_cast<int>(rng.categorical(probs));
}

Eigen::VectorXd observed_marginals(const CategoricalTable& table, int variable) {
  const int q = table.variable(variable).num_categories();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(q);
  for (int i = 0; i < table.rows(); ++i)
    if (!table.is_missing(i, variable)) counts(table.cell(i, variable)) += 1.0;
  if (!(counts.sum() > 0.0))
    throw std::invalid_argument("fully missing variable '" +
                                table.variable(variable).name + "'");
  return counts / counts.sum();
}

namespace {

struct SingleImputation {
  CategoricalTable table;
  ImputationDiagnostics diagnostics;
  std::vector<std::string> warnings;
};

SingleImputation impute_once(const CategoricalTable& table, const IndicatorMatrix& z,
                             const MimcaConfig& cfg, Rng rng) {
  SingleImputation out{table, {}, {}};

  IterativeConfig iter_cfg;
  iter_cfg.rank = cfg.rank;
  iter_cfg.epsilon = cfg.epsilon;
  iter_cfg.max_iterations = cfg.max_iterations;
  iter_cfg.regularized = true;
  iter_cfg.row_weights = bootstrap_weights(table.rows(), rng);
  out.diagnostics.bootstrap_weights = iter_cfg.row_weights;

  IterativeResult fit = iterative_mca(z, iter_cfg);
  out.diagnostics.iterations = fit.iterations;
  out.diagnostics.converged = fit.converged;
  out.diagnostics.floored_metric = fit.floored_metric;
  if (!fit.converged)
    out.warnings.push_back("iterative MCA did not converge within " +
                           std::to_string(cfg.max_iterations) + " iterations");
  if (fit.floored_metric)
    out.warnings.push_back("empty category under bootstrap weighting; metric floored");

  // coin flipping on the spans that were missing; observed cells stay as-is
  for (int i = 0; i < table.rows(); ++i) {
    for (int k = 0; k < table.num_variables(); ++k) {
      if (!table.is_missing(i, k)) continue;
      const auto& s = z.span(k);
      std::vector<double> span(static_cast<std::size_t>(s.size));
      for (int j = 0; j < s.size; ++j) span[j] = fit.completed.values()(i, s.begin + j);
      int category;
      try {
        category = coin_flip(span, rng);
      } catch (const std::invalid_argument&) {
        // all-zero clamped span: fall back to the observed marginals
        out.diagnostics.degenerate_span = true;
        Eigen::VectorXd marginals = observed_marginals(table, k);
        category = static_cast<int>(
            rng.categorical({marginals.data(), static_cast<std::size_t>(marginals.size())}));
      }
      out.table.set_cell(i, k, category);
    }
  }
  return out;
}

}  // namespace

ImputationSet mimca_impute(const CategoricalTable& table, const MimcaConfig& cfg,
                           std::uint64_t seed) {
  if (cfg.num_imputations < 1)
    throw std::invalid_argument("mimca_impute: need at least one imputation");
  const int J = table.indicator_columns();
  const int K = table.num_variables();
  if (cfg.rank < 1 || cfg.rank > J - K)
    throw std::invalid_argument("mimca_impute: rank must be in [1, " +
                                std::to_string(J - K) + "]");

  IndicatorMatrix z = encode_disjunctive(table);
  Rng root(seed);

  ImputationSet set;
  set.method = "mimca";
  set.seed = seed;
  set.tables.resize(cfg.num_imputations);
  set.diagnostics.resize(cfg.num_imputations);
  if (table.complete())
    set.warnings.push_back("no missing values; imputations are copies of the input");

  std::vector<std::vector<std::string>> warnings(cfg.num_imputations);
  auto run = [&](int m) {
    SingleImputation one = impute_once(table, z, cfg, root.substream(m));
    set.tables[m] = std::move(one.table);
    set.diagnostics[m] = std::move(one.diagnostics);
    warnings[m] = std::move(one.warnings);
  };

  const int threads = std::max(1, cfg.threads);
  if (threads == 1 || cfg.num_imputations == 1) {
    for (int m = 0; m < cfg.num_imputations; ++m) run(m);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < std::min(threads, cfg.num_imputations); ++t)
      pool.emplace_back([&] {
        for (int m = next.fetch_add(1); m < cfg.num_imputations; m = next.fetch_add(1)) run(m);
      });
    for (auto& th : pool) th.join();
  }
  for (int m = 0; m < cfg.num_imputations; ++m)
    for (auto& w : warnings[m])
      set.warnings.push_back("imputation " + std::to_string(m + 1) + ": " + w);
  return set;
}

CategoricalTable sample_impute(const CategoricalTable& table, Rng& rng) {
  CategoricalTable out = table;
  for (int k = 0; k < table.num_variables(); ++k) {
    bool any_missing = false;
    for (int i = 0; i < table.rows() && !any_missing; ++i)
      any_missing = table.is_missing(i, k);
    if (!any_missing) continue;
    Eigen::VectorXd marginals = observed_marginals(table, k);
    std::span<const double> probs(marginals.data(),
                                  static_cast<std::size_t>(marginals.size()));
    for (int i = 0; i < table.rows(); ++i)
      if (table.is_missing(i, k))
        out.set_cell(i, k, static_cast<int>(rng.categorical(probs)));
  }
  return out;
}

CategoricalTable listwise_delete(const CategoricalTable& table) {
  std::vector<std::vector<int>> kept;
  for (int i = 0; i < table.rows(); ++i) {
    if (!table.row_complete(i)) continue;
    std::vector<int> row(table.num_variables());
    for (int k = 0; k < table.num_variables(); ++k) row[k] = table.cell(i, k);
    kept.push_back(std::move(row));
  }
  if (kept.empty()) throw std::invalid_argument("listwise_delete: no complete rows");
  return CategoricalTable(table.variables(), std::move(kept));
}

}  // namespace mimca
