#include "mimca/select.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <atomic>

#include "mimca/iterative.hpp"

namespace mimca {

namespace {

struct MaskedCell {
  int row;
  int variable;
};

// Draw extra MCAR holes over currently observed cells; re-draw (bounded)
// if a variable would lose all its observed cells.
std::vector<MaskedCell> draw_mask(const CategoricalTable& table, double fraction, Rng& rng) {
  std::vector<MaskedCell> observed;
  for (int i = 0; i < table.rows(); ++i)
    for (int k = 0; k < table.num_variables(); ++k)
      if (!table.is_missing(i, k)) observed.push_back({i, k});
  if (observed.empty()) throw std::invalid_argument("cross_validate_dims: no observed cells");

  std::vector<int> observed_per_var(table.num_variables(), 0);
  for (const auto& c : observed) ++observed_per_var[c.variable];

  const std::size_t target =
      std::max<std::size_t>(1, static_cast<std::size_t>(fraction * observed.size()));

  constexpr int kMaxRetries = 100;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    std::vector<std::size_t> picks = rng.sample_without_replacement(observed.size(), target);
    std::vector<int> remaining = observed_per_var;
    bool ok = true;
    for (std::size_t p : picks)
      if (--remaining[observed[p].variable] == 0) ok = false;
    if (!ok) continue;
    std::vector<MaskedCell> cells;
    cells.reserve(target);
    for (std::size_t p : picks) cells.push_back(observed[p]);
    return cells;
  }
  throw std::runtime_error("cross_validate_dims: masking repeatedly emptied a variable");
}

}  // namespace

CrossValidationResult cross_validate_dims(const CategoricalTable& table,
                                          const CrossValidationConfig& cfg, Rng& rng) {
  if (cfg.candidates.empty())
    throw std::invalid_argument("cross_validate_dims: no candidate ranks");
  const int max_rank = table.indicator_columns() - table.num_variables();
  for (int s : cfg.candidates)
    if (s < 1 || s > max_rank)
      throw std::invalid_argument("cross_validate_dims: candidate rank out of [1, J-K]");
  if (!(cfg.add_fraction > 0.0 && cfg.add_fraction < 1.0))
    throw std::invalid_argument("cross_validate_dims: add_fraction must be in (0,1)");
  if (cfg.repetitions < 1)
    throw std::invalid_argument("cross_validate_dims: repetitions must be >= 1");

  IndicatorMatrix z_full = encode_disjunctive(table);

  // the masked sets are drawn once per repetition and shared by all candidates
  std::vector<std::vector<MaskedCell>> masks(cfg.repetitions);
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    Rng sub = rng.substream(rep);
    masks[rep] = draw_mask(table, cfg.add_fraction, sub);
  }

  struct Job {
    int candidate_index;
    int repetition;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cfg.candidates.size(); ++c)
    for (int rep = 0; rep < cfg.repetitions; ++rep)
      jobs.push_back({static_cast<int>(c), rep});

  std::vector<double> errors(jobs.size(), 0.0);
  auto run = [&](std::size_t idx) {
    const Job& job = jobs[idx];
    CategoricalTable holed = table;
    for (const auto& cell : masks[job.repetition])
      holed.set_cell(cell.row, cell.variable, kMissing);

    IterativeConfig iter_cfg;
    iter_cfg.rank = cfg.candidates[job.candidate_index];
    iter_cfg.epsilon = cfg.epsilon;
    iter_cfg.max_iterations = cfg.max_iterations;
    iter_cfg.regularized = true;
    IterativeResult fit = iterative_mca(encode_disjunctive(holed), iter_cfg);

    double sum = 0.0;
    std::size_t cells = 0;
    for (const auto& cell : masks[job.repetition]) {
      const auto& span = z_full.span(cell.variable);
      for (int j = span.begin; j < span.end(); ++j) {
        double diff = z_full.values()(cell.row, j) - fit.completed.values()(cell.row, j);
        sum += diff * diff;
        ++cells;
      }
    }
    errors[idx] = sum / static_cast<double>(cells);
  };

  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) run(i);
      });
    for (auto& th : pool) th.join();
  }

  CrossValidationResult result;
  result.mean_errors.assign(cfg.candidates.size(), 0.0);
  for (std::size_t i = 0; i < jobs.size(); ++i)
    result.mean_errors[jobs[i].candidate_index] += errors[i] / cfg.repetitions;

  std::size_t best = 0;
  for (std::size_t c = 1; c < cfg.candidates.size(); ++c) {
    const bool better = result.mean_errors[c] < result.mean_errors[best];
    const bool tie_smaller = result.mean_errors[c] == result.mean_errors[best] &&
                             cfg.candidates[c] < cfg.candidates[best];
    if (better || tie_smaller) best = c;
  }
  result.best_rank = cfg.candidates[best];
  return result;
}

}  // namespace mimca
