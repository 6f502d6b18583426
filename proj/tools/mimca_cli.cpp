// Command-line front end: impute / pool / cv / simulate / describe.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "mimca/iterative.hpp"
#include "mimca/logistic.hpp"
#include "mimca/mca.hpp"
#include "mimca/multi.hpp"
#include "mimca/pooling.hpp"
#include "mimca/select.hpp"
#include "mimca/simulate.hpp"
#include "mimca/table.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MIMCA_SEED")) return std::strtoull(env, nullptr, 10);
  return 20240901ULL;
}

int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n ? static_cast<int>(n) : 1;
}

struct CommonIo {
  std::string input;
  std::string missing_token = "NA";
  std::string delimiter = ",";

  mimca::TableIoOptions options() const {
    if (delimiter.size() != 1) throw std::invalid_argument("delimiter must be one character");
    return {delimiter[0], missing_token};
  }
};

void add_io_flags(CLI::App* cmd, CommonIo& io) {
  cmd->add_option("--input", io.input, "input table (delimited text with header)")->required();
  cmd->add_option("--missing-token", io.missing_token, "token marking a missing cell");
  cmd->add_option("--delimiter", io.delimiter, "field delimiter");
}

int cmd_impute(const CommonIo& io, int dims, int m, double epsilon, std::uint64_t seed,
               int threads, const std::string& out_prefix) {
  mimca::TableIoOptions opts = io.options();
  mimca::CategoricalTable table = mimca::read_table(io.input, opts);
  const int max_rank = table.indicator_columns() - table.num_variables();
  if (dims < 1 || dims > max_rank) {
    std::cerr << "error: --dims must be in [1, " << max_rank << "] (J-K for this table)\n";
    return kExitUsage;
  }

  mimca::MimcaConfig cfg;
  cfg.rank = dims;
  cfg.num_imputations = m;
  cfg.epsilon = epsilon;
  cfg.threads = threads;
  mimca::ImputationSet set = mimca::mimca_impute(table, cfg, seed);

  for (int i = 0; i < m; ++i)
    mimca::write_table(set.tables[i], out_prefix + "_imp" + std::to_string(i + 1) + ".csv",
                       opts);

  std::ofstream meta(out_prefix + "_meta.txt");
  meta << "method mimca\nseed " << seed << "\ndims " << dims << "\nm " << m
       << "\nepsilon " << epsilon << "\n";
  for (int i = 0; i < m; ++i)
    meta << "imputation " << i + 1 << " iterations " << set.diagnostics[i].iterations
         << " converged " << (set.diagnostics[i].converged ? 1 : 0) << "\n";
  for (const auto& w : set.warnings) {
    meta << "warning " << w << "\n";
    std::cerr << "warning: " << w << "\n";
  }
  std::cout << "wrote " << m << " imputed tables with prefix '" << out_prefix << "'\n";
  return 0;
}

int cmd_pool(const std::vector<std::string>& files, const std::string& formula_text,
             const CommonIo& io) {
  if (files.size() < 2) {
    std::cerr << "error: pooling needs at least two imputed files\n";
    return kExitUsage;
  }
  mimca::ModelFormula formula = mimca::ModelFormula::parse(formula_text);
  mimca::TableIoOptions opts = io.options();

  std::vector<mimca::LogisticFit> fits;
  std::vector<std::string> terms;
  int n = 0, p = 0;
  for (const auto& file : files) {
    mimca::CategoricalTable table = mimca::read_table(file, opts);
    mimca::DesignMatrix d = mimca::build_design(table, formula);
    fits.push_back(mimca::fit_logistic(d.x, d.y));
    terms = d.term_names;
    n = static_cast<int>(d.x.rows());
    p = static_cast<int>(d.x.cols());
  }

  const int m = static_cast<int>(fits.size());
  std::cout << "term,estimate,within,between,total,df,ci_low,ci_high\n";
  Eigen::VectorXd estimates(m), variances(m);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < m; ++i) {
      estimates(i) = fits[i].coefficients(j);
      variances(i) = fits[i].covariance(j, j);
    }
    mimca::PooledEstimate pooled =
        mimca::pool_coefficient(estimates, variances, static_cast<double>(n - p));
    std::cout << terms[j] << ',' << pooled.estimate << ',' << pooled.within_variance << ','
              << pooled.between_variance << ',' << pooled.total_variance << ',' << pooled.df
              << ',' << pooled.ci_low << ',' << pooled.ci_high << "\n";
  }
  return 0;
}

int cmd_cv(const CommonIo& io, const std::string& candidates_text, int reps,
           double fraction, std::uint64_t seed, int threads) {
  mimca::CategoricalTable table = mimca::read_table(io.input, io.options());

  mimca::CrossValidationConfig cfg;
  cfg.repetitions = reps;
  cfg.add_fraction = fraction;
  cfg.threads = threads;
  std::istringstream stream(candidates_text);
  std::string item;
  while (std::getline(stream, item, ','))
    if (!item.empty()) cfg.candidates.push_back(std::stoi(item));
  if (cfg.candidates.empty()) {
    int max_rank = table.indicator_columns() - table.num_variables();
    for (int s = 1; s <= std::min(5, max_rank); ++s) cfg.candidates.push_back(s);
  }

  mimca::Rng rng(seed);
  mimca::CrossValidationResult result = mimca::cross_validate_dims(table, cfg, rng);
  std::cout << "dims,mean_error\n";
  for (std::size_t c = 0; c < cfg.candidates.size(); ++c)
    std::cout << cfg.candidates[c] << ',' << result.mean_errors[c] << "\n";
  std::cout << "selected " << result.best_rank << "\n";
  return 0;
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open config '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(file, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line without '=': " + line);
    auto strip = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  return kv;
}

int cmd_simulate(const std::string& config_path, int threads, const std::string& out_prefix) {
  auto kv = read_config(config_path);
  auto get = [&](const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };

  mimca::SimulationConfig cfg;
  cfg.threads = threads;
  cfg.seed = std::strtoull(get("seed", std::to_string(default_seed())).c_str(), nullptr, 10);
  cfg.sample_size = std::stoi(get("sample_size", "300"));
  cfg.missing_rate = std::stod(get("missing_rate", "0.20"));
  cfg.replications = std::stoi(get("replications", "200"));
  cfg.num_imputations = std::stoi(get("imputations", "5"));
  cfg.epsilon = std::stod(get("epsilon", "1e-6"));
  cfg.max_failure_fraction = std::stod(get("max_failure", "0.10"));
  cfg.amputate_response = get("amputate_response", "true") == "true";

  if (kv.count("population")) {
    mimca::TableIoOptions opts{get("delimiter", ",")[0], get("missing_token", "NA")};
    cfg.population = mimca::read_table(kv.at("population"), opts);
    cfg.formula = mimca::ModelFormula::parse(get("formula", ""));
  } else if (get("synthetic", "") == "latent") {
    auto synth = mimca::make_synthetic_population(std::stoi(get("synthetic_rows", "2000")),
                                                  cfg.seed ^ 0x5eedULL,
                                                  std::stod(get("effect_scale", "1.0")));
    cfg.population = std::move(synth.table);
    cfg.formula = std::move(synth.formula);
  } else {
    throw std::invalid_argument("config must set population=<file> or synthetic=latent");
  }

  const std::string dims = get("dims", "cv");
  if (dims == "cv") {
    mimca::CrossValidationConfig cv;
    int max_rank = cfg.population.indicator_columns() - cfg.population.num_variables();
    for (int s = 1; s <= std::min(5, max_rank); ++s) cv.candidates.push_back(s);
    cv.threads = threads;
    mimca::Rng rng(cfg.seed ^ 0xc4ULL);
    // select S on one amputated draw from the population design
    mimca::Rng draw_rng(cfg.seed ^ 0xd1ULL);
    mimca::CategoricalTable sample = mimca::draw_sample_and_response(
        cfg.population, mimca::estimate_population_truth(cfg.population, cfg.formula),
        cfg.formula, cfg.sample_size, draw_rng);
    mimca::CategoricalTable amputated =
        mimca::amputate_mcar(sample, cfg.missing_rate, draw_rng);
    cfg.mimca_rank = mimca::cross_validate_dims(amputated, cv, rng).best_rank;
    std::cout << "cross-validation selected dims " << cfg.mimca_rank << "\n";
  } else {
    cfg.mimca_rank = std::stoi(dims);
  }

  mimca::SimulationReport report = mimca::run_simulation(cfg);

  std::ofstream summary(out_prefix + "_summary.csv");
  summary << "method,term,truth,bias,coverage,median_width,successes\n";
  const int p = static_cast<int>(report.terms.size());
  for (const auto& s : report.summaries) {
    int j = 0;
    for (; j < p; ++j)
      if (report.terms[j] == s.term) break;
    summary << mimca::method_name(s.method) << ',' << s.term << ',' << report.truth(j) << ','
            << s.bias << ',' << s.coverage << ',' << s.median_width << ',' << s.successes
            << "\n";
  }

  std::ofstream runs(out_prefix + "_runs.csv");
  runs << "replication,method,ok,term,estimate,ci_low,ci_high,error\n";
  for (const auto& r : report.runs) {
    if (!r.ok) {
      runs << r.replication << ',' << mimca::method_name(r.method) << ",0,,,,,\"" << r.error
           << "\"\n";
      continue;
    }
    for (int j = 0; j < p; ++j)
      runs << r.replication << ',' << mimca::method_name(r.method) << ",1,"
           << report.terms[j] << ',' << r.estimates(j) << ',' << r.ci_low(j) << ','
           << r.ci_high(j) << ",\n";
  }

  std::cout << "method            min coverage   max |bias|   median width (max)\n";
  for (std::size_t base = 0; base < report.summaries.size(); base += p) {
    double min_cov = 1.0, max_bias = 0.0, max_width = 0.0;
    for (int j = 0; j < p; ++j) {
      const auto& s = report.summaries[base + j];
      min_cov = std::min(min_cov, s.coverage);
      max_bias = std::max(max_bias, std::abs(s.bias));
      max_width = std::max(max_width, s.median_width);
    }
    std::cout << mimca::method_name(report.summaries[base].method) << "\t\t" << min_cov
              << "\t" << max_bias << "\t" << max_width << "\n";
  }
  std::cout << "wrote " << out_prefix << "_summary.csv and " << out_prefix << "_runs.csv\n";
  return 0;
}

int cmd_describe(const CommonIo& io) {
  mimca::CategoricalTable table = mimca::read_table(io.input, io.options());
  const int I = table.rows();
  const int K = table.num_variables();
  const int J = table.indicator_columns();
  std::cout << "rows " << I << "\nvariables " << K << "\nindicator_columns " << J << "\n";
  std::vector<int> categories;
  for (int k = 0; k < K; ++k) {
    const auto& v = table.variable(k);
    int missing = 0;
    for (int i = 0; i < I; ++i)
      if (table.is_missing(i, k)) ++missing;
    categories.push_back(v.num_categories());
    std::cout << "variable " << v.name << " categories " << v.num_categories()
              << " missing " << static_cast<double>(missing) / I << "\n";
  }
  std::cout << "missing_fraction " << table.missing_fraction() << "\n";
  std::cout << "normal_model_params " << mimca::normal_param_count(J, K) << "\n";
  std::cout << "loglinear_twoway_params " << mimca::loglinear_twoway_param_count(categories)
            << "\n";
  for (int s = 1; s <= std::min(5, J - K); ++s)
    std::cout << "mca_params_dims_" << s << " " << mimca::mca_param_count(I, J, K, s) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiple imputation of categorical data via correspondence analysis"};
  app.require_subcommand(1);

  CommonIo io;
  int dims = 2, m = 5, reps = 5, threads = hardware_threads();
  double epsilon = 1e-6, fraction = 0.05;
  std::uint64_t seed = default_seed();
  std::string out_prefix = "out", formula_text, candidates_text, config_path;
  std::vector<std::string> pool_files;

  auto* impute = app.add_subcommand("impute", "multiple imputation of an incomplete table");
  add_io_flags(impute, io);
  impute->add_option("--dims", dims, "number of dimensions S")->required();
  impute->add_option("--m", m, "number of imputed tables");
  impute->add_option("--epsilon", epsilon, "convergence threshold");
  impute->add_option("--seed", seed, "random seed");
  impute->add_option("--threads", threads, "worker threads");
  impute->add_option("--out", out_prefix, "output file prefix")->required();

  auto* pool = app.add_subcommand("pool", "fit per imputed table and pool the estimates");
  pool->add_option("files", pool_files, "imputed tables")->required();
  pool->add_option("--formula", formula_text, "response=success ~ v1 + v2")->required();
  pool->add_option("--missing-token", io.missing_token, "token marking a missing cell");
  pool->add_option("--delimiter", io.delimiter, "field delimiter");

  auto* cv = app.add_subcommand("cv", "cross-validate the number of dimensions");
  add_io_flags(cv, io);
  cv->add_option("--candidates", candidates_text, "comma-separated dims to try");
  cv->add_option("--reps", reps, "repetitions");
  cv->add_option("--fraction", fraction, "fraction of observed cells to mask");
  cv->add_option("--seed", seed, "random seed");
  cv->add_option("--threads", threads, "worker threads");

  auto* simulate = app.add_subcommand("simulate", "coverage/bias/width study");
  simulate->add_option("--config", config_path, "key=value config file")->required();
  simulate->add_option("--threads", threads, "worker threads");
  simulate->add_option("--out", out_prefix, "output file prefix");

  auto* describe = app.add_subcommand("describe", "summarize a table");
  add_io_flags(describe, io);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (impute->parsed()) return cmd_impute(io, dims, m, epsilon, seed, threads, out_prefix);
    if (pool->parsed()) return cmd_pool(pool_files, formula_text, io);
    if (cv->parsed()) return cmd_cv(io, candidates_text, reps, fraction, seed, threads);
    if (simulate->parsed()) return cmd_simulate(config_path, threads, out_prefix);
    if (describe->parsed()) return cmd_describe(io);
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
