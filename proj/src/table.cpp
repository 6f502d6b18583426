#include "mimca/table.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mimca {

int VariableMeta::label_index(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  return -1;
}

CategoricalTable::CategoricalTable(std::vector<VariableMeta> variables,
                                   std::vector<std::vector<int>> cells)
    : variables_(std::move(variables)), cells_(std::move(cells)) {
  validate();
}

void CategoricalTable::validate() const {
  for (const auto& v : variables_) {
    if (v.labels.size() < 2)
      throw std::invalid_argument("constant variable '" + v.name +
                                  "': at least two categories required");
    for (std::size_t a = 0; a < v.labels.size(); ++a)
      for (std::size_t b = a + 1; b < v.labels.size(); ++b)
        if (v.labels[a] == v.labels[b])
          throw std::invalid_argument("duplicate category label '" + v.labels[a] +
                                      "' in variable '" + v.name + "'");
  }
  const int k = num_variables();
  for (const auto& row : cells_) {
    if (static_cast<int>(row.size()) != k)
      throw std::invalid_argument("ragged row in categorical table");
    for (int j = 0; j < k; ++j) {
      if (row[j] == kMissing) continue;
      if (row[j] < 0 || row[j] >= variables_[j].num_categories())
        throw std::invalid_argument("category index out of range for variable '" +
                                    variables_[j].name + "'");
    }
  }
}

int CategoricalTable::variable_index(const std::string& name) const {
  for (int k = 0; k < num_variables(); ++k)
    if (variables_[k].name == name) return k;
  return -1;
}

void CategoricalTable::set_cell(int i, int k, int value) {
  if (value != kMissing && (value < 0 || value >= variables_[k].num_categories()))
    throw std::invalid_argument("category index out of range");
  cells_[i][k] = value;
}

bool CategoricalTable::row_complete(int i) const {
  for (int k = 0; k < num_variables(); ++k)
    if (cells_[i][k] == kMissing) return false;
  return true;
}

bool CategoricalTable::complete() const {
  for (int i = 0; i < rows(); ++i)
    if (!row_complete(i)) return false;
  return true;
}

int CategoricalTable::indicator_columns() const {
  int j = 0;
  for (const auto& v : variables_) j += v.num_categories();
  return j;
}

double CategoricalTable::missing_fraction() const {
  if (rows() == 0 || num_variables() == 0) return 0.0;
  long missing = 0;
  for (int i = 0; i < rows(); ++i)
    for (int k = 0; k < num_variables(); ++k)
      if (is_missing(i, k)) ++missing;
  return static_cast<double>(missing) / (static_cast<double>(rows()) * num_variables());
}

IndicatorMatrix::IndicatorMatrix(Eigen::MatrixXd values, Eigen::MatrixXd mask,
                                 std::vector<ColumnSpan> spans)
    : spans_(std::move(spans)), values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols())
    throw std::invalid_argument("indicator values/mask shape mismatch");
  int expected = 0;
  for (const auto& s : spans_) {
    if (s.begin != expected || s.size < 2)
      throw std::invalid_argument("invalid indicator column spans");
    expected = s.end();
  }
  if (expected != values_.cols())
    throw std::invalid_argument("indicator spans do not cover all columns");
  for (const auto& s : spans_)
    for (int i = 0; i < values_.rows(); ++i)
      for (int j = s.begin + 1; j < s.end(); ++j)
        if (mask_(i, j) != mask_(i, s.begin))
          throw std::invalid_argument("mask not constant across a variable span");
}

bool IndicatorMatrix::all_observed() const {
  return mask_.minCoeff() > 0.5;
}

IndicatorMatrix encode_disjunctive(const CategoricalTable& table) {
  const int rows = table.rows();
  const int cols = table.indicator_columns();
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(rows, cols);
  std::vector<ColumnSpan> spans;
  spans.reserve(table.num_variables());
  int offset = 0;
  for (int k = 0; k < table.num_variables(); ++k) {
    const int q = table.variable(k).num_categories();
    spans.push_back({offset, q});
    for (int i = 0; i < rows; ++i) {
      if (table.is_missing(i, k)) {
        mask.block(i, offset, 1, q).setZero();
      } else {
        values(i, offset + table.cell(i, k)) = 1.0;
      }
    }
    offset += q;
  }
  return IndicatorMatrix(std::move(values), std::move(mask), std::move(spans));
}

CategoricalTable decode_categories(const IndicatorMatrix& z,
                                   const std::vector<VariableMeta>& variables) {
  if (static_cast<int>(variables.size()) != z.num_variables())
    throw std::invalid_argument("decode_categories: variable count mismatch");
  std::vector<std::vector<int>> cells(z.rows(), std::vector<int>(z.num_variables()));
  for (int i = 0; i < z.rows(); ++i) {
    for (int k = 0; k < z.num_variables(); ++k) {
      const auto& s = z.span(k);
      int hot = -1;
      for (int j = s.begin; j < s.end(); ++j) {
        double v = z.values()(i, j);
        if (v == 1.0) {
          if (hot >= 0) throw std::invalid_argument("fuzzy row requires coin_flip");
          hot = j - s.begin;
        } else if (v != 0.0) {
          throw std::invalid_argument("fuzzy row requires coin_flip");
        }
      }
      if (hot < 0) throw std::invalid_argument("fuzzy row requires coin_flip");
      cells[i][k] = hot;
    }
  }
  return CategoricalTable(variables, std::move(cells));
}

Eigen::VectorXd column_proportions(const IndicatorMatrix& z,
                                   const Eigen::VectorXd& row_weights) {
  if (row_weights.size() != z.rows())
    throw std::invalid_argument("column_proportions: weight length mismatch");
  if (row_weights.minCoeff() < 0.0)
    throw std::invalid_argument("column_proportions: negative row weight");
  const double total = row_weights.sum();
  if (!(total > 0.0))
    throw std::invalid_argument("column_proportions: all-zero row weights");
  Eigen::VectorXd p = z.values().transpose() * row_weights / total;
  // spans are renormalized so each sums to exactly 1
  for (const auto& s : z.spans()) {
    double sum = p.segment(s.begin, s.size).sum();
    if (sum > 0.0) p.segment(s.begin, s.size) /= sum;
  }
  return p;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, delim)) fields.push_back(field);
  if (!line.empty() && line.back() == delim) fields.push_back("");
  return fields;
}

}  // namespace

CategoricalTable parse_table(const std::string& text, const TableIoOptions& opts) {
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line))
    throw std::invalid_argument("empty table: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> names = split_line(line, opts.delimiter);
  const int k = static_cast<int>(names.size());
  if (k == 0) throw std::invalid_argument("empty header row");

  std::vector<VariableMeta> variables(k);
  for (int j = 0; j < k; ++j) variables[j].name = names[j];

  std::vector<std::vector<int>> cells;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line, opts.delimiter);
    if (static_cast<int>(fields.size()) != k)
      throw std::invalid_argument("ragged row: expected " + std::to_string(k) +
                                  " fields, got " + std::to_string(fields.size()));
    std::vector<int> row(k);
    for (int j = 0; j < k; ++j) {
      if (fields[j] == opts.missing_token) {
        row[j] = kMissing;
        continue;
      }
      int idx = variables[j].label_index(fields[j]);
      if (idx < 0) {
        idx = variables[j].num_categories();
        variables[j].labels.push_back(fields[j]);
      }
      row[j] = idx;
    }
    cells.push_back(std::move(row));
  }
  for (const auto& v : variables) {
    if (v.labels.empty())
      throw std::invalid_argument("empty column '" + v.name + "'");
    if (v.labels.size() < 2)
      throw std::invalid_argument("constant variable '" + v.name + "'");
  }
  return CategoricalTable(std::move(variables), std::move(cells));
}

CategoricalTable read_table(const std::string& path, const TableIoOptions& opts) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_table(buffer.str(), opts);
}

std::string format_table(const CategoricalTable& table, const TableIoOptions& opts) {
  std::ostringstream out;
  for (int k = 0; k < table.num_variables(); ++k) {
    if (k) out << opts.delimiter;
    out << table.variable(k).name;
  }
  out << '\n';
  for (int i = 0; i < table.rows(); ++i) {
    for (int k = 0; k < table.num_variables(); ++k) {
      if (k) out << opts.delimiter;
      if (table.is_missing(i, k))
        out << opts.missing_token;
      else
        out << table.variable(k).labels[table.cell(i, k)];
    }
    out << '\n';
  }
  return out.str();
}

void write_table(const CategoricalTable& table, const std::string& path,
                 const TableIoOptions& opts) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  file << format_table(table, opts);
}

}  // namespace mimca
