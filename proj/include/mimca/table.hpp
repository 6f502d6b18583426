#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace mimca {

constexpr int kMissing = -1;

struct VariableMeta {
  std::string name;
  std::vector<std::string> labels;  // q_k category labels, first-appearance order

  int num_categories() const { return static_cast<int>(labels.size()); }
  int label_index(const std::string& label) const;  // -1 if absent
};

// Rectangular table of category codes with explicit missing cells.
class CategoricalTable {
 public:
  CategoricalTable() = default;
  CategoricalTable(std::vector<VariableMeta> variables,
                   std::vector<std::vector<int>> cells);

  int rows() const { return static_cast<int>(cells_.size()); }
  int num_variables() const { return static_cast<int>(variables_.size()); }
  const std::vector<VariableMeta>& variables() const { return variables_; }
  const VariableMeta& variable(int k) const { return variables_[k]; }
  int variable_index(const std::string& name) const;  // -1 if absent

  int cell(int i, int k) const { return cells_[i][k]; }
  void set_cell(int i, int k, int value);
  bool is_missing(int i, int k) const { return cells_[i][k] == kMissing; }
  bool row_complete(int i) const;
  bool complete() const;

  // total number of indicator columns J = sum of q_k
  int indicator_columns() const;

  double missing_fraction() const;

 private:
  void validate() const;

  std::vector<VariableMeta> variables_;
  std::vector<std::vector<int>> cells_;  // I x K, kMissing marks a hole
};

// Real-valued disjunctive table Z with per-variable column spans and
// missing mask W. May be fuzzy after imputation.
struct ColumnSpan {
  int begin = 0;
  int size = 0;
  int end() const { return begin + size; }
};

class IndicatorMatrix {
 public:
  IndicatorMatrix() = default;
  IndicatorMatrix(Eigen::MatrixXd values, Eigen::MatrixXd mask,
                  std::vector<ColumnSpan> spans);

  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }
  int num_variables() const { return static_cast<int>(spans_.size()); }

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }
  const Eigen::MatrixXd& mask() const { return mask_; }
  const std::vector<ColumnSpan>& spans() const { return spans_; }
  const ColumnSpan& span(int k) const { return spans_[k]; }

  bool cell_observed(int i, int k) const { return mask_(i, spans_[k].begin) > 0.5; }
  bool all_observed() const;

 private:
  std::vector<ColumnSpan> spans_;
  Eigen::MatrixXd values_;  // I x J
  Eigen::MatrixXd mask_;    // I x J, 1 observed / 0 missing, constant per span
};

// One-hot expansion; missing cells hold 0 with mask 0 across their span.
IndicatorMatrix encode_disjunctive(const CategoricalTable& table);

// Inverse of encode_disjunctive; requires every span crisp one-hot.
CategoricalTable decode_categories(const IndicatorMatrix& z,
                                   const std::vector<VariableMeta>& variables);

// Weighted column proportions; each variable span sums to 1. Requires z
// fully specified (post-initialization) and weights with positive sum.
Eigen::VectorXd column_proportions(const IndicatorMatrix& z,
                                   const Eigen::VectorXd& row_weights);

struct TableIoOptions {
  char delimiter = ',';
  std::string missing_token = "NA";
};

CategoricalTable read_table(const std::string& path, const TableIoOptions& opts = {});
CategoricalTable parse_table(const std::string& text, const TableIoOptions& opts = {});
void write_table(const CategoricalTable& table, const std::string& path,
                 const TableIoOptions& opts = {});
std::string format_table(const CategoricalTable& table, const TableIoOptions& opts = {});

}  // namespace mimca
