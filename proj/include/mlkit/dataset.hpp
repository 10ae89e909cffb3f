#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlkit/matrix.hpp"

namespace mlkit {

enum class ColKind { Numeric, Factor, Ordered, Logical };

std::string col_kind_name(ColKind k);
ColKind col_kind_from_name(const std::string& name);

// One typed column. Storage is uniformly double: factor/ordered cells hold
// the 0-based level index, logical cells hold 0/1, and NaN marks missing.
struct FeatureColumn {
  std::string name;
  ColKind kind = ColKind::Numeric;
  std::vector<double> values;
  std::vector<std::string> levels;  // factor kinds only

  bool is_factor_like() const {
    return kind == ColKind::Factor || kind == ColKind::Ordered;
  }
  bool missing(int i) const { return is_missing(values[i]); }
  int size() const { return static_cast<int>(values.size()); }
  bool has_missings() const;

  // Level label of cell i; requires a factor kind and a non-missing cell.
  const std::string& level_of(int i) const;
  int level_index(const std::string& label) const;  // -1 if unknown

  // Printable cell value ("NA" when missing).
  std::string cell_string(int i) const;

  int count_distinct_non_missing() const;
};

// Column-ordered tabular container. Rows are implicitly numbered 1..n.
struct Dataset {
  std::vector<FeatureColumn> columns;
  int n_rows = 0;

  int ncol() const { return static_cast<int>(columns.size()); }
  int col_index(const std::string& name) const;  // -1 if absent
  const FeatureColumn& col(const std::string& name) const;
  FeatureColumn& col(const std::string& name);
  bool has_col(const std::string& name) const {
    return col_index(name) >= 0;
  }
  std::vector<std::string> col_names() const;

  // New dataset with the given 0-based rows (duplicates allowed).
  Dataset select_rows(const std::vector<int>& rows) const;
  Dataset select_cols(const std::vector<std::string>& names) const;

  void add_column(FeatureColumn col);
  void validate() const;

  std::string to_csv() const;
};

// CSV ingestion. Missing marker: empty cell or literal "NA". Column kinds
// are inferred (logical -> numeric -> factor) unless overridden by schema.
Dataset load_dataset(const std::string& path,
                     const std::map<std::string, ColKind>& schema = {});

Dataset parse_csv_dataset(const std::string& text,
                          const std::map<std::string, ColKind>& schema = {});

// Builder helpers used widely in tests and synthetic-data code.
FeatureColumn numeric_column(std::string name, std::vector<double> values);
FeatureColumn factor_column(std::string name,
                            const std::vector<std::string>& labels,
                            std::vector<std::string> levels = {});
FeatureColumn logical_column(std::string name, const std::vector<int>& flags);

}  // namespace mlkit
