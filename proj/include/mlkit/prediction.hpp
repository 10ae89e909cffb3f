#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlkit/matrix.hpp"
#include "mlkit/table.hpp"
#include "mlkit/task.hpp"

namespace mlkit {

enum class PredictType { Response, Prob, SE };

std::string predict_type_name(PredictType t);
PredictType predict_type_from_name(const std::string& name);

// Row-aligned prediction container for every task kind. Which fields are
// populated depends on the task kind; absent vectors mean "column absent".
// Missing markers: -1 (class codes), NaN (numbers), 255 (label flags).
struct Prediction {
  TaskKind task_kind = TaskKind::Classif;
  PredictType predict_type = PredictType::Response;

  std::vector<std::string> class_levels;  // classes / cluster ids / label names
  std::string positive;                   // binary classif

  std::vector<int> ids;  // 1-based task row ids; empty when from newdata

  std::vector<int> truth_cls;
  std::vector<double> truth_num;
  std::vector<std::uint8_t> truth_lbl;  // n x L, row-major

  std::vector<int> response_cls;
  std::vector<double> response_num;
  std::vector<std::uint8_t> response_lbl;

  Matrix prob;  // n x K; classif class probs / cluster memberships / label probs
  std::vector<double> se;

  std::vector<int> iters;               // resample iteration per row
  std::vector<std::uint8_t> on_train;   // 1 = train-set row

  std::vector<double> threshold;  // per class-level; empty until prob predicted
  double predict_time = kMissing;

  int n() const;
  bool has_truth() const;
  int n_classes() const { return static_cast<int>(class_levels.size()); }
  int positive_index() const;
  int level_index(const std::string& label) const;

  // Positive-class probabilities (binary classif convenience).
  std::vector<double> prob_of(const std::string& label) const;

  // Row subset (0-based positions), preserving all populated columns.
  Prediction select(const std::vector<int>& positions) const;
  // Positions of test-set rows of the given iteration (-1 = any iteration).
  std::vector<int> test_positions(int iter = -1) const;

  Table as_table() const;
  std::string to_csv() const;
};

// Re-thresholds a prob prediction: response_c = argmax prob_c / threshold_c
// (binary: positive iff prob_pos >= t_pos/(t_pos+t_neg)).
Prediction set_threshold(const Prediction& pred, const std::vector<double>& threshold);
Prediction set_threshold(const Prediction& pred, double positive_threshold);

// default threshold: 0.5 on the positive class for binary, uniform otherwise
std::vector<double> default_threshold(int n_classes, int positive_index);

// response codes from a probability matrix under a threshold vector; binary
// predicts positive iff prob_pos >= t_pos/(t_pos+t_neg), otherwise the
// division rule argmax_c prob_c/t_c with lowest-index ties
std::vector<int> prob_to_response(const Matrix& prob,
                                  const std::vector<double>& threshold,
                                  int positive_index);

struct ConfusionMatrix {
  std::vector<std::string> levels;
  Matrix absolute;            // rows = true, cols = predicted
  std::vector<double> err_row;
  std::vector<double> err_col;
  Matrix relative_row;  // filled when relative requested
  Matrix relative_col;
  bool relative = false;
  bool sums = false;
  std::vector<double> row_sums;  // true-class counts (when sums)
  std::vector<double> col_sums;  // predicted-class counts
  double n = 0;

  std::string to_string() const;
};

ConfusionMatrix confusion_matrix(const Prediction& pred, bool relative = false,
                                 bool sums = false);

struct RocMeasures {
  double tpr, fnr, fpr, tnr;
  double ppv, for_, fdr, npv;
  double lrp, lrm, acc, dor;
  double tp, fn, fp, tn;

  Table as_table() const;
};

// Binary confusion-derived rate table; zero denominators yield NaN.
RocMeasures roc_measures(const Prediction& pred);

// Concatenation for resample result merging (same schema required).
Prediction concat_predictions(const std::vector<Prediction>& parts);

}  // namespace mlkit
