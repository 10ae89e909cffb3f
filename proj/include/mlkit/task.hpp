#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlkit/dataset.hpp"
#include "mlkit/matrix.hpp"

namespace mlkit {

enum class TaskKind { Classif, Regr, Cluster, Multilabel, CostSens };

std::string task_kind_name(TaskKind k);
TaskKind task_kind_from_name(const std::string& name);

// A dataset plus the problem descriptor. Immutable after construction; all
// modifiers return a new Task.
struct Task {
  std::string id;
  TaskKind kind = TaskKind::Classif;
  Dataset data;
  std::vector<std::string> targets;  // empty for cluster/costsens
  std::string positive;              // binary classif only
  std::string negative;
  Matrix cost_matrix;                     // costsens: n x K
  std::vector<std::string> cost_classes;  // costsens class labels
  std::vector<double> weights;            // empty = no weights

  int n_rows() const { return data.n_rows; }
  bool is_target(const std::string& name) const;
  std::vector<std::string> feature_names() const;
  const FeatureColumn& target_col() const;  // single-target kinds
  // Class labels: classif -> target levels; costsens -> cost columns.
  std::vector<std::string> class_levels() const;
  int n_classes() const;
};

struct TaskDesc {
  std::string id;
  TaskKind kind = TaskKind::Classif;
  std::vector<std::string> targets;
  int size = 0;
  int n_feat_numeric = 0;
  int n_feat_factor = 0;
  int n_feat_ordered = 0;
  int n_feat_logical = 0;
  bool has_missings = false;
  bool has_weights = false;
  std::vector<std::string> class_levels;
  std::vector<int> class_counts;
  std::string positive;
  std::string negative;
};

struct MakeTaskOptions {
  std::string id;
  std::string positive;
  Matrix cost_matrix;
  std::vector<std::string> cost_classes;
  std::vector<double> weights;
};

Task make_task(TaskKind kind, Dataset data, std::vector<std::string> targets,
               MakeTaskOptions opts = {});

TaskDesc task_desc(const Task& task);

// Row/feature subsetting; 1-based row indices, duplicates allowed.
Task subset_task(const Task& task, const std::vector<int>& rows = {},
                 const std::vector<std::string>& features = {});

Task subset_task_rows0(const Task& task, const std::vector<int>& rows0);

struct ConstantFeatureReport {
  Task task;
  std::vector<std::string> removed;
};
ConstantFeatureReport remove_constant_features(const Task& task);

enum class NormalizeMethod { Range, Standardize };
Task normalize_features(const Task& task,
                        NormalizeMethod method = NormalizeMethod::Standardize,
                        double lo = 0.0, double hi = 1.0);

Task create_dummy_features(const Task& task);

Task drop_features(const Task& task, const std::vector<std::string>& names);

// Replaces the dataset, keeping descriptor fields; validates consistency.
Task with_data(const Task& task, Dataset data);

}  // namespace mlkit
