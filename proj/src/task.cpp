#include "mlkit/task.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mlkit/error.hpp"

namespace mlkit {

std::string task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::Classif: return "classif";
    case TaskKind::Regr: return "regr";
    case TaskKind::Cluster: return "cluster";
    case TaskKind::Multilabel: return "multilabel";
    case TaskKind::CostSens: return "costsens";
  }
  return "?";
}

TaskKind task_kind_from_name(const std::string& name) {
  if (name == "classif") return TaskKind::Classif;
  if (name == "regr") return TaskKind::Regr;
  if (name == "cluster") return TaskKind::Cluster;
  if (name == "multilabel") return TaskKind::Multilabel;
  if (name == "costsens") return TaskKind::CostSens;
  throw ValueError("unknown task kind: " + name);
}

bool Task::is_target(const std::string& name) const {
  return std::find(targets.begin(), targets.end(), name) != targets.end();
}

std::vector<std::string> Task::feature_names() const {
  std::vector<std::string> out;
  for (const auto& c : data.columns)
    if (!is_target(c.name)) out.push_back(c.name);
  return out;
}

const FeatureColumn& Task::target_col() const {
  if (targets.size() != 1)
    throw ValueError("task '" + id + "' does not have a single target");
  return data.col(targets[0]);
}

std::vector<std::string> Task::class_levels() const {
  switch (kind) {
    case TaskKind::Classif: return target_col().levels;
    case TaskKind::CostSens: return cost_classes;
    case TaskKind::Multilabel: return targets;
    default: return {};
  }
}

int Task::n_classes() const {
  return static_cast<int>(class_levels().size());
}

namespace {

void check_weights(const std::vector<double>& weights, int n) {
  if (weights.empty()) return;
  if (static_cast<int>(weights.size()) != n)
    throw ValueError("weights length does not match number of rows");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ValueError("weights must be finite and nonnegative");
}

}  // namespace

Task make_task(TaskKind kind, Dataset data, std::vector<std::string> targets,
               MakeTaskOptions opts) {
  data.validate();
  Task t;
  t.id = opts.id.empty() ? "task" : opts.id;
  t.kind = kind;
  t.data = std::move(data);
  t.targets = std::move(targets);
  t.weights = std::move(opts.weights);
  check_weights(t.weights, t.data.n_rows);

  for (const auto& tgt : t.targets) {
    if (!t.data.has_col(tgt)) throw ValueError("target column not found: " + tgt);
    if (t.data.col(tgt).has_missings())
      throw ValueError("target column '" + tgt + "' has missing values");
  }

  switch (kind) {
    case TaskKind::Classif: {
      if (t.targets.size() != 1)
        throw ValueError("classif task needs exactly one target");
      const auto& y = t.data.col(t.targets[0]);
      if (!y.is_factor_like())
        throw ValueError("classif target '" + y.name + "' must be a factor");
      if (y.levels.empty()) throw ValueError("classif target has no levels");
      if (y.levels.size() == 2) {
        if (!opts.positive.empty()) {
          if (y.level_index(opts.positive) < 0)
            throw ValueError("positive class '" + opts.positive +
                             "' is not a level of '" + y.name + "'");
          t.positive = opts.positive;
        } else {
          t.positive = y.levels[0];
        }
        t.negative = y.levels[y.levels[0] == t.positive ? 1 : 0];
      } else if (!opts.positive.empty()) {
        throw ValueError("positive class only meaningful for binary tasks");
      }
      break;
    }
    case TaskKind::Regr: {
      if (t.targets.size() != 1)
        throw ValueError("regr task needs exactly one target");
      const auto& y = t.data.col(t.targets[0]);
      if (y.kind != ColKind::Numeric)
        throw ValueError("regr target '" + y.name + "' must be numeric");
      break;
    }
    case TaskKind::Cluster: {
      if (!t.targets.empty())
        throw ValueError("cluster task takes no targets");
      break;
    }
    case TaskKind::Multilabel: {
      if (t.targets.empty())
        throw ValueError("multilabel task needs at least one target");
      for (const auto& tgt : t.targets) {
        if (t.data.col(tgt).kind != ColKind::Logical)
          throw ValueError("multilabel target '" + tgt + "' must be logical");
      }
      break;
    }
    case TaskKind::CostSens: {
      if (!t.targets.empty())
        throw ValueError("costsens task takes no targets");
      if (opts.cost_matrix.empty())
        throw ValueError("costsens task needs a cost matrix");
      if (opts.cost_matrix.rows != t.data.n_rows)
        throw ValueError("cost matrix must have one row per observation");
      if (opts.cost_classes.empty() ||
          static_cast<int>(opts.cost_classes.size()) != opts.cost_matrix.cols)
        throw ValueError("cost matrix needs one named column per class");
      std::set<std::string> uniq(opts.cost_classes.begin(), opts.cost_classes.end());
      if (uniq.size() != opts.cost_classes.size())
        throw ValueError("cost matrix class names must be unique");
      t.cost_matrix = std::move(opts.cost_matrix);
      t.cost_classes = std::move(opts.cost_classes);
      break;
    }
  }
  return t;
}

TaskDesc task_desc(const Task& task) {
  TaskDesc d;
  d.id = task.id;
  d.kind = task.kind;
  d.targets = task.targets;
  d.size = task.n_rows();
  d.has_weights = !task.weights.empty();
  for (const auto& c : task.data.columns) {
    if (c.has_missings()) d.has_missings = true;
    if (task.is_target(c.name)) continue;
    switch (c.kind) {
      case ColKind::Numeric: ++d.n_feat_numeric; break;
      case ColKind::Factor: ++d.n_feat_factor; break;
      case ColKind::Ordered: ++d.n_feat_ordered; break;
      case ColKind::Logical: ++d.n_feat_logical; break;
    }
  }
  d.positive = task.positive;
  d.negative = task.negative;
  d.class_levels = task.class_levels();
  if (task.kind == TaskKind::Classif) {
    const auto& y = task.target_col();
    d.class_counts.assign(y.levels.size(), 0);
    for (int i = 0; i < y.size(); ++i)
      if (!y.missing(i)) ++d.class_counts[static_cast<int>(y.values[i])];
  } else if (task.kind == TaskKind::Multilabel) {
    d.class_counts.assign(task.targets.size(), 0);
    for (std::size_t j = 0; j < task.targets.size(); ++j) {
      const auto& y = task.data.col(task.targets[j]);
      for (int i = 0; i < y.size(); ++i)
        if (!y.missing(i) && y.values[i] != 0.0) ++d.class_counts[j];
    }
  }
  return d;
}

Task subset_task_rows0(const Task& task, const std::vector<int>& rows0) {
  Task out = task;
  out.data = task.data.select_rows(rows0);
  if (!task.weights.empty()) {
    out.weights.clear();
    out.weights.reserve(rows0.size());
    for (int r : rows0) out.weights.push_back(task.weights[r]);
  }
  if (!task.cost_matrix.empty()) {
    Matrix cm(static_cast<int>(rows0.size()), task.cost_matrix.cols);
    for (std::size_t i = 0; i < rows0.size(); ++i)
      for (int c = 0; c < task.cost_matrix.cols; ++c)
        cm.at(static_cast<int>(i), c) = task.cost_matrix.at(rows0[i], c);
    out.cost_matrix = std::move(cm);
  }
  return out;
}

Task subset_task(const Task& task, const std::vector<int>& rows,
                 const std::vector<std::string>& features) {
  Task out = task;
  if (!rows.empty()) {
    std::vector<int> rows0;
    rows0.reserve(rows.size());
    for (int r : rows) {
      if (r < 1 || r > task.n_rows())
        throw ValueError("row index out of range: " + std::to_string(r));
      rows0.push_back(r - 1);
    }
    out = subset_task_rows0(task, rows0);
  }
  if (!features.empty() || !rows.empty()) {
    // Targets are always retained.
    std::vector<std::string> keep;
    if (features.empty()) {
      keep = out.data.col_names();
    } else {
      for (const auto& f : features) {
        if (out.is_target(f))
          throw ValueError("cannot select target column as feature: " + f);
        if (!out.data.has_col(f)) throw ValueError("unknown feature: " + f);
      }
      for (const auto& c : out.data.columns) {
        const bool selected =
            std::find(features.begin(), features.end(), c.name) != features.end();
        if (out.is_target(c.name) || selected) keep.push_back(c.name);
      }
    }
    out.data = out.data.select_cols(keep);
  }
  return out;
}

ConstantFeatureReport remove_constant_features(const Task& task) {
  std::vector<std::string> removed;
  std::vector<std::string> keep;
  for (const auto& c : task.data.columns) {
    if (task.is_target(c.name)) continue;
    if (c.count_distinct_non_missing() < 2)
      removed.push_back(c.name);
    else
      keep.push_back(c.name);
  }
  if (removed.empty()) return {task, {}};
  Task out = task;
  std::vector<std::string> cols;
  for (const auto& c : task.data.columns) {
    if (task.is_target(c.name) ||
        std::find(keep.begin(), keep.end(), c.name) != keep.end())
      cols.push_back(c.name);
  }
  out.data = task.data.select_cols(cols);
  return {std::move(out), std::move(removed)};
}

Task normalize_features(const Task& task, NormalizeMethod method, double lo,
                        double hi) {
  if (method == NormalizeMethod::Range && !(hi > lo))
    throw ValueError("range normalization requires hi > lo");
  Task out = task;
  for (auto& c : out.data.columns) {
    if (out.is_target(c.name) || c.kind != ColKind::Numeric) continue;
    double mn = kMissing, mx = kMissing, sum = 0.0;
    int n = 0;
    for (double v : c.values) {
      if (is_missing(v)) continue;
      mn = is_missing(mn) ? v : std::min(mn, v);
      mx = is_missing(mx) ? v : std::max(mx, v);
      sum += v;
      ++n;
    }
    if (n == 0) continue;
    if (method == NormalizeMethod::Range) {
      const double span = mx - mn;
      for (double& v : c.values) {
        if (is_missing(v)) continue;
        v = span == 0.0 ? lo : lo + (hi - lo) * (v - mn) / span;
      }
    } else {
      const double mean = sum / n;
      double ss = 0.0;
      for (double v : c.values)
        if (!is_missing(v)) ss += (v - mean) * (v - mean);
      const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
      for (double& v : c.values) {
        if (is_missing(v)) continue;
        v = sd == 0.0 ? 0.0 : (v - mean) / sd;
      }
    }
  }
  return out;
}

Task create_dummy_features(const Task& task) {
  Task out = task;
  Dataset nd;
  nd.n_rows = task.n_rows();
  for (const auto& c : task.data.columns) {
    if (task.is_target(c.name) || !c.is_factor_like()) {
      nd.add_column(c);
      continue;
    }
    for (std::size_t l = 0; l < c.levels.size(); ++l) {
      FeatureColumn ind;
      ind.name = c.name + "." + c.levels[l];
      ind.kind = ColKind::Numeric;
      ind.values.reserve(c.values.size());
      for (double v : c.values) {
        ind.values.push_back(is_missing(v)
                                 ? kMissing
                                 : (static_cast<int>(v) == static_cast<int>(l)
                                        ? 1.0
                                        : 0.0));
      }
      nd.add_column(std::move(ind));
    }
  }
  out.data = std::move(nd);
  return out;
}

Task drop_features(const Task& task, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    if (task.is_target(n)) throw ValueError("cannot drop target column: " + n);
    if (!task.data.has_col(n)) throw ValueError("unknown feature: " + n);
  }
  if (names.empty()) return task;
  std::vector<std::string> keep;
  for (const auto& c : task.data.columns)
    if (std::find(names.begin(), names.end(), c.name) == names.end())
      keep.push_back(c.name);
  Task out = task;
  out.data = task.data.select_cols(keep);
  return out;
}

Task with_data(const Task& task, Dataset data) {
  data.validate();
  Task out = task;
  if (data.n_rows != task.n_rows()) {
    if (!task.weights.empty())
      throw ValueError("row count changed; weights no longer match");
    if (!task.cost_matrix.empty())
      throw ValueError("row count changed; cost matrix no longer matches");
  }
  for (const auto& tgt : task.targets)
    if (!data.has_col(tgt))
      throw ValueError("replacement data lost target column: " + tgt);
  out.data = std::move(data);
  return out;
}

}  // namespace mlkit
