#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mlkit/model.hpp"
#include "mlkit/task.hpp"

namespace mlkit {

struct FilterInfo {
  std::string name;
  std::set<std::string> task_kinds;  // task kind names the filter supports
  // score for one feature; kMissing when the feature kind is unsupported
  std::function<double(const Task&, const std::string& feature)> fn;
};

struct FilterValues {
  std::string task_id;
  std::vector<std::string> methods;
  std::vector<std::string> names;  // feature names, task order
  std::vector<std::string> kinds;  // feature column kinds
  std::vector<std::vector<double>> scores;  // [feature][method]

  double score(const std::string& feature, const std::string& method) const;
  Table as_table() const;  // name, type, one column per method
  std::string to_csv() const;
};

FilterValues filter_values(const Task& task,
                           const std::vector<std::string>& methods);

void register_filter(FilterInfo info);
std::vector<std::string> list_filters();
const FilterInfo& get_filter(const std::string& name);

struct FilterFeaturesOpts {
  std::string method;  // empty: use precomputed values
  const FilterValues* values = nullptr;
  std::optional<int> abs;
  std::optional<double> perc;
  std::optional<double> threshold;
};

Task filter_features(const Task& task, const FilterFeaturesOpts& opts);

LearnerPtr make_filter_wrapper(const LearnerPtr& learner,
                               const std::string& method,
                               std::optional<int> abs = std::nullopt,
                               std::optional<double> perc = std::nullopt,
                               std::optional<double> threshold = std::nullopt);

std::vector<std::string> get_filtered_features(const ModelPtr& model);

// shared by chi.squared / information.gain: 10 equal-width bins over the
// observed range (factor kinds use their level codes); missing cells land in
// their own extra bin
std::vector<int> bin_feature(const FeatureColumn& col, int nbins = 10);

}  // namespace mlkit
