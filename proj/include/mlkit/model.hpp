#pragma once

#include <any>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mlkit/learner.hpp"
#include "mlkit/prediction.hpp"
#include "mlkit/task.hpp"

namespace mlkit {

struct WrappedModel {
  LearnerPtr learner;
  std::any state;  // algorithm-specific; empty for failure models
  TaskDesc task_desc;
  std::vector<int> subset;            // 1-based training rows
  std::vector<std::string> features;  // feature names seen at fit time
  std::map<std::string, std::vector<std::string>> factor_levels;
  double train_time = 0.0;
  std::string failure_msg;  // non-empty iff training failed under warn
};

ModelPtr train(const LearnerPtr& learner, const Task& task,
               const std::vector<int>& subset = {},
               const std::vector<double>& weights = {}, Rng rng = Rng(1));

bool is_failure_model(const WrappedModel& model);
bool is_failure_model(const ModelPtr& model);
std::string get_failure_message(const WrappedModel& model);

Prediction predict(const ModelPtr& model, const Task& task,
                   const std::vector<int>& subset = {}, Rng rng = Rng(1));
Prediction predict_newdata(const ModelPtr& model, const Dataset& newdata,
                           Rng rng = Rng(1));

// predict hook entry point used by wrappers: newdata columns are re-encoded
// against the model's factor-level snapshot, then the learner hook runs.
RawPrediction raw_predict(const WrappedModel& model, const Dataset& newdata,
                          Rng& rng);

std::map<std::string, double> get_feature_importance(const ModelPtr& model);

}  // namespace mlkit
