#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mlkit/measure.hpp"
#include "mlkit/model.hpp"

namespace mlkit {

enum class ResampleMethod { Holdout, CV, LOO, RepCV, Subsample, Bootstrap };

std::string resample_method_name(ResampleMethod m);
ResampleMethod resample_method_from_name(const std::string& name);

enum class PredictSet { Test, Train, Both };

struct ResampleDesc {
  ResampleMethod method = ResampleMethod::CV;
  int iters = 10;   // CV folds / Subsample & Bootstrap iterations / RepCV folds
  int reps = 10;    // RepCV only
  double split = 2.0 / 3.0;  // Holdout / Subsample
  bool stratify = false;
  std::vector<std::string> stratify_cols;
  PredictSet predict = PredictSet::Test;

  std::string name() const;
  int total_iters(int size) const;  // LOO needs the data size
};

struct ResampleDescOpts {
  double split = -1.0;
  int reps = -1;
  bool stratify = false;
  std::vector<std::string> stratify_cols;
  std::string predict = "test";
};

ResampleDesc make_resample_desc(const std::string& method, int iters = 0,
                                const ResampleDescOpts& opts = {});

struct ResampleInstance {
  ResampleDesc desc;
  int size = 0;
  std::vector<std::vector<int>> train_inds;  // 1-based; Bootstrap: multisets
  std::vector<std::vector<int>> test_inds;

  int iters() const { return static_cast<int>(train_inds.size()); }
};

ResampleInstance make_resample_instance(const ResampleDesc& desc, int size,
                                        Rng rng = Rng(1));
ResampleInstance make_resample_instance(const ResampleDesc& desc,
                                        const Task& task, Rng rng = Rng(1));

ResampleInstance make_fixed_holdout_instance(std::vector<int> train_inds,
                                             std::vector<int> test_inds,
                                             int size);

struct ResampleOpts {
  std::vector<Measure> measures;  // empty: task default
  bool models = false;
  bool keep_pred = true;
  std::string extract;  // named extractor applied to each iteration model
  std::function<json(const ModelPtr&)> extract_fn;
};

struct ResampleResult {
  std::string task_id;
  std::string learner_id;
  std::vector<Measure> measures;
  std::vector<std::vector<double>> perf_test;   // [iter][measure]
  std::vector<std::vector<double>> perf_train;  // missing entries when unused
  std::vector<std::pair<std::string, double>> aggr;
  Prediction pred;  // merged; empty when keep_pred=false
  bool has_pred = false;
  std::vector<ModelPtr> models;
  std::vector<json> extracts;
  std::vector<std::string> err_msgs;  // one per iteration ("" = ok)
  double runtime = 0.0;
  ResampleInstance instance;

  double aggr_value(const std::string& name) const;
  Table perf_table(bool train = false) const;
};

ResampleResult resample(const LearnerPtr& learner, const Task& task,
                        const ResampleDesc& desc, const ResampleOpts& opts = {},
                        Rng rng = Rng(1));
ResampleResult resample(const LearnerPtr& learner, const Task& task,
                        const ResampleInstance& instance,
                        const ResampleOpts& opts = {}, Rng rng = Rng(1));

// named extractors usable from the CLI: tune_result, featsel_result,
// feat_importance
std::function<json(const ModelPtr&)> named_extractor(const std::string& name);
void register_extractor(const std::string& name,
                        std::function<json(const ModelPtr&)> fn);

}  // namespace mlkit
