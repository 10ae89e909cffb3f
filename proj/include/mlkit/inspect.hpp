#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mlkit/benchmark.hpp"

namespace mlkit {

// ---- threshold sweeps ----
// One row per threshold in {0, 1/(gridsize-1), ..., 1}; columns = measure ids
// plus "threshold". ROC curves are the (fpr, tpr) column pair.

Table thresh_vs_perf_data(const Prediction& pred,
                          const std::vector<Measure>& measures,
                          int gridsize = 100);
// aggregate=true applies each measure's aggregation across iterations per
// threshold; aggregate=false emits one row set per iteration ("iter" column).
Table thresh_vs_perf_data(const ResampleResult& res,
                          const std::vector<Measure>& measures,
                          int gridsize = 100, bool aggregate = true);
// single-task benchmark; adds a "learner" column
Table thresh_vs_perf_data(const BenchmarkResult& bmr,
                          const std::vector<Measure>& measures,
                          int gridsize = 100, bool aggregate = true);

// ---- calibration ----

struct CalibrationBreaks {
  std::string rule;          // "" or "sturges"; default: 10 equal-width bins
  int bins = 0;              // equal-width bin count on [0, 1]
  std::vector<double> cuts;  // explicit cut points; overrides rule/bins
};

struct CalibrationData {
  Table proportions;  // Learner, bin, Class, Proportion
  Table rag;          // Learner, Probability, Correct
};

CalibrationData calibration_data(
    const std::vector<std::pair<std::string, Prediction>>& preds,
    const CalibrationBreaks& breaks = {}, int groups = 0);
CalibrationData calibration_data(const Prediction& pred,
                                 const CalibrationBreaks& breaks = {},
                                 int groups = 0);

// ---- learning curves ----
// Long format: learner, perc, measure (aggregation name), value. Each learner
// is wrapped in a downsample wrapper; a fresh perc-fraction of every training
// split is drawn per iteration and performance measured on the full test set.

std::vector<double> default_percs();

Table learning_curve_data(const std::vector<LearnerPtr>& learners,
                          const Task& task,
                          const std::vector<double>& percs = {},
                          std::vector<Measure> measures = {},
                          const ResampleDesc& resampling = ResampleDesc{},
                          Rng rng = Rng(1));
Table learning_curve_data(const std::vector<LearnerPtr>& learners,
                          const Task& task, const std::vector<double>& percs,
                          std::vector<Measure> measures,
                          const ResampleInstance& resampling, Rng rng = Rng(1));

// ---- partial dependence / ICE ----

struct PartialDependenceOpts {
  bool interaction = false;
  int gridsize = 10;
  std::map<std::string, double> fmin;  // per-feature grid overrides
  std::map<std::string, double> fmax;
  // mean | median | var | quantile (quantile emits lower/value/upper)
  std::string fun = "mean";
  std::vector<double> quantiles = {0.25, 0.5, 0.75};
  bool individual = false;
  std::map<std::string, double> center;  // feature -> value; needs individual
  bool derivative = false;
  // se-capable models add value + bounds * mean(se) interval columns
  std::pair<double, double> bounds = {-1.96, 1.96};
};

Table partial_dependence_data(const ModelPtr& model, const Dataset& input,
                              const std::vector<std::string>& features,
                              const PartialDependenceOpts& opts = {});
Table partial_dependence_data(const ModelPtr& model, const Task& input,
                              const std::vector<std::string>& features,
                              const PartialDependenceOpts& opts = {});

// ---- functional ANOVA ----
// Effects of all size-depth subsets of features on a regression model; size-1
// effects equal the partial dependence, higher orders remove lower-order
// terms. Effect label joins feature names with ':'.

Table functional_anova_data(const ModelPtr& model, const Dataset& input,
                            const std::vector<std::string>& features,
                            int depth = 1, const std::string& fun = "mean",
                            int gridsize = 10);
Table functional_anova_data(const ModelPtr& model, const Task& input,
                            const std::vector<std::string>& features,
                            int depth = 1, const std::string& fun = "mean",
                            int gridsize = 10);

}  // namespace mlkit
