#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlkit/measure.hpp"
#include "mlkit/model.hpp"
#include "mlkit/resample.hpp"
#include "mlkit/task.hpp"

namespace mlkit {

struct TuneControl {
  std::string method = "grid";  // grid | random
  int resolution = 10;          // grid points per bounded numeric param
  int maxit = 100;              // random-search draws
  // value recorded for the first measure when an evaluation fails;
  // defaults to that measure's worst
  std::optional<double> impute_val;
  bool tune_threshold = false;
};

struct OptPathRow {
  ParamMap x;  // original (untransformed) scale, inactive params absent
  std::vector<double> y;  // aggregated value per measure
  int dob = 0;            // 1-based evaluation index
  std::string error_message;
  double exec_time = 0.0;
};

struct OptPath {
  ParamSet param_set;
  std::vector<std::string> par_ids;
  std::vector<std::string> measure_names;  // aggregated names, e.g. mmce.test.mean
  std::vector<OptPathRow> rows;

  Table as_table(bool trafo = false, bool include_diagnostics = true) const;
  std::string to_csv() const;
  json to_json() const;
};

OptPath opt_path_from_json(const json& j);

struct TuneResult {
  ParamMap x;        // best config, original scale
  ParamMap x_trafo;  // best config as the learner saw it
  std::vector<std::pair<std::string, double>> y;
  OptPath opt_path;
  std::vector<double> threshold;  // nonempty iff threshold tuning ran
  double threshold_value = kMissing;

  json to_json() const;
};

TuneResult tune_result_from_json(const json& j);

struct TuneMultiCritResult {
  std::vector<ParamMap> pareto_x;
  std::vector<ParamMap> pareto_x_trafo;
  std::vector<std::vector<double>> pareto_y;
  OptPath opt_path;
};

TuneResult tune_params(const LearnerPtr& learner, const Task& task,
                       const ResampleDesc& desc, const ParamSet& param_set,
                       const TuneControl& control,
                       std::vector<Measure> measures = {}, Rng rng = Rng(1));

struct ThresholdTuneResult {
  std::vector<double> threshold;
  double value = kMissing;
};

// binary: 1001-point sweep of the positive-class threshold; multiclass:
// seeded Dirichlet(1,...,1) random search over the simplex
ThresholdTuneResult tune_threshold(const Prediction& pred,
                                   const Measure& measure, int ndraws = 5000,
                                   Rng rng = Rng(1));

TuneMultiCritResult tune_params_multicrit(
    const LearnerPtr& learner, const Task& task, const ResampleDesc& desc,
    const ParamSet& param_set, const TuneControl& control,
    std::vector<Measure> measures, Rng rng = Rng(1));

// dominance under each measure's minimize flag; returns indices of the
// non-dominated rows, equal vectors collapsed to their first occurrence
std::vector<int> pareto_front_indices(const std::vector<std::vector<double>>& ys,
                                      const std::vector<bool>& minimize);

LearnerPtr make_model_multiplexer(const std::vector<LearnerPtr>& learners);
ParamSet make_model_multiplexer_param_set(const LearnerPtr& multiplexer,
                                          const std::vector<Param>& params);

Table hyperpars_effect_data(const TuneResult& result, bool trafo = false,
                            bool include_diagnostics = false);
// nested variant: reads per-outer-iteration tune_result extracts
Table hyperpars_effect_data(const ResampleResult& nested, bool trafo = false,
                            bool include_diagnostics = false,
                            const ParamSet* param_set = nullptr);

}  // namespace mlkit
