#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mlkit/model.hpp"
#include "mlkit/task.hpp"
#include "mlkit/tune.hpp"

namespace mlkit {

LearnerPtr make_bagging_wrapper(const LearnerPtr& learner, int bw_iters = 10,
                                bool bw_replace = true,
                                std::optional<double> bw_size = std::nullopt,
                                double bw_feats = 2.0 / 3.0);

LearnerPtr make_overbagging_wrapper(const LearnerPtr& learner, double obw_rate,
                                    int obw_iters = 10,
                                    const std::string& obw_maxcl = "all");

// cl defaults to the minority (oversample) / majority (undersample) class
Task oversample(const Task& task, double rate, const std::string& cl = "",
                Rng rng = Rng(1));
Task undersample(const Task& task, double rate, const std::string& cl = "",
                 Rng rng = Rng(1));
LearnerPtr make_oversample_wrapper(const LearnerPtr& learner, double osw_rate,
                                   const std::string& osw_cl = "");
LearnerPtr make_undersample_wrapper(const LearnerPtr& learner, double usw_rate,
                                    const std::string& usw_cl = "");

Task smote(const Task& task, double rate, int nn = 5, Rng rng = Rng(1));
LearnerPtr make_smote_wrapper(const LearnerPtr& learner, double sw_rate,
                              int sw_nn = 5);

LearnerPtr make_weighted_classes_wrapper(const LearnerPtr& learner,
                                         double wcw_weight);
LearnerPtr make_weighted_classes_wrapper(const LearnerPtr& learner,
                                         const std::vector<double>& wcw_weight);

struct PreprocTrainOut {
  Dataset data;
  json control;
};
using PreprocTrainFn = std::function<PreprocTrainOut(
    const Dataset&, const std::vector<std::string>& targets,
    const ParamMap& args)>;
using PreprocPredictFn = std::function<Dataset(
    const Dataset&, const std::vector<std::string>& targets,
    const ParamMap& args, const json& control)>;

LearnerPtr make_preproc_wrapper(const LearnerPtr& learner,
                                PreprocTrainFn train_fn,
                                PreprocPredictFn predict_fn,
                                const ParamSet& par_set = {},
                                const ParamMap& par_vals = {});

LearnerPtr make_preproc_wrapper_scale(const LearnerPtr& learner,
                                      bool center = true, bool scale = true);
LearnerPtr make_preproc_wrapper_pca(
    const LearnerPtr& learner, std::optional<double> thresh = std::nullopt,
    std::optional<int> n_comp = std::nullopt);

Task downsample(const Task& task, double perc, Rng rng = Rng(1));
LearnerPtr make_downsample_wrapper(const LearnerPtr& learner, double dw_perc);

LearnerPtr make_tune_wrapper(const LearnerPtr& learner,
                             const ResampleDesc& desc,
                             const ParamSet& param_set,
                             const TuneControl& control,
                             std::vector<Measure> measures = {});
TuneResult get_tune_result(const ModelPtr& model);

}  // namespace mlkit
