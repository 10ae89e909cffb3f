#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mlkit/dataset.hpp"
#include "mlkit/model.hpp"
#include "mlkit/rng.hpp"

namespace mlkit {

struct ImputeControl;

using ImputeApplyHook = std::function<void(const ImputeControl&, Dataset&,
                                           const std::string& col, Rng&)>;

// Per-column learned state; the apply hook is what reimpute replays.
struct ImputeControl {
  std::string method;
  json args;  // method-specific (fill value, hist pool, locf runs, ...)
  ModelPtr model;
  std::vector<std::string> model_features;
  std::vector<std::string> train_levels;  // factor columns only
  std::string train_mode;                 // fallback label for unseen levels
  ImputeApplyHook apply;
};

struct ImputeMethod {
  std::string name;
  std::function<ImputeControl(const Dataset&, const std::string& col,
                              const std::vector<std::string>& targets, Rng&)>
      learn;
  ImputeApplyHook apply;
};

ImputeMethod impute_constant(json value);
ImputeMethod impute_mean();
ImputeMethod impute_median();
ImputeMethod impute_mode();
ImputeMethod impute_hist();
ImputeMethod impute_learner(const std::string& class_name);
ImputeMethod impute_locf();
ImputeMethod impute_method_from_name(const std::string& name);

// extension point: learn produces a json control, apply fills the column
ImputeMethod make_impute_method(
    std::function<json(const Dataset&, const std::string& col)> learn_fn,
    std::function<void(const json&, Dataset&, const std::string& col)> apply_fn);

struct ImputationDesc {
  std::vector<std::string> targets;
  std::vector<std::pair<std::string, ImputeControl>> controls;
  std::vector<std::string> dummy_cols;
  std::string dummy_type = "factor";  // factor | numeric
  bool impute_new_levels = true;
  bool recode_factor_levels = true;
};

struct ImputeOpts {
  std::map<std::string, ImputeMethod> cols;     // per-column method
  std::map<std::string, ImputeMethod> classes;  // per column kind name
  std::vector<std::string> dummy_cols;
  std::vector<std::string> dummy_classes;  // column kinds that get dummies
  std::string dummy_type = "factor";
  bool impute_new_levels = true;
  bool recode_factor_levels = true;
};

struct ImputeResult {
  Dataset data;
  ImputationDesc desc;
};

ImputeResult impute(const Dataset& data,
                    const std::vector<std::string>& targets,
                    const ImputeOpts& opts, Rng rng = Rng(1));

Dataset reimpute(const Dataset& data, const ImputationDesc& desc,
                 Rng rng = Rng(1));

LearnerPtr make_impute_wrapper(const LearnerPtr& learner,
                               const ImputeOpts& opts);

}  // namespace mlkit
