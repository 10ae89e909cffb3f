#pragma once

#include <any>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mlkit/matrix.hpp"
#include "mlkit/params.hpp"
#include "mlkit/prediction.hpp"
#include "mlkit/rng.hpp"
#include "mlkit/task.hpp"

namespace mlkit {

struct Learner;
struct WrappedModel;
using LearnerPtr = std::shared_ptr<const Learner>;
using ModelPtr = std::shared_ptr<const WrappedModel>;

enum class OnLearnerError { Stop, Warn };
enum class OnParWithoutDesc { Stop, Warn, Quiet };

struct LearnerConfig {
  OnLearnerError on_learner_error = OnLearnerError::Stop;
  OnParWithoutDesc on_par_without_desc = OnParWithoutDesc::Stop;
  bool show_info = false;
};

// What a fit hook hands back through predict: exactly one of the response
// vectors is filled, matching the learner kind.
struct RawPrediction {
  std::vector<int> response_cls;        // classif / cluster (level codes, -1 missing)
  std::vector<double> response_num;     // regr
  std::vector<std::uint8_t> response_lbl;  // multilabel, n x L row-major
  Matrix prob;                          // classif prob / cluster membership / per-label prob
  std::vector<double> se;               // regr se
  std::vector<std::string> levels;      // cluster ids / label names; classif leaves empty
};

struct Learner {
  std::string id;
  std::string class_name;
  TaskKind kind = TaskKind::Classif;
  std::set<std::string> properties;
  ParamSet param_set;
  ParamMap hyperpars;
  PredictType predict_type = PredictType::Response;
  LearnerConfig config;
  LearnerPtr next;  // wrapped base learner, wrappers only

  std::function<std::any(const Learner&, const Task&,
                         const std::vector<double>& weights, Rng&)>
      fit;
  std::function<RawPrediction(const Learner&, const WrappedModel&,
                              const Dataset& newdata, Rng&)>
      predict;
  std::function<std::map<std::string, double>(const Learner&,
                                              const WrappedModel&)>
      featimp;

  bool has_property(const std::string& p) const {
    return properties.count(p) > 0;
  }
  // hyperpar lookup with param-set default fallback
  json par(const std::string& name) const;
  bool par_set(const std::string& name) const {
    return hyperpars.count(name) > 0;
  }
  double par_num(const std::string& name) const;
  long long par_int(const std::string& name) const;
  bool par_flag(const std::string& name) const;
  std::string par_str(const std::string& name) const;

  // innermost non-wrapper learner
  const Learner& base() const { return next ? next->base() : *this; }
};

struct LearnerInfo {
  std::string class_name;
  TaskKind kind;
  std::set<std::string> properties;
  std::string package = "builtin";
};

LearnerPtr make_learner(const std::string& class_name,
                        const std::string& predict_type = "",
                        const ParamMap& hyperpars = {},
                        const std::string& id = "",
                        LearnerConfig config = {});

LearnerPtr set_hyperpars(const LearnerPtr& learner, const ParamMap& values);
LearnerPtr remove_hyperpars(const LearnerPtr& learner,
                            const std::vector<std::string>& names);
LearnerPtr set_predict_type(const LearnerPtr& learner, PredictType t);
LearnerPtr set_predict_type(const LearnerPtr& learner, const std::string& t);
LearnerPtr set_learner_id(const LearnerPtr& learner, const std::string& id);
LearnerPtr set_learner_config(const LearnerPtr& learner, LearnerConfig config);

std::vector<LearnerInfo> list_learners(
    const std::string& kind = "", const std::set<std::string>& properties = {},
    const Task* task = nullptr);

void register_learner(const Learner& prototype);
bool learner_registered(const std::string& class_name);

// registry prototype access (throws on unknown class)
const Learner& learner_prototype(const std::string& class_name);

}  // namespace mlkit
