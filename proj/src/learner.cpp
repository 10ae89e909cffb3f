#include "mlkit/learner.hpp"

#include <iostream>
#include <map>

#include "mlkit/error.hpp"

namespace mlkit {

json Learner::par(const std::string& name) const {
  auto it = hyperpars.find(name);
  if (it != hyperpars.end()) return it->second;
  const Param* p = param_set.find(name);
  if (p && p->default_value) return *p->default_value;
  return json();
}

double Learner::par_num(const std::string& name) const {
  const json v = par(name);
  if (!v.is_number()) throw ValueError("parameter " + name + " is not set");
  return v.get<double>();
}

long long Learner::par_int(const std::string& name) const {
  const json v = par(name);
  if (!v.is_number()) throw ValueError("parameter " + name + " is not set");
  return static_cast<long long>(std::llround(v.get<double>()));
}

bool Learner::par_flag(const std::string& name) const {
  const json v = par(name);
  if (!v.is_boolean()) throw ValueError("parameter " + name + " is not set");
  return v.get<bool>();
}

std::string Learner::par_str(const std::string& name) const {
  const json v = par(name);
  if (!v.is_string()) throw ValueError("parameter " + name + " is not set");
  return v.get<std::string>();
}

namespace {

std::map<std::string, Learner>& learner_registry() {
  static std::map<std::string, Learner> reg;
  return reg;
}

void validate_hyperpar(const Learner& lrn, const std::string& name,
                       const json& value) {
  if (!lrn.param_set.has(name)) {
    switch (lrn.config.on_par_without_desc) {
      case OnParWithoutDesc::Stop:
        throw LearnerError("setting parameter " + name + " without available description for " + lrn.id);
      case OnParWithoutDesc::Warn:
        std::cerr << "Warning: setting parameter " << name
                  << " without available description for " << lrn.id << "\n";
        return;
      case OnParWithoutDesc::Quiet: return;
    }
  }
  lrn.param_set.check_value(name, value);
}

void validate_predict_type(const Learner& lrn, PredictType t) {
  if (t == PredictType::Prob && !lrn.has_property("prob"))
    throw LearnerError("learner " + lrn.id + " does not support predict type prob");
  if (t == PredictType::SE && !lrn.has_property("se"))
    throw LearnerError("learner " + lrn.id + " does not support predict type se");
}

// dependency check tolerant of hyperpars the param set does not describe
void check_dependencies(const Learner& lrn) {
  for (const auto& [name, v] : lrn.hyperpars) {
    (void)v;
    const Param* p = lrn.param_set.find(name);
    if (p && p->requires_fn && !p->requires_fn(lrn.hyperpars))
      throw ValueError("param '" + name + "' set but its dependency (" +
                       p->requires_desc + ") is not satisfied");
  }
}

}  // namespace

void register_builtin_learners();  // defined in builtins.cpp

const Learner& learner_prototype(const std::string& class_name) {
  register_builtin_learners();
  auto& reg = learner_registry();
  auto it = reg.find(class_name);
  if (it == reg.end()) throw ValueError("unknown learner class: " + class_name);
  return it->second;
}

bool learner_registered(const std::string& class_name) {
  register_builtin_learners();
  return learner_registry().count(class_name) > 0;
}

void register_learner(const Learner& prototype) {
  register_builtin_learners();
  auto& reg = learner_registry();
  if (reg.count(prototype.class_name))
    throw ValueError("learner class already registered: " + prototype.class_name);
  if (!prototype.fit || !prototype.predict)
    throw ValueError("learner prototype needs fit and predict hooks");
  Learner p = prototype;
  if (p.id.empty()) p.id = p.class_name;
  reg[p.class_name] = std::move(p);
}

void register_learner_raw(const Learner& prototype) {
  // internal seeding path that skips the builtin bootstrap
  auto& reg = learner_registry();
  if (reg.count(prototype.class_name))
    throw ValueError("learner class already registered: " + prototype.class_name);
  Learner p = prototype;
  if (p.id.empty()) p.id = p.class_name;
  reg[p.class_name] = std::move(p);
}

LearnerPtr make_learner(const std::string& class_name,
                        const std::string& predict_type,
                        const ParamMap& hyperpars, const std::string& id,
                        LearnerConfig config) {
  Learner lrn = learner_prototype(class_name);
  lrn.id = id.empty() ? class_name : id;
  lrn.config = config;
  if (!predict_type.empty()) {
    const PredictType t = predict_type_from_name(predict_type);
    validate_predict_type(lrn, t);
    lrn.predict_type = t;
  }
  for (const auto& [name, value] : hyperpars) {
    validate_hyperpar(lrn, name, value);
    lrn.hyperpars[name] = value;
  }
  check_dependencies(lrn);
  return std::make_shared<const Learner>(std::move(lrn));
}

LearnerPtr set_hyperpars(const LearnerPtr& learner, const ParamMap& values) {
  Learner lrn = *learner;
  for (const auto& [name, value] : values) {
    validate_hyperpar(lrn, name, value);
    lrn.hyperpars[name] = value;
  }
  check_dependencies(lrn);
  return std::make_shared<const Learner>(std::move(lrn));
}

LearnerPtr remove_hyperpars(const LearnerPtr& learner,
                            const std::vector<std::string>& names) {
  Learner lrn = *learner;
  for (const auto& n : names) lrn.hyperpars.erase(n);
  return std::make_shared<const Learner>(std::move(lrn));
}

LearnerPtr set_predict_type(const LearnerPtr& learner, PredictType t) {
  validate_predict_type(*learner, t);
  Learner lrn = *learner;
  lrn.predict_type = t;
  return std::make_shared<const Learner>(std::move(lrn));
}

LearnerPtr set_predict_type(const LearnerPtr& learner, const std::string& t) {
  return set_predict_type(learner, predict_type_from_name(t));
}

LearnerPtr set_learner_id(const LearnerPtr& learner, const std::string& id) {
  Learner lrn = *learner;
  lrn.id = id;
  return std::make_shared<const Learner>(std::move(lrn));
}

LearnerPtr set_learner_config(const LearnerPtr& learner, LearnerConfig config) {
  Learner lrn = *learner;
  lrn.config = config;
  return std::make_shared<const Learner>(std::move(lrn));
}

std::vector<LearnerInfo> list_learners(const std::string& kind,
                                       const std::set<std::string>& properties,
                                       const Task* task) {
  register_builtin_learners();
  std::vector<LearnerInfo> out;
  for (const auto& [name, lrn] : learner_registry()) {
    if (!kind.empty() && task_kind_name(lrn.kind) != kind) continue;
    bool ok = true;
    for (const auto& p : properties)
      if (!lrn.has_property(p)) ok = false;
    if (task != nullptr) {
      if (lrn.kind != task->kind) ok = false;
      const TaskDesc d = task_desc(*task);
      if (d.n_feat_numeric > 0 && !lrn.has_property("numerics")) ok = false;
      if (d.n_feat_factor > 0 && !lrn.has_property("factors")) ok = false;
      if (d.n_feat_ordered > 0 && !lrn.has_property("ordered")) ok = false;
      if (d.has_missings && !lrn.has_property("missings")) ok = false;
      if (task->kind == TaskKind::Classif) {
        if (task->n_classes() > 2 && !lrn.has_property("multiclass")) ok = false;
        if (task->n_classes() <= 2 && !lrn.has_property("twoclass")) ok = false;
      }
    }
    if (ok) out.push_back({lrn.class_name, lrn.kind, lrn.properties, "builtin"});
  }
  return out;
}

}  // namespace mlkit
