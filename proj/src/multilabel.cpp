#include "mlkit/multilabel.hpp"

#include <algorithm>
#include <set>

#include "mlkit/error.hpp"

namespace mlkit {

Task make_multilabel_task(Dataset data, std::vector<std::string> targets,
                          const std::string& id) {
  MakeTaskOptions opts;
  opts.id = id;
  return make_task(TaskKind::Multilabel, std::move(data), std::move(targets),
                   std::move(opts));
}

namespace {

struct MlState {
  std::vector<std::string> order;  // chain order; target order otherwise
  std::vector<ModelPtr> models;    // per label, in `order` order
  std::vector<ModelPtr> stage1;    // dbr/stacking first stage, target order
};

Learner ml_base(const LearnerPtr& learner, const std::string& suffix) {
  if (!learner) throw ValueError("learner is null");
  if (learner->kind != TaskKind::Classif)
    throw LearnerError("multilabel wrappers need a classif base learner");
  if (!learner->has_property("twoclass"))
    throw LearnerError("learner " + learner->id +
                       " cannot handle binary problems");
  Learner w;
  w.id = learner->id + "." + suffix;
  w.class_name = learner->class_name + "." + suffix;
  w.kind = TaskKind::Multilabel;
  w.next = learner;
  w.param_set = learner->param_set;
  w.predict_type = learner->predict_type == PredictType::Prob
                       ? PredictType::Prob
                       : PredictType::Response;
  w.config = learner->config;
  for (const char* p :
       {"numerics", "factors", "ordered", "missings", "weights", "prob"})
    if (learner->has_property(p)) w.properties.insert(p);
  return w;
}

LearnerPtr aligned_inner(const Learner& lrn, PredictType pt) {
  LearnerPtr inner = lrn.next;
  if (!lrn.hyperpars.empty()) inner = set_hyperpars(inner, lrn.hyperpars);
  if (inner->predict_type != pt) inner = set_predict_type(inner, pt);
  if (!(inner->config.on_learner_error == lrn.config.on_learner_error &&
        inner->config.show_info == lrn.config.show_info))
    inner = set_learner_config(inner, lrn.config);
  return inner;
}

ModelPtr checked_train(const LearnerPtr& learner, const Task& task,
                       const std::vector<double>& weights, Rng rng) {
  ModelPtr m = train(learner, task, {}, weights, rng);
  if (is_failure_model(m)) throw std::runtime_error(get_failure_message(*m));
  return m;
}

Dataset features_of(const Task& task) {
  std::vector<std::string> keep;
  for (const auto& c : task.data.columns)
    if (!task.is_target(c.name)) keep.push_back(c.name);
  Dataset d = task.data.select_cols(keep);
  d.n_rows = task.n_rows();
  return d;
}

FeatureColumn label_factor(const FeatureColumn& lab) {
  FeatureColumn y;
  y.name = lab.name;
  y.kind = ColKind::Factor;
  y.levels = {"FALSE", "TRUE"};
  y.values = lab.values;
  return y;
}

FeatureColumn flags_column(const std::string& name,
                           const std::vector<std::uint8_t>& flags) {
  FeatureColumn c;
  c.name = name;
  c.kind = ColKind::Logical;
  c.values.reserve(flags.size());
  for (auto f : flags)
    c.values.push_back(f == 255 ? kMissing : static_cast<double>(f));
  return c;
}

Task binary_task(const Task& ml, Dataset d, const std::string& target) {
  MakeTaskOptions opts;
  opts.id = ml.id + "." + target;
  opts.positive = "TRUE";
  return make_task(TaskKind::Classif, std::move(d), {target}, std::move(opts));
}

// 0/1 flags of a binary model output (255 = missing); prob mode thresholds
// P(TRUE) at 0.5, matching the default binary response rule
std::vector<std::uint8_t> binary_flags(const RawPrediction& raw, int n) {
  std::vector<std::uint8_t> f(n, 255);
  if (!raw.prob.empty()) {
    for (int i = 0; i < n; ++i) {
      const double q = raw.prob.at(i, 1);
      if (!is_missing(q)) f[i] = q >= 0.5 ? 1 : 0;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const int c = raw.response_cls[i];
      if (c >= 0) f[i] = c == 1 ? 1 : 0;
    }
  }
  return f;
}

std::vector<std::string> resolve_order(const Task& task,
                                       const std::vector<std::string>& order) {
  if (order.empty()) return task.targets;
  if (order.size() != task.targets.size())
    throw ValueError("label order must list every target exactly once");
  std::set<std::string> seen;
  for (const auto& o : order) {
    if (!task.is_target(o)) throw ValueError("unknown label in order: " + o);
    if (!seen.insert(o).second)
      throw ValueError("duplicate label in order: " + o);
  }
  return order;
}

int label_position(const std::vector<std::string>& labels,
                   const std::string& name) {
  return static_cast<int>(
      std::find(labels.begin(), labels.end(), name) - labels.begin());
}

std::vector<ModelPtr> fit_binary_relevance(const Learner& lrn, const Task& task,
                                           const std::vector<double>& weights,
                                           Rng& rng, std::uint64_t base_idx) {
  const Dataset feats = features_of(task);
  const LearnerPtr inner = aligned_inner(lrn, lrn.predict_type);
  std::vector<ModelPtr> models;
  models.reserve(task.targets.size());
  for (std::size_t j = 0; j < task.targets.size(); ++j) {
    Dataset d = feats;
    d.add_column(label_factor(task.data.col(task.targets[j])));
    models.push_back(checked_train(
        inner, binary_task(task, std::move(d), task.targets[j]), weights,
        rng.child(ExecLevel::Unit, base_idx + j)));
  }
  return models;
}

void put_label(RawPrediction& out, const RawPrediction& raw,
               const std::vector<std::uint8_t>& flags, int j, int L, int n,
               bool prob) {
  for (int i = 0; i < n; ++i)
    out.response_lbl[static_cast<std::size_t>(i) * L + j] = flags[i];
  if (prob)
    for (int i = 0; i < n; ++i) out.prob.at(i, j) = raw.prob.at(i, 1);
}

RawPrediction empty_output(int n, int L, bool prob) {
  RawPrediction out;
  out.response_lbl.assign(static_cast<std::size_t>(n) * L, 255);
  if (prob) {
    out.prob = Matrix(n, L);
    std::fill(out.prob.data.begin(), out.prob.data.end(), kMissing);
  }
  return out;
}

RawPrediction predict_binary_relevance(const std::vector<ModelPtr>& models,
                                       const std::vector<std::string>& labels,
                                       const Dataset& newdata, Rng& rng,
                                       bool prob) {
  const int L = static_cast<int>(labels.size());
  const int n = newdata.n_rows;
  RawPrediction out = empty_output(n, L, prob);
  for (int j = 0; j < L; ++j) {
    Rng ch = rng.child(ExecLevel::Unit, static_cast<std::uint64_t>(j));
    const RawPrediction raw = raw_predict(*models[j], newdata, ch);
    put_label(out, raw, binary_flags(raw, n), j, L, n, prob);
  }
  return out;
}

// CC and NST predict identically: chain over `order`, feeding each model
// the predicted flags of its predecessors.
RawPrediction predict_chained(const MlState& st,
                              const std::vector<std::string>& labels,
                              const Dataset& newdata, Rng& rng, bool prob) {
  const int L = static_cast<int>(labels.size());
  const int n = newdata.n_rows;
  RawPrediction out = empty_output(n, L, prob);
  Dataset aug = newdata;
  for (int k = 0; k < L; ++k) {
    Rng ch = rng.child(ExecLevel::Unit, static_cast<std::uint64_t>(k));
    const RawPrediction raw = raw_predict(*st.models[k], aug, ch);
    const std::vector<std::uint8_t> flags = binary_flags(raw, n);
    aug.add_column(flags_column(st.order[k], flags));
    put_label(out, raw, flags, label_position(labels, st.order[k]), L, n, prob);
  }
  return out;
}

// DBR and stacking predict identically: a binary relevance first stage
// supplies the other-label inputs of every second-stage model.
RawPrediction predict_two_stage(const MlState& st,
                                const std::vector<std::string>& labels,
                                const Dataset& newdata, Rng& rng, bool prob) {
  const int L = static_cast<int>(labels.size());
  const int n = newdata.n_rows;
  std::vector<std::vector<std::uint8_t>> stage1_flags(L);
  for (int j = 0; j < L; ++j) {
    Rng ch = rng.child(ExecLevel::Unit, static_cast<std::uint64_t>(j));
    stage1_flags[j] = binary_flags(raw_predict(*st.stage1[j], newdata, ch), n);
  }
  RawPrediction out = empty_output(n, L, prob);
  for (int j = 0; j < L; ++j) {
    Dataset aug = newdata;
    for (int m = 0; m < L; ++m)
      if (m != j) aug.add_column(flags_column(labels[m], stage1_flags[m]));
    Rng ch = rng.child(ExecLevel::Unit, static_cast<std::uint64_t>(L + j));
    const RawPrediction raw = raw_predict(*st.models[j], aug, ch);
    put_label(out, raw, binary_flags(raw, n), j, L, n, prob);
  }
  return out;
}

}  // namespace

LearnerPtr make_multilabel_binary_relevance_wrapper(const LearnerPtr& learner) {
  Learner w = ml_base(learner, "binaryrelevance");
  w.fit = [](const Learner& lrn, const Task& task,
             const std::vector<double>& weights, Rng& rng) -> std::any {
    MlState st;
    st.order = task.targets;
    st.models = fit_binary_relevance(lrn, task, weights, rng, 0);
    return st;
  };
  w.predict = [](const Learner& lrn, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const MlState&>(model.state);
    return predict_binary_relevance(st.models, model.task_desc.targets,
                                    newdata, rng,
                                    lrn.predict_type == PredictType::Prob);
  };
  return std::make_shared<const Learner>(std::move(w));
}

LearnerPtr make_multilabel_classifier_chains_wrapper(
    const LearnerPtr& learner, const std::vector<std::string>& order) {
  Learner w = ml_base(learner, "chains");
  w.fit = [order](const Learner& lrn, const Task& task,
                  const std::vector<double>& weights, Rng& rng) -> std::any {
    MlState st;
    st.order = resolve_order(task, order);
    const LearnerPtr inner = aligned_inner(lrn, lrn.predict_type);
    Dataset aug = features_of(task);
    for (std::size_t k = 0; k < st.order.size(); ++k) {
      Dataset dk = aug;
      dk.add_column(label_factor(task.data.col(st.order[k])));
      st.models.push_back(checked_train(
          inner, binary_task(task, std::move(dk), st.order[k]), weights,
          rng.child(ExecLevel::Unit, k)));
      aug.add_column(task.data.col(st.order[k]));
    }
    return st;
  };
  w.predict = [](const Learner& lrn, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const MlState&>(model.state);
    return predict_chained(st, model.task_desc.targets, newdata, rng,
                           lrn.predict_type == PredictType::Prob);
  };
  return std::make_shared<const Learner>(std::move(w));
}

LearnerPtr make_multilabel_nested_stacking_wrapper(
    const LearnerPtr& learner, const std::vector<std::string>& order) {
  Learner w = ml_base(learner, "nestedstacking");
  w.fit = [order](const Learner& lrn, const Task& task,
                  const std::vector<double>& weights, Rng& rng) -> std::any {
    MlState st;
    st.order = resolve_order(task, order);
    const std::size_t L = st.order.size();
    const LearnerPtr inner = aligned_inner(lrn, lrn.predict_type);
    Dataset aug = features_of(task);
    for (std::size_t k = 0; k < L; ++k) {
      Dataset dk = aug;
      dk.add_column(label_factor(task.data.col(st.order[k])));
      st.models.push_back(checked_train(
          inner, binary_task(task, std::move(dk), st.order[k]), weights,
          rng.child(ExecLevel::Unit, k)));
      Rng ch = rng.child(ExecLevel::Unit, L + k);
      const RawPrediction raw = raw_predict(*st.models.back(), aug, ch);
      aug.add_column(
          flags_column(st.order[k], binary_flags(raw, aug.n_rows)));
    }
    return st;
  };
  w.predict = [](const Learner& lrn, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const MlState&>(model.state);
    return predict_chained(st, model.task_desc.targets, newdata, rng,
                           lrn.predict_type == PredictType::Prob);
  };
  return std::make_shared<const Learner>(std::move(w));
}

LearnerPtr make_multilabel_dbr_wrapper(const LearnerPtr& learner) {
  Learner w = ml_base(learner, "dbr");
  w.fit = [](const Learner& lrn, const Task& task,
             const std::vector<double>& weights, Rng& rng) -> std::any {
    MlState st;
    st.order = task.targets;
    st.stage1 = fit_binary_relevance(lrn, task, weights, rng, 0);
    const std::size_t L = task.targets.size();
    const Dataset feats = features_of(task);
    const LearnerPtr inner = aligned_inner(lrn, lrn.predict_type);
    for (std::size_t j = 0; j < L; ++j) {
      Dataset dj = feats;
      for (std::size_t m = 0; m < L; ++m)
        if (m != j) dj.add_column(task.data.col(task.targets[m]));
      dj.add_column(label_factor(task.data.col(task.targets[j])));
      st.models.push_back(checked_train(
          inner, binary_task(task, std::move(dj), task.targets[j]), weights,
          rng.child(ExecLevel::Unit, L + j)));
    }
    return st;
  };
  w.predict = [](const Learner& lrn, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const MlState&>(model.state);
    return predict_two_stage(st, model.task_desc.targets, newdata, rng,
                             lrn.predict_type == PredictType::Prob);
  };
  return std::make_shared<const Learner>(std::move(w));
}

LearnerPtr make_multilabel_stacking_wrapper(const LearnerPtr& learner) {
  Learner w = ml_base(learner, "stacking");
  w.fit = [](const Learner& lrn, const Task& task,
             const std::vector<double>& weights, Rng& rng) -> std::any {
    MlState st;
    st.order = task.targets;
    st.stage1 = fit_binary_relevance(lrn, task, weights, rng, 0);
    const std::size_t L = task.targets.size();
    const Dataset feats = features_of(task);
    std::vector<std::vector<std::uint8_t>> stage1_flags(L);
    for (std::size_t j = 0; j < L; ++j) {
      Rng ch = rng.child(ExecLevel::Unit, L + j);
      stage1_flags[j] =
          binary_flags(raw_predict(*st.stage1[j], feats, ch), feats.n_rows);
    }
    const LearnerPtr inner = aligned_inner(lrn, lrn.predict_type);
    for (std::size_t j = 0; j < L; ++j) {
      Dataset dj = feats;
      for (std::size_t m = 0; m < L; ++m)
        if (m != j)
          dj.add_column(flags_column(task.targets[m], stage1_flags[m]));
      dj.add_column(label_factor(task.data.col(task.targets[j])));
      st.models.push_back(checked_train(
          inner, binary_task(task, std::move(dj), task.targets[j]), weights,
          rng.child(ExecLevel::Unit, 2 * L + j)));
    }
    return st;
  };
  w.predict = [](const Learner& lrn, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const MlState&>(model.state);
    return predict_two_stage(st, model.task_desc.targets, newdata, rng,
                             lrn.predict_type == PredictType::Prob);
  };
  return std::make_shared<const Learner>(std::move(w));
}

std::vector<ModelPtr> get_multilabel_models(const ModelPtr& model) {
  if (!model) throw ValueError("get_multilabel_models: model is null");
  if (is_failure_model(*model))
    throw LearnerError("cannot extract models from a failure model");
  const auto* st = std::any_cast<MlState>(&model->state);
  if (!st) throw ValueError("model was not trained by a multilabel wrapper");
  return st->models;
}

Table multilabel_binary_performances(const Prediction& pred,
                                     const std::vector<Measure>& measures) {
  if (pred.task_kind != TaskKind::Multilabel)
    throw ValueError(
        "multilabel_binary_performances needs a multilabel prediction");
  const int L = pred.n_classes();
  const int n = pred.n();
  const bool has_prob = !pred.prob.empty();
  Table t;
  t.columns.push_back("label");
  for (const auto& m : measures) t.columns.push_back(m.id);
  for (int l = 0; l < L; ++l) {
    Prediction b;
    b.task_kind = TaskKind::Classif;
    b.predict_type = has_prob ? PredictType::Prob : PredictType::Response;
    b.class_levels = {"FALSE", "TRUE"};
    b.positive = "TRUE";
    if (!pred.truth_lbl.empty()) {
      b.truth_cls.reserve(n);
      for (int i = 0; i < n; ++i) {
        const auto v = pred.truth_lbl[static_cast<std::size_t>(i) * L + l];
        b.truth_cls.push_back(v == 255 ? -1 : static_cast<int>(v));
      }
    }
    b.response_cls.reserve(n);
    for (int i = 0; i < n; ++i) {
      const auto v = pred.response_lbl[static_cast<std::size_t>(i) * L + l];
      b.response_cls.push_back(v == 255 ? -1 : static_cast<int>(v));
    }
    if (has_prob) {
      b.prob = Matrix(n, 2);
      for (int i = 0; i < n; ++i) {
        const double q = pred.prob.at(i, l);
        b.prob.at(i, 0) = is_missing(q) ? kMissing : 1.0 - q;
        b.prob.at(i, 1) = q;
      }
      b.threshold = default_threshold(2, 1);
    }
    auto& row = t.add_row();
    int c = 0;
    row[c++] = pred.class_levels[l];
    for (const auto& m : measures) {
      const double v = performance(b, m, nullptr, nullptr);
      row[c++] = is_missing(v) ? json() : json(v);
    }
  }
  return t;
}

}  // namespace mlkit
