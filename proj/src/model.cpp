#include "mlkit/model.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "mlkit/error.hpp"

namespace mlkit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<int> all_rows(const Task& task) {
  std::vector<int> rows(task.n_rows());
  for (int i = 0; i < task.n_rows(); ++i) rows[i] = i + 1;
  return rows;
}

void check_can_handle(const Learner& lrn, const Task& sub) {
  const TaskDesc d = task_desc(sub);
  auto need = [&](bool cond, const char* prop, const char* what) {
    if (cond && !lrn.has_property(prop))
      throw LearnerError("learner " + lrn.id + " cannot handle " + what +
                         " (missing property '" + prop + "')");
  };
  need(d.n_feat_numeric + d.n_feat_logical > 0, "numerics", "numeric features");
  need(d.n_feat_factor > 0, "factors", "factor features");
  need(d.n_feat_ordered > 0, "ordered", "ordered features");
  need(d.has_missings, "missings", "missing values");
  if (sub.kind == TaskKind::Classif) {
    if (sub.n_classes() > 2)
      need(true, "multiclass", "more than two classes");
    else
      need(true, "twoclass", "a two-class problem");
  }
}

}  // namespace

ModelPtr train(const LearnerPtr& learner, const Task& task,
               const std::vector<int>& subset,
               const std::vector<double>& weights, Rng rng) {
  if (!learner) throw ValueError("train: learner is null");
  if (learner->kind != task.kind)
    throw LearnerError("learner " + learner->id + " (" +
                       task_kind_name(learner->kind) + ") cannot be trained on a " +
                       task_kind_name(task.kind) + " task");
  const std::vector<int> rows = subset.empty() ? all_rows(task) : subset;
  const Task sub = subset_task(task, rows);

  std::vector<double> w;
  if (!weights.empty()) {
    if (!learner->has_property("weights"))
      throw LearnerError("learner " + learner->id +
                         " does not support observation weights");
    if (weights.size() != rows.size())
      throw ValueError("weights length must equal the number of training rows");
    for (double x : weights)
      if (!(x >= 0) || !std::isfinite(x))
        throw ValueError("weights must be finite and nonnegative");
    w = weights;
  } else if (!task.weights.empty() && learner->has_property("weights")) {
    w.reserve(rows.size());
    for (int r : rows) w.push_back(task.weights[r - 1]);
  }

  check_can_handle(*learner, sub);

  WrappedModel m;
  m.learner = learner;
  m.task_desc = task_desc(sub);
  m.subset = rows;
  m.features = sub.feature_names();
  for (const auto& name : m.features) {
    const auto& col = sub.data.col(name);
    if (col.is_factor_like()) m.factor_levels[name] = col.levels;
  }

  const auto t0 = Clock::now();
  try {
    m.state = learner->fit(*learner, sub, w, rng);
  } catch (const std::exception& e) {
    if (learner->config.on_learner_error == OnLearnerError::Stop) throw;
    m.failure_msg = e.what();
    m.state.reset();
    if (learner->config.show_info)
      std::cerr << "Warning: learner " << learner->id
                << " failed in train: " << e.what() << "\n";
  }
  m.train_time = seconds_since(t0);
  return std::make_shared<const WrappedModel>(std::move(m));
}

bool is_failure_model(const WrappedModel& model) {
  return !model.failure_msg.empty();
}

bool is_failure_model(const ModelPtr& model) {
  return model && is_failure_model(*model);
}

std::string get_failure_message(const WrappedModel& model) {
  if (!is_failure_model(model))
    throw ValueError("model is not a failure model");
  return model.failure_msg;
}

RawPrediction raw_predict(const WrappedModel& model, const Dataset& newdata,
                          Rng& rng) {
  if (is_failure_model(model))
    throw LearnerError("cannot predict with a failure model: " +
                       model.failure_msg);
  const Learner& lrn = *model.learner;

  Dataset nd;
  nd.n_rows = newdata.n_rows;
  for (const auto& name : model.features) {
    if (!newdata.has_col(name))
      throw ValueError("newdata lacks feature column: " + name);
    FeatureColumn col = newdata.col(name);
    auto snap = model.factor_levels.find(name);
    if (snap != model.factor_levels.end()) {
      if (!col.is_factor_like())
        throw ValueError("feature " + name + " was a factor at training time");
      if (col.levels != snap->second) {
        // re-encode against the training levels; unseen labels become missing
        std::vector<int> remap(col.levels.size(), -1);
        for (std::size_t l = 0; l < col.levels.size(); ++l) {
          for (std::size_t t = 0; t < snap->second.size(); ++t)
            if (snap->second[t] == col.levels[l]) remap[l] = static_cast<int>(t);
        }
        for (auto& v : col.values) {
          if (is_missing(v)) continue;
          const int m2 = remap[static_cast<int>(v)];
          v = m2 < 0 ? kMissing : static_cast<double>(m2);
        }
        col.levels = snap->second;
      }
    } else if (col.is_factor_like()) {
      throw ValueError("feature " + name + " was not a factor at training time");
    }
    nd.add_column(std::move(col));
  }
  if (!lrn.has_property("missings")) {
    for (const auto& col : nd.columns)
      if (col.has_missings())
        throw LearnerError("prediction data has missing values in feature " +
                           col.name +
                           " (possibly an unseen factor level) and learner " +
                           lrn.id + " cannot handle them");
  }

  RawPrediction raw = lrn.predict(lrn, model, nd, rng);
  const int want = nd.n_rows;
  const int got = !raw.response_cls.empty() ? static_cast<int>(raw.response_cls.size())
                  : !raw.response_num.empty() ? static_cast<int>(raw.response_num.size())
                  : !raw.response_lbl.empty()
                      ? static_cast<int>(raw.response_lbl.size()) /
                            std::max<std::size_t>(1, raw.levels.size() ? raw.levels.size() : 1)
                      : raw.prob.rows;
  if (got != want)
    throw LearnerError("learner " + lrn.id + " returned " +
                       std::to_string(got) + " predictions for " +
                       std::to_string(want) + " rows");
  return raw;
}

namespace {

Prediction make_failure_prediction(const WrappedModel& model, int n) {
  Prediction p;
  p.task_kind = model.task_desc.kind;
  p.predict_type = model.learner->predict_type;
  p.class_levels = model.task_desc.class_levels;
  p.positive = model.task_desc.positive;
  const int K = std::max(1, static_cast<int>(p.class_levels.size()));
  switch (p.task_kind) {
    case TaskKind::Classif:
    case TaskKind::Cluster:
    case TaskKind::CostSens:
      p.response_cls.assign(n, -1);
      if (p.predict_type == PredictType::Prob) {
        p.prob = Matrix(n, K);
        std::fill(p.prob.data.begin(), p.prob.data.end(), kMissing);
      }
      break;
    case TaskKind::Regr:
      p.response_num.assign(n, kMissing);
      if (p.predict_type == PredictType::SE) p.se.assign(n, kMissing);
      break;
    case TaskKind::Multilabel:
      p.response_lbl.assign(static_cast<std::size_t>(n) * K, 255);
      if (p.predict_type == PredictType::Prob) {
        p.prob = Matrix(n, K);
        std::fill(p.prob.data.begin(), p.prob.data.end(), kMissing);
      }
      break;
  }
  p.predict_time = kMissing;
  return p;
}

Prediction assemble(const WrappedModel& model, RawPrediction raw, int n) {
  Prediction p;
  p.task_kind = model.task_desc.kind;
  p.predict_type = model.learner->predict_type;
  p.class_levels =
      raw.levels.empty() ? model.task_desc.class_levels : raw.levels;
  p.positive = model.task_desc.positive;
  switch (p.task_kind) {
    case TaskKind::Classif: {
      if (p.predict_type == PredictType::Prob) {
        if (raw.prob.empty())
          throw LearnerError("learner " + model.learner->id +
                             " produced no probabilities");
        p.prob = std::move(raw.prob);
        p.threshold = default_threshold(static_cast<int>(p.class_levels.size()),
                                        p.positive_index());
        p.response_cls = prob_to_response(p.prob, p.threshold, p.positive_index());
      } else {
        p.response_cls = std::move(raw.response_cls);
      }
      break;
    }
    case TaskKind::CostSens:
      p.response_cls = std::move(raw.response_cls);
      break;
    case TaskKind::Cluster: {
      p.response_cls = std::move(raw.response_cls);
      if (p.predict_type == PredictType::Prob) p.prob = std::move(raw.prob);
      break;
    }
    case TaskKind::Regr: {
      p.response_num = std::move(raw.response_num);
      if (p.predict_type == PredictType::SE) p.se = std::move(raw.se);
      break;
    }
    case TaskKind::Multilabel: {
      p.response_lbl = std::move(raw.response_lbl);
      if (p.predict_type == PredictType::Prob) p.prob = std::move(raw.prob);
      break;
    }
  }
  (void)n;
  return p;
}

void fill_truth(Prediction& p, const Task& task, const std::vector<int>& rows) {
  switch (task.kind) {
    case TaskKind::Classif: {
      const auto& tc = task.target_col();
      p.truth_cls.reserve(rows.size());
      for (int r : rows)
        p.truth_cls.push_back(tc.missing(r - 1)
                                  ? -1
                                  : static_cast<int>(tc.values[r - 1]));
      break;
    }
    case TaskKind::Regr: {
      const auto& tc = task.target_col();
      p.truth_num.reserve(rows.size());
      for (int r : rows) p.truth_num.push_back(tc.values[r - 1]);
      break;
    }
    case TaskKind::Multilabel: {
      const int L = static_cast<int>(task.targets.size());
      p.truth_lbl.reserve(rows.size() * L);
      for (int r : rows)
        for (int l = 0; l < L; ++l) {
          const auto& col = task.data.col(task.targets[l]);
          p.truth_lbl.push_back(col.missing(r - 1)
                                    ? 255
                                    : static_cast<std::uint8_t>(col.values[r - 1]));
        }
      break;
    }
    case TaskKind::Cluster:
    case TaskKind::CostSens: break;  // no truth
  }
}

}  // namespace

Prediction predict(const ModelPtr& model, const Task& task,
                   const std::vector<int>& subset, Rng rng) {
  if (!model) throw ValueError("predict: model is null");
  if (task.kind != model->learner->kind)
    throw LearnerError("model and task kinds differ");
  const std::vector<int> rows = subset.empty() ? all_rows(task) : subset;
  std::vector<int> rows0;
  rows0.reserve(rows.size());
  for (int r : rows) rows0.push_back(r - 1);

  Prediction p;
  if (is_failure_model(*model)) {
    p = make_failure_prediction(*model, static_cast<int>(rows.size()));
  } else {
    const Dataset nd =
        task.data.select_rows(rows0).select_cols(model->features);
    const auto t0 = Clock::now();
    RawPrediction raw = raw_predict(*model, nd, rng);
    const double elapsed = seconds_since(t0);
    p = assemble(*model, std::move(raw), static_cast<int>(rows.size()));
    p.predict_time = elapsed;
  }
  p.ids = rows;
  fill_truth(p, task, rows);
  return p;
}

Prediction predict_newdata(const ModelPtr& model, const Dataset& newdata,
                           Rng rng) {
  if (!model) throw ValueError("predict: model is null");
  Dataset nd = newdata;
  // drop target columns when present
  std::vector<std::string> keep;
  for (const auto& col : nd.columns) {
    bool is_target = false;
    for (const auto& t : model->task_desc.targets)
      if (col.name == t) is_target = true;
    if (!is_target) keep.push_back(col.name);
  }
  if (keep.size() != nd.columns.size()) nd = nd.select_cols(keep);

  if (is_failure_model(*model))
    return make_failure_prediction(*model, nd.n_rows);
  const auto t0 = Clock::now();
  RawPrediction raw = raw_predict(*model, nd, rng);
  const double elapsed = seconds_since(t0);
  Prediction p = assemble(*model, std::move(raw), nd.n_rows);
  p.predict_time = elapsed;
  return p;
}

std::map<std::string, double> get_feature_importance(const ModelPtr& model) {
  if (!model) throw ValueError("get_feature_importance: model is null");
  if (is_failure_model(*model))
    throw LearnerError("cannot extract importance from a failure model");
  const Learner& lrn = *model->learner;
  if (!lrn.has_property("featimp") || !lrn.featimp)
    throw LearnerError("learner " + lrn.id +
                       " does not support feature importance");
  return lrn.featimp(lrn, *model);
}

}  // namespace mlkit
