#include "mlkit/costsens.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include "mlkit/error.hpp"

namespace mlkit {

int CostMatrix::index_of(const std::string& label) const {
  const auto it = std::find(levels.begin(), levels.end(), label);
  if (it == levels.end()) throw ValueError("unknown class: " + label);
  return static_cast<int>(it - levels.begin());
}

double CostMatrix::at(const std::string& truth,
                      const std::string& predicted) const {
  return costs.at(index_of(truth), index_of(predicted));
}

CostMatrix make_cost_matrix(std::vector<std::string> levels, Matrix costs) {
  const int K = static_cast<int>(levels.size());
  if (K == 0) throw ValueError("cost matrix needs class labels");
  if (costs.rows != K || costs.cols != K)
    throw ValueError("cost matrix must be square with one row and column per class");
  std::set<std::string> uniq(levels.begin(), levels.end());
  if (uniq.size() != levels.size())
    throw ValueError("cost matrix class labels must be unique");
  for (int i = 0; i < K; ++i) {
    double mn = costs.at(i, 0);
    for (int j = 1; j < K; ++j) mn = std::min(mn, costs.at(i, j));
    if (costs.at(i, i) > mn)
      std::cerr << "Warning: cost matrix row '" << levels[i]
                << "' is not minimal on the diagonal\n";
  }
  CostMatrix out;
  out.levels = std::move(levels);
  out.costs = std::move(costs);
  return out;
}

double theoretical_threshold(const Matrix& costs, int positive_index) {
  if (costs.rows != 2 || costs.cols != 2)
    throw ValueError("theoretical_threshold needs a 2x2 cost matrix");
  if (positive_index != 0 && positive_index != 1)
    throw ValueError("positive index must be 0 or 1");
  const int p = positive_index, q = 1 - positive_index;
  const double den =
      costs.at(q, p) - costs.at(p, p) + costs.at(p, q) - costs.at(q, q);
  if (den == 0.0)
    throw ValueError("theoretical threshold undefined: zero denominator");
  return (costs.at(q, p) - costs.at(q, q)) / den;
}

double theoretical_threshold(const CostMatrix& costs,
                             const std::string& positive) {
  return theoretical_threshold(costs.costs, costs.index_of(positive));
}

double theoretical_weight(double t, double t0) {
  if (!(t > 0.0) || !(t < 1.0) || !(t0 > 0.0) || !(t0 < 1.0))
    throw ValueError("thresholds must lie in (0, 1)");
  return (1.0 - t) / t * (t0 / (1.0 - t0));
}

std::vector<double> multiclass_cost_thresholds(const Matrix& costs) {
  if (costs.rows == 0 || costs.rows != costs.cols)
    throw ValueError("multiclass thresholds need a square cost matrix");
  std::vector<double> th(costs.rows);
  for (int i = 0; i < costs.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < costs.cols; ++j) s += costs.at(i, j);
    if (s == 0.0)
      throw ValueError("cost matrix row sums to zero; threshold undefined");
    th[i] = 2.0 / s;
  }
  return th;
}

std::map<std::string, double> multiclass_cost_thresholds(
    const CostMatrix& costs) {
  const std::vector<double> th = multiclass_cost_thresholds(costs.costs);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < costs.levels.size(); ++i)
    out[costs.levels[i]] = th[i];
  return out;
}

Task make_costsens_task(Dataset data, Matrix costs,
                        std::vector<std::string> classes,
                        const std::string& id) {
  MakeTaskOptions opts;
  opts.id = id;
  opts.cost_matrix = std::move(costs);
  opts.cost_classes = std::move(classes);
  return make_task(TaskKind::CostSens, std::move(data), {}, std::move(opts));
}

namespace {

Learner costsens_base(const LearnerPtr& learner, const std::string& suffix) {
  Learner w;
  w.id = learner->id + "." + suffix;
  w.class_name = learner->class_name + "." + suffix;
  w.kind = TaskKind::CostSens;
  w.next = learner;
  w.param_set = learner->param_set;
  w.predict_type = PredictType::Response;
  w.config = learner->config;
  for (const char* p : {"numerics", "factors", "ordered", "missings"})
    if (learner->has_property(p)) w.properties.insert(p);
  return w;
}

std::string fresh_name(const Dataset& d, std::string base) {
  while (d.has_col(base)) base += ".";
  return base;
}

// cheapest class of a cost row, ties to the lowest index
int argmin_cost(const Matrix& cm, int row) {
  int best = 0;
  for (int c = 1; c < cm.cols; ++c)
    if (cm.at(row, c) < cm.at(row, best)) best = c;
  return best;
}

Dataset features_only(const Task& task) { return task.data; }

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

struct CostSensState {
  std::vector<ModelPtr> models;
  std::vector<std::pair<int, int>> pairs;  // pairs wrapper only
};

}  // namespace

LearnerPtr make_costsens_classif_wrapper(const LearnerPtr& learner) {
  if (!learner) throw ValueError("learner is null");
  if (learner->kind != TaskKind::Classif)
    throw LearnerError("costsens classif wrapper needs a classif base learner");
  Learner w = costsens_base(learner, "costsens");
  if (learner->has_property("weights")) w.properties.insert("weights");

  w.fit = [](const Learner& lrn, const Task& task,
             const std::vector<double>& weights, Rng& rng) -> std::any {
    const Matrix& cm = task.cost_matrix;
    Dataset d = features_only(task);
    FeatureColumn y;
    y.name = fresh_name(d, "..y..");
    y.kind = ColKind::Factor;
    y.levels = task.cost_classes;
    y.values.reserve(cm.rows);
    for (int i = 0; i < cm.rows; ++i)
      y.values.push_back(static_cast<double>(argmin_cost(cm, i)));
    d.add_column(std::move(y));
    MakeTaskOptions opts;
    opts.id = task.id;
    const std::string target = d.columns.back().name;
    const Task inner_task =
        make_task(TaskKind::Classif, std::move(d), {target}, std::move(opts));
    CostSensState st;
    st.models.push_back(checked_train(aligned_inner(lrn, PredictType::Response),
                                      inner_task, weights,
                                      rng.child(ExecLevel::Unit, 0)));
    return st;
  };

  w.predict = [](const Learner&, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const CostSensState&>(model.state);
    RawPrediction raw = raw_predict(*st.models[0], newdata, rng);
    RawPrediction out;
    out.response_cls = std::move(raw.response_cls);
    return out;
  };
  return std::make_shared<const Learner>(std::move(w));
}

LearnerPtr make_costsens_regr_wrapper(const LearnerPtr& learner) {
  if (!learner) throw ValueError("learner is null");
  if (learner->kind != TaskKind::Regr)
    throw LearnerError("costsens regr wrapper needs a regr base learner");
  Learner w = costsens_base(learner, "costsens");
  if (learner->has_property("weights")) w.properties.insert("weights");

  w.fit = [](const Learner& lrn, const Task& task,
             const std::vector<double>& weights, Rng& rng) -> std::any {
    const Matrix& cm = task.cost_matrix;
    const LearnerPtr inner = aligned_inner(lrn, PredictType::Response);
    CostSensState st;
    for (int c = 0; c < cm.cols; ++c) {
      Dataset d = features_only(task);
      FeatureColumn y;
      y.name = fresh_name(d, "..cost..");
      y.kind = ColKind::Numeric;
      y.values.reserve(cm.rows);
      for (int i = 0; i < cm.rows; ++i) y.values.push_back(cm.at(i, c));
      d.add_column(std::move(y));
      MakeTaskOptions opts;
      opts.id = task.id;
      const std::string target = d.columns.back().name;
      const Task inner_task =
          make_task(TaskKind::Regr, std::move(d), {target}, std::move(opts));
      st.models.push_back(
          checked_train(inner, inner_task, weights,
                        rng.child(ExecLevel::Unit, static_cast<std::uint64_t>(c))));
    }
    return st;
  };

  w.predict = [](const Learner&, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const CostSensState&>(model.state);
    const int K = static_cast<int>(st.models.size());
    const int n = newdata.n_rows;
    std::vector<std::vector<double>> costs(K);
    for (int c = 0; c < K; ++c) {
      Rng ch = rng.child(ExecLevel::Unit, static_cast<std::uint64_t>(c));
      costs[c] = raw_predict(*st.models[c], newdata, ch).response_num;
    }
    RawPrediction out;
    out.response_cls.assign(n, -1);
    for (int i = 0; i < n; ++i) {
      int best = -1;
      for (int c = 0; c < K; ++c) {
        if (is_missing(costs[c][i])) continue;
        if (best < 0 || costs[c][i] < costs[best][i]) best = c;
      }
      out.response_cls[i] = best;
    }
    return out;
  };
  return std::make_shared<const Learner>(std::move(w));
}

LearnerPtr make_costsens_weighted_pairs_wrapper(const LearnerPtr& learner) {
  if (!learner) throw ValueError("learner is null");
  if (learner->kind != TaskKind::Classif)
    throw LearnerError("weighted pairs wrapper needs a classif base learner");
  if (!learner->has_property("weights"))
    throw LearnerError("learner " + learner->id +
                       " does not support observation weights");
  Learner w = costsens_base(learner, "costsens.pairs");

  w.fit = [](const Learner& lrn, const Task& task,
             const std::vector<double>&, Rng& rng) -> std::any {
    const Matrix& cm = task.cost_matrix;
    const int K = cm.cols;
    if (K < 2) throw ValueError("weighted pairs need at least two classes");
    const LearnerPtr inner = aligned_inner(lrn, PredictType::Response);
    CostSensState st;
    std::uint64_t idx = 0;
    for (int a = 0; a < K; ++a) {
      for (int b = a + 1; b < K; ++b) {
        std::vector<int> rows0;
        std::vector<double> wts, labels;
        for (int i = 0; i < cm.rows; ++i) {
          const double diff = cm.at(i, a) - cm.at(i, b);
          if (diff == 0.0) continue;
          rows0.push_back(i);
          wts.push_back(std::abs(diff));
          labels.push_back(diff < 0.0 ? 0.0 : 1.0);
        }
        if (rows0.empty())
          throw ValueError("no rows with differing costs for classes " +
                           task.cost_classes[a] + " and " +
                           task.cost_classes[b]);
        Dataset d = features_only(task).select_rows(rows0);
        FeatureColumn y;
        y.name = fresh_name(d, "..y..");
        y.kind = ColKind::Factor;
        y.levels = {task.cost_classes[a], task.cost_classes[b]};
        y.values = std::move(labels);
        d.add_column(std::move(y));
        MakeTaskOptions opts;
        opts.id = task.id;
        const std::string target = d.columns.back().name;
        const Task inner_task =
            make_task(TaskKind::Classif, std::move(d), {target}, std::move(opts));
        st.models.push_back(
            checked_train(inner, inner_task, wts, rng.child(ExecLevel::Unit, idx)));
        st.pairs.push_back({a, b});
        ++idx;
      }
    }
    return st;
  };

  w.predict = [](const Learner&, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const CostSensState&>(model.state);
    const int K = static_cast<int>(model.task_desc.class_levels.size());
    const int n = newdata.n_rows;
    std::vector<std::vector<int>> votes(n, std::vector<int>(K, 0));
    for (std::size_t m = 0; m < st.models.size(); ++m) {
      Rng ch = rng.child(ExecLevel::Unit, static_cast<std::uint64_t>(m));
      const RawPrediction raw = raw_predict(*st.models[m], newdata, ch);
      for (int i = 0; i < n; ++i) {
        const int c = raw.response_cls[i];
        if (c < 0) continue;
        votes[i][c == 0 ? st.pairs[m].first : st.pairs[m].second] += 1;
      }
    }
    RawPrediction out;
    out.response_cls.assign(n, -1);
    for (int i = 0; i < n; ++i) {
      int best = 0, total = 0;
      for (int c = 0; c < K; ++c) {
        total += votes[i][c];
        if (votes[i][c] > votes[i][best]) best = c;
      }
      out.response_cls[i] = total > 0 ? best : -1;
    }
    return out;
  };
  return std::make_shared<const Learner>(std::move(w));
}

std::vector<ModelPtr> get_costsens_models(const ModelPtr& model) {
  if (!model) throw ValueError("get_costsens_models: model is null");
  if (is_failure_model(*model))
    throw LearnerError("cannot extract models from a failure model");
  const auto* st = std::any_cast<CostSensState>(&model->state);
  if (!st)
    throw ValueError("model was not trained by a costsens wrapper");
  return st->models;
}

}  // namespace mlkit
