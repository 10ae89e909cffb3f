#include "mlkit/wrappers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "mlkit/error.hpp"

namespace mlkit {

namespace {

int round_half_even(double x) { return static_cast<int>(std::nearbyint(x)); }

Learner wrap_base(const LearnerPtr& learner, const std::string& suffix) {
  Learner w = *learner;
  w.id = learner->id + "." + suffix;
  w.class_name = learner->class_name + "." + suffix;
  w.next = learner;
  w.hyperpars = {};
  return w;
}

// forwarded inner learner: wrapper-owned hyperpars stripped, predict type
// and error handling aligned with the wrapper
LearnerPtr inner_learner(const Learner& lrn,
                         const std::set<std::string>& own_pars,
                         PredictType predict_type) {
  ParamMap fwd;
  for (const auto& [k, v] : lrn.hyperpars)
    if (!own_pars.count(k)) fwd[k] = v;
  LearnerPtr inner = lrn.next;
  if (!fwd.empty()) inner = set_hyperpars(inner, fwd);
  if (inner->predict_type != predict_type)
    inner = set_predict_type(inner, predict_type);
  return inner;
}

ModelPtr checked_train(const LearnerPtr& learner, const Task& task,
                       const std::vector<double>& weights, Rng rng) {
  ModelPtr m = train(learner, task, {}, weights, rng);
  if (is_failure_model(m)) throw std::runtime_error(get_failure_message(*m));
  return m;
}

const ModelPtr& inner_model(const WrappedModel& model) {
  return std::any_cast<const ModelPtr&>(model.state);
}

RawPrediction forward_predict(const Learner&, const WrappedModel& model,
                              const Dataset& newdata, Rng& rng) {
  return raw_predict(*inner_model(model), newdata, rng);
}

std::map<std::string, double> forward_featimp(const Learner&,
                                              const WrappedModel& model) {
  return get_feature_importance(inner_model(model));
}

// class code -> 1-based task rows, classif tasks
std::vector<std::vector<int>> rows_by_class(const Task& task) {
  const auto& tc = task.target_col();
  std::vector<std::vector<int>> rows(task.n_classes());
  for (int i = 0; i < tc.size(); ++i)
    if (!tc.missing(i)) rows[static_cast<int>(tc.values[i])].push_back(i + 1);
  return rows;
}

int resolve_class(const Task& task, const std::string& cl, bool smallest) {
  if (!cl.empty()) {
    const auto levels = task.class_levels();
    const auto it = std::find(levels.begin(), levels.end(), cl);
    if (it == levels.end()) throw ValueError("unknown class: " + cl);
    return static_cast<int>(it - levels.begin());
  }
  const auto rows = rows_by_class(task);
  int best = 0;
  for (int c = 1; c < static_cast<int>(rows.size()); ++c) {
    if (smallest ? rows[c].size() < rows[best].size()
                 : rows[c].size() > rows[best].size())
      best = c;
  }
  return best;
}

struct BagState {
  std::vector<ModelPtr> members;
};

RawPrediction vote_predict(const WrappedModel& model, const Dataset& newdata,
                           Rng& rng) {
  const auto& st = std::any_cast<const BagState&>(model.state);
  const int iters = static_cast<int>(st.members.size());
  const int n = newdata.n_rows;
  std::vector<RawPrediction> raws(iters);
  for (int i = 0; i < iters; ++i) {
    Rng mrng = rng.child(ExecLevel::Unit, static_cast<std::uint64_t>(i));
    raws[i] = raw_predict(*st.members[i], newdata, mrng);
  }
  RawPrediction out;
  if (model.learner->kind == TaskKind::Classif) {
    const int K = static_cast<int>(model.task_desc.class_levels.size());
    out.prob = Matrix(n, K);
    out.response_cls.assign(n, -1);
    for (int r = 0; r < n; ++r) {
      std::vector<int> votes(K, 0);
      for (int i = 0; i < iters; ++i) {
        const int c = raws[i].response_cls[r];
        if (c >= 0) votes[c] += 1;
      }
      int total = 0, best = 0;
      for (int k = 0; k < K; ++k) {
        total += votes[k];
        if (votes[k] > votes[best]) best = k;
      }
      for (int k = 0; k < K; ++k)
        out.prob.at(r, k) =
            total > 0 ? static_cast<double>(votes[k]) / total : kMissing;
      out.response_cls[r] = total > 0 ? best : -1;
    }
  } else {
    out.response_num.assign(n, kMissing);
    out.se.assign(n, 0.0);
    for (int r = 0; r < n; ++r) {
      double sum = 0;
      int cnt = 0;
      for (int i = 0; i < iters; ++i)
        if (!is_missing(raws[i].response_num[r])) {
          sum += raws[i].response_num[r];
          ++cnt;
        }
      if (cnt == 0) continue;
      const double mean = sum / cnt;
      out.response_num[r] = mean;
      double ss = 0;
      for (int i = 0; i < iters; ++i)
        if (!is_missing(raws[i].response_num[r]))
          ss += (raws[i].response_num[r] - mean) * (raws[i].response_num[r] - mean);
      out.se[r] = cnt > 1 ? std::sqrt(ss / (cnt - 1)) : 0.0;
    }
  }
  return out;
}

}  // namespace

LearnerPtr make_bagging_wrapper(const LearnerPtr& learner, int bw_iters,
                                bool bw_replace,
                                std::optional<double> bw_size,
                                double bw_feats) {
  if (learner->predict_type != PredictType::Response)
    throw ValueError("bagging needs a response-type base learner");
  if (learner->kind != TaskKind::Classif && learner->kind != TaskKind::Regr)
    throw ValueError("bagging supports classif and regr learners");
  if (!(bw_feats > 0.0 && bw_feats <= 1.0))
    throw ValueError("bw.feats must lie in (0,1]");
  if (bw_iters < 1) throw ValueError("bw.iters must be >= 1");
  const double size = bw_size.value_or(bw_replace ? 1.0 : 2.0 / 3.0);
  if (!(size > 0.0)) throw ValueError("bw.size must be positive");

  Learner w = wrap_base(learner, "bagged");
  // votes/averages make prob (classif) and se (regr) available
  w.properties.insert(learner->kind == TaskKind::Classif ? "prob" : "se");
  w.properties.erase("featimp");
  ParamSet own;
  own.add(make_integer_param("bw.iters", 1, 1000000000, bw_iters));
  own.add(make_logical_param("bw.replace", bw_replace));
  own.add(make_numeric_param("bw.size", 0.0, 1.0));
  own.add(make_numeric_param("bw.feats", 0.0, 1.0, bw_feats));
  w.param_set = learner->param_set.merged_with(own);
  w.hyperpars["bw.iters"] = bw_iters;
  w.hyperpars["bw.replace"] = bw_replace;
  w.hyperpars["bw.size"] = size;
  w.hyperpars["bw.feats"] = bw_feats;

  w.fit = [](const Learner& lrn, const Task& task,
             const std::vector<double>& weights, Rng& rng) -> std::any {
    const int iters = static_cast<int>(lrn.par_int("bw.iters"));
    const bool replace = lrn.par_flag("bw.replace");
    const double size = lrn.par_num("bw.size");
    const double feats = lrn.par_num("bw.feats");
    if (!(size > 0.0)) throw ValueError("bw.size must be positive");
    if (!(feats > 0.0 && feats <= 1.0))
      throw ValueError("bw.feats must lie in (0,1]");
    const LearnerPtr inner =
        inner_learner(lrn, {"bw.iters", "bw.replace", "bw.size", "bw.feats"},
                      PredictType::Response);
    const int n = task.n_rows();
    const std::vector<std::string> features = task.feature_names();
    const int p = static_cast<int>(features.size());
    const int nm = std::max(1, round_half_even(size * n));
    const int nf = std::max(1, round_half_even(feats * p));
    BagState st;
    st.members.resize(iters);
    for (int i = 0; i < iters; ++i) {
      Rng mrng = rng.child(ExecLevel::Unit, static_cast<std::uint64_t>(i));
      std::vector<int> rows;
      if (replace) {
        rows.reserve(nm);
        for (int k = 0; k < nm; ++k)
          rows.push_back(static_cast<int>(mrng.unif_int(1, n)));
      } else {
        for (int r : mrng.sample_without_replacement(n, std::min(nm, n)))
          rows.push_back(r + 1);
        std::sort(rows.begin(), rows.end());
      }
      std::vector<std::string> fsub;
      if (nf >= p) {
        fsub = features;
      } else {
        std::vector<int> idx = mrng.sample_without_replacement(p, nf);
        std::sort(idx.begin(), idx.end());
        for (int j : idx) fsub.push_back(features[j]);
      }
      std::vector<double> wsub;
      if (!weights.empty())
        for (int r : rows) wsub.push_back(weights[r - 1]);
      st.members[i] = checked_train(inner, subset_task(task, rows, fsub), wsub,
                                    mrng.child(ExecLevel::Unit, 0));
    }
    return st;
  };
  w.predict = [](const Learner&, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    return vote_predict(model, newdata, rng);
  };
  w.featimp = nullptr;
  return std::make_shared<Learner>(std::move(w));
}

LearnerPtr make_overbagging_wrapper(const LearnerPtr& learner, double obw_rate,
                                    int obw_iters,
                                    const std::string& obw_maxcl) {
  if (learner->kind != TaskKind::Classif)
    throw ValueError("overbagging needs a classif learner");
  if (learner->predict_type != PredictType::Response)
    throw ValueError("overbagging needs a response-type base learner");
  if (obw_rate < 1.0) throw ValueError("obw.rate must be >= 1");
  if (obw_iters < 1) throw ValueError("obw.iters must be >= 1");
  if (obw_maxcl != "all" && obw_maxcl != "boot")
    throw ValueError("obw.maxcl must be all or boot");

  Learner w = wrap_base(learner, "overbagged");
  w.properties.insert("prob");
  w.properties.erase("featimp");
  ParamSet own;
  own.add(make_numeric_param("obw.rate", 1.0,
                             std::numeric_limits<double>::infinity(), obw_rate));
  own.add(make_integer_param("obw.iters", 1, 1000000000, obw_iters));
  own.add(make_discrete_param("obw.maxcl", {json("all"), json("boot")},
                              json(obw_maxcl)));
  w.param_set = learner->param_set.merged_with(own);
  w.hyperpars["obw.rate"] = obw_rate;
  w.hyperpars["obw.iters"] = obw_iters;
  w.hyperpars["obw.maxcl"] = obw_maxcl;

  w.fit = [](const Learner& lrn, const Task& task,
             const std::vector<double>& weights, Rng& rng) -> std::any {
    if (task.n_classes() != 2)
      throw ValueError("overbagging needs a binary task");
    const double rate = lrn.par_num("obw.rate");
    if (rate < 1.0) throw ValueError("obw.rate must be >= 1");
    const int iters = static_cast<int>(lrn.par_int("obw.iters"));
    const bool boot = lrn.par_str("obw.maxcl") == "boot";
    const LearnerPtr inner = inner_learner(
        lrn, {"obw.rate", "obw.iters", "obw.maxcl"}, PredictType::Response);
    const auto by_class = rows_by_class(task);
    const int min_cl =
        by_class[0].size() <= by_class[1].size() ? 0 : 1;
    const auto& mino = by_class[min_cl];
    const auto& majo = by_class[1 - min_cl];
    const int n_target = round_half_even(rate * static_cast<double>(mino.size()));
    BagState st;
    st.members.resize(iters);
    for (int i = 0; i < iters; ++i) {
      Rng mrng = rng.child(ExecLevel::Unit, static_cast<std::uint64_t>(i));
      std::vector<int> rows = mino;
      for (int k = static_cast<int>(mino.size()); k < n_target; ++k)
        rows.push_back(
            mino[mrng.unif_int(0, static_cast<std::int64_t>(mino.size()) - 1)]);
      if (boot) {
        for (std::size_t k = 0; k < majo.size(); ++k)
          rows.push_back(majo[mrng.unif_int(
              0, static_cast<std::int64_t>(majo.size()) - 1)]);
      } else {
        rows.insert(rows.end(), majo.begin(), majo.end());
      }
      std::vector<double> wsub;
      if (!weights.empty())
        for (int r : rows) wsub.push_back(weights[r - 1]);
      st.members[i] = checked_train(inner, subset_task(task, rows), wsub,
                                    mrng.child(ExecLevel::Unit, 0));
    }
    return st;
  };
  w.predict = [](const Learner&, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    return vote_predict(model, newdata, rng);
  };
  w.featimp = nullptr;
  return std::make_shared<Learner>(std::move(w));
}

Task oversample(const Task& task, double rate, const std::string& cl,
                Rng rng) {
  if (task.kind != TaskKind::Classif)
    throw ValueError("oversample needs a classif task");
  if (rate < 1.0) throw ValueError("oversampling rate must be >= 1");
  const int code = resolve_class(task, cl, true);
  const auto by_class = rows_by_class(task);
  const auto& rows_cl = by_class[code];
  if (rows_cl.empty()) throw ValueError("class has no observations");
  const int n_target = round_half_even(rate * static_cast<double>(rows_cl.size()));
  std::vector<int> rows(task.n_rows());
  for (int i = 0; i < task.n_rows(); ++i) rows[i] = i + 1;
  for (int k = static_cast<int>(rows_cl.size()); k < n_target; ++k)
    rows.push_back(rows_cl[rng.unif_int(
        0, static_cast<std::int64_t>(rows_cl.size()) - 1)]);
  return subset_task(task, rows);
}

Task undersample(const Task& task, double rate, const std::string& cl,
                 Rng rng) {
  if (task.kind != TaskKind::Classif)
    throw ValueError("undersample needs a classif task");
  if (!(rate > 0.0 && rate <= 1.0))
    throw ValueError("undersampling rate has to be between 0 and 1");
  const int code = resolve_class(task, cl, false);
  const auto by_class = rows_by_class(task);
  const auto& rows_cl = by_class[code];
  const int n_target = round_half_even(rate * static_cast<double>(rows_cl.size()));
  std::vector<int> keep_cl;
  for (int j : rng.sample_without_replacement(
           static_cast<int>(rows_cl.size()), n_target))
    keep_cl.push_back(rows_cl[j]);
  std::vector<bool> is_kept(task.n_rows() + 1, false);
  for (int r : keep_cl) is_kept[r] = true;
  const auto& tc = task.target_col();
  std::vector<int> rows;
  for (int i = 0; i < task.n_rows(); ++i) {
    const bool in_cl = !tc.missing(i) && static_cast<int>(tc.values[i]) == code;
    if (!in_cl || is_kept[i + 1]) rows.push_back(i + 1);
  }
  return subset_task(task, rows);
}

namespace {

LearnerPtr make_resample_task_wrapper(
    const LearnerPtr& learner, const std::string& suffix, ParamSet own_params,
    ParamMap own_values,
    std::function<Task(const Learner&, const Task&, Rng&)> transform) {
  if (learner->kind != TaskKind::Classif)
    throw ValueError("class balancing wrappers need a classif learner");
  Learner w = wrap_base(learner, suffix);
  std::set<std::string> own_ids;
  for (const auto& p : own_params.params) own_ids.insert(p.id);
  w.param_set = learner->param_set.merged_with(own_params);
  for (auto& [k, v] : own_values) w.hyperpars[k] = v;
  w.fit = [own_ids, transform](const Learner& lrn, const Task& task,
                               const std::vector<double>& weights,
                               Rng& rng) -> std::any {
    if (!weights.empty())
      throw ValueError("sampling wrappers do not combine with explicit weights");
    Rng srng = rng.child(ExecLevel::Unit, 0);
    const Task resampled = transform(lrn, task, srng);
    const LearnerPtr inner = inner_learner(lrn, own_ids, lrn.predict_type);
    return checked_train(inner, resampled, {}, rng.child(ExecLevel::Unit, 1));
  };
  w.predict = forward_predict;
  w.featimp = forward_featimp;
  return std::make_shared<Learner>(std::move(w));
}

}  // namespace

LearnerPtr make_oversample_wrapper(const LearnerPtr& learner, double osw_rate,
                                   const std::string& osw_cl) {
  if (osw_rate < 1.0) throw ValueError("oversampling rate must be >= 1");
  ParamSet own;
  own.add(make_numeric_param("osw.rate", 1.0,
                             std::numeric_limits<double>::infinity()));
  ParamMap vals{{"osw.rate", osw_rate}};
  return make_resample_task_wrapper(
      learner, "oversampled", std::move(own), std::move(vals),
      [osw_cl](const Learner& lrn, const Task& task, Rng& rng) {
        return oversample(task, lrn.par_num("osw.rate"), osw_cl, rng);
      });
}

LearnerPtr make_undersample_wrapper(const LearnerPtr& learner, double usw_rate,
                                    const std::string& usw_cl) {
  if (!(usw_rate > 0.0 && usw_rate <= 1.0))
    throw ValueError("undersampling rate has to be between 0 and 1");
  ParamSet own;
  own.add(make_numeric_param("usw.rate", 0.0, 1.0));
  ParamMap vals{{"usw.rate", usw_rate}};
  return make_resample_task_wrapper(
      learner, "undersampled", std::move(own), std::move(vals),
      [usw_cl](const Learner& lrn, const Task& task, Rng& rng) {
        return undersample(task, lrn.par_num("usw.rate"), usw_cl, rng);
      });
}

namespace {

// Gower distance over the task's feature columns; missing dimensions are
// skipped and the remaining weights renormalized
double gower(const Dataset& data, const std::vector<double>& ranges, int a,
             int b) {
  double sum = 0;
  int used = 0;
  for (int j = 0; j < data.ncol(); ++j) {
    const auto& c = data.columns[j];
    if (c.missing(a) || c.missing(b)) continue;
    ++used;
    if (c.kind == ColKind::Numeric) {
      if (ranges[j] > 0)
        sum += std::fabs(c.values[a] - c.values[b]) / ranges[j];
    } else {
      sum += c.values[a] != c.values[b] ? 1.0 : 0.0;
    }
  }
  if (used == 0) return std::numeric_limits<double>::infinity();
  return sum / used;
}

}  // namespace

Task smote(const Task& task, double rate, int nn, Rng rng) {
  if (task.kind != TaskKind::Classif || task.n_classes() != 2)
    throw ValueError("smote needs a binary classif task");
  if (rate < 1.0) throw ValueError("smote rate must be >= 1");
  if (nn < 1) throw ValueError("smote needs nn >= 1");
  const auto by_class = rows_by_class(task);
  const int min_cl = by_class[0].size() <= by_class[1].size() ? 0 : 1;
  const auto& mino = by_class[min_cl];
  const int n_min = static_cast<int>(mino.size());
  if (nn >= n_min)
    throw ValueError("smote needs more minority observations than nn");
  const int n_new =
      round_half_even((rate - 1.0) * static_cast<double>(n_min));
  if (n_new == 0) return task;

  const std::vector<std::string> features = task.feature_names();
  Dataset feat_data = task.data.select_cols(features);
  std::vector<double> ranges(feat_data.ncol(), 0.0);
  for (int j = 0; j < feat_data.ncol(); ++j) {
    const auto& c = feat_data.columns[j];
    if (c.kind != ColKind::Numeric) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < c.size(); ++i)
      if (!c.missing(i)) {
        lo = std::min(lo, c.values[i]);
        hi = std::max(hi, c.values[i]);
      }
    if (std::isfinite(lo) && hi > lo) ranges[j] = hi - lo;
  }

  // nn nearest minority neighbors per minority row (ties by index)
  std::vector<std::vector<int>> neighbors(n_min);
  for (int i = 0; i < n_min; ++i) {
    std::vector<std::pair<double, int>> d;
    for (int j = 0; j < n_min; ++j) {
      if (j == i) continue;
      d.push_back({gower(feat_data, ranges, mino[i] - 1, mino[j] - 1), j});
    }
    std::partial_sort(d.begin(), d.begin() + nn, d.end());
    for (int k = 0; k < nn; ++k) neighbors[i].push_back(d[k].second);
  }

  Dataset out = task.data;
  const int tgt_idx = out.col_index(task.targets[0]);
  for (int s = 0; s < n_new; ++s) {
    const int si = static_cast<int>(rng.unif_int(0, n_min - 1));
    const int ni = neighbors[si][rng.unif_int(0, nn - 1)];
    const int a = mino[si] - 1, b = mino[ni] - 1;
    const double u = rng.unif();
    for (int j = 0; j < out.ncol(); ++j) {
      auto& c = out.columns[j];
      if (j == tgt_idx) {
        c.values.push_back(task.data.columns[j].values[a]);
        continue;
      }
      const double va = task.data.columns[j].values[a];
      const double vb = task.data.columns[j].values[b];
      if (c.kind == ColKind::Numeric) {
        c.values.push_back(va + u * (vb - va));
      } else {
        c.values.push_back(rng.unif() < 0.5 ? va : vb);
      }
    }
    out.n_rows += 1;
  }
  return with_data(task, std::move(out));
}

LearnerPtr make_smote_wrapper(const LearnerPtr& learner, double sw_rate,
                              int sw_nn) {
  if (sw_rate < 1.0) throw ValueError("smote rate must be >= 1");
  if (sw_nn < 1) throw ValueError("smote needs nn >= 1");
  ParamSet own;
  own.add(make_numeric_param("sw.rate", 1.0,
                             std::numeric_limits<double>::infinity()));
  own.add(make_integer_param("sw.nn", 1, 1000000, sw_nn));
  ParamMap vals{{"sw.rate", sw_rate}, {"sw.nn", sw_nn}};
  return make_resample_task_wrapper(
      learner, "smoted", std::move(own), std::move(vals),
      [](const Learner& lrn, const Task& task, Rng& rng) {
        return smote(task, lrn.par_num("sw.rate"),
                     static_cast<int>(lrn.par_int("sw.nn")), rng);
      });
}

namespace {

LearnerPtr make_weighted_classes_impl(const LearnerPtr& learner,
                                      json weight_value) {
  if (learner->kind != TaskKind::Classif)
    throw ValueError("class weighting needs a classif learner");
  const bool has_cw = learner->has_property("class.weights");
  const bool has_w = learner->has_property("weights");
  if (!has_cw && !has_w)
    throw ValueError("learner " + learner->id +
                     " supports neither class weights nor observation weights");
  Learner w = wrap_base(learner, "weightedclasses");
  ParamSet own;
  own.add(make_numeric_param("wcw.weight", 0.0,
                             std::numeric_limits<double>::infinity(), 1.0));
  w.param_set = learner->param_set.merged_with(own);
  w.hyperpars["wcw.weight"] = std::move(weight_value);

  w.fit = [has_cw](const Learner& lrn, const Task& task,
                   const std::vector<double>& weights, Rng& rng) -> std::any {
    const json wv = lrn.par("wcw.weight");
    const int K = task.n_classes();
    std::vector<double> cw;
    if (wv.is_array()) {
      cw = wv.get<std::vector<double>>();
      if (static_cast<int>(cw.size()) != K)
        throw ValueError("wcw.weight vector length must match the classes");
    } else {
      if (K != 2)
        throw ValueError("scalar wcw.weight needs a binary task; "
                         "multiclass requires a full vector");
      const auto levels = task.class_levels();
      const int pos = static_cast<int>(
          std::find(levels.begin(), levels.end(), task.positive) -
          levels.begin());
      cw.assign(2, 1.0);
      cw[pos] = wv.get<double>();
    }
    LearnerPtr inner = inner_learner(lrn, {"wcw.weight"}, lrn.predict_type);
    if (has_cw) {
      inner = set_hyperpars(inner, {{"class.weights", cw}});
      return checked_train(inner, task, weights, rng);
    }
    const auto& tc = task.target_col();
    std::vector<double> obs(task.n_rows(), 1.0);
    for (int i = 0; i < task.n_rows(); ++i)
      if (!tc.missing(i)) obs[i] = cw[static_cast<int>(tc.values[i])];
    if (!weights.empty())
      for (int i = 0; i < task.n_rows(); ++i) obs[i] *= weights[i];
    return checked_train(inner, task, obs, rng);
  };
  w.predict = forward_predict;
  w.featimp = forward_featimp;
  return std::make_shared<Learner>(std::move(w));
}

}  // namespace

LearnerPtr make_weighted_classes_wrapper(const LearnerPtr& learner,
                                         double wcw_weight) {
  return make_weighted_classes_impl(learner, json(wcw_weight));
}

LearnerPtr make_weighted_classes_wrapper(
    const LearnerPtr& learner, const std::vector<double>& wcw_weight) {
  return make_weighted_classes_impl(learner, json(wcw_weight));
}

namespace {

struct PreprocState {
  ModelPtr inner;
  json control;
  ParamMap args;
};

}  // namespace

LearnerPtr make_preproc_wrapper(const LearnerPtr& learner,
                                PreprocTrainFn train_fn,
                                PreprocPredictFn predict_fn,
                                const ParamSet& par_set,
                                const ParamMap& par_vals) {
  Learner w = wrap_base(learner, "preproc");
  std::set<std::string> own_ids;
  for (const auto& p : par_set.params) own_ids.insert(p.id);
  const ParamSet own = par_set;
  w.param_set = learner->param_set.merged_with(par_set);
  for (const auto& [k, v] : par_vals) {
    if (!own_ids.count(k))
      throw ValueError("par_vals entry is not a preproc param: " + k);
    w.hyperpars[k] = v;
  }

  w.fit = [train_fn, own_ids, own](const Learner& lrn, const Task& task,
                                   const std::vector<double>& weights,
                                   Rng& rng) -> std::any {
    ParamMap args;
    for (const auto& [k, v] : lrn.hyperpars)
      if (own_ids.count(k)) args[k] = v;
    args = own.with_defaults(args);
    PreprocTrainOut out = train_fn(task.data, task.targets, args);
    if (out.control.is_null())
      throw ValueError("preproc train hook returned no control object");
    const LearnerPtr inner = inner_learner(lrn, own_ids, lrn.predict_type);
    ModelPtr m = checked_train(inner, with_data(task, std::move(out.data)),
                               weights, rng);
    return PreprocState{std::move(m), std::move(out.control), std::move(args)};
  };
  w.predict = [predict_fn](const Learner& lrn, const WrappedModel& model,
                           const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const PreprocState&>(model.state);
    Dataset nd = predict_fn(newdata, model.task_desc.targets, st.args,
                            st.control);
    return raw_predict(*st.inner, nd, rng);
  };
  w.featimp = [](const Learner&, const WrappedModel& model) {
    const auto& st = std::any_cast<const PreprocState&>(model.state);
    return get_feature_importance(st.inner);
  };
  return std::make_shared<Learner>(std::move(w));
}

namespace {

bool is_preproc_target(const std::vector<std::string>& targets,
                       const std::string& name) {
  return std::find(targets.begin(), targets.end(), name) != targets.end();
}

}  // namespace

LearnerPtr make_preproc_wrapper_scale(const LearnerPtr& learner, bool center,
                                      bool scale) {
  PreprocTrainFn train_fn = [](const Dataset& data,
                               const std::vector<std::string>& targets,
                               const ParamMap& args) {
    const bool center = args.at("center").get<bool>();
    const bool scale = args.at("scale").get<bool>();
    PreprocTrainOut out;
    out.data = data;
    json centers = json::object(), scales = json::object();
    for (auto& c : out.data.columns) {
      if (c.kind != ColKind::Numeric || is_preproc_target(targets, c.name))
        continue;
      double m = 0.0, s = 1.0;
      int n = 0;
      if (center || scale) {
        double sum = 0;
        for (int i = 0; i < c.size(); ++i)
          if (!c.missing(i)) {
            sum += c.values[i];
            ++n;
          }
        m = n > 0 ? sum / n : 0.0;
      }
      if (scale) {
        double ss = 0;
        for (int i = 0; i < c.size(); ++i)
          if (!c.missing(i)) ss += (c.values[i] - m) * (c.values[i] - m);
        s = n > 1 ? std::sqrt(ss / (n - 1)) : 1.0;
        if (s == 0.0) s = 1.0;
      }
      if (!center) m = 0.0;
      for (auto& v : c.values)
        if (!is_missing(v)) v = (v - m) / s;
      centers[c.name] = m;
      scales[c.name] = s;
    }
    out.control = json{{"center", std::move(centers)},
                       {"scale", std::move(scales)}};
    return out;
  };
  PreprocPredictFn predict_fn = [](const Dataset& data,
                                   const std::vector<std::string>&,
                                   const ParamMap&, const json& control) {
    Dataset out = data;
    const auto& centers = control.at("center");
    const auto& scales = control.at("scale");
    for (auto& c : out.columns) {
      if (!centers.contains(c.name)) continue;
      const double m = centers.at(c.name).get<double>();
      const double s = scales.at(c.name).get<double>();
      for (auto& v : c.values)
        if (!is_missing(v)) v = (v - m) / s;
    }
    return out;
  };
  ParamSet ps;
  ps.add(make_logical_param("center", center));
  ps.add(make_logical_param("scale", scale));
  return make_preproc_wrapper(learner, train_fn, predict_fn, ps,
                              {{"center", center}, {"scale", scale}});
}

LearnerPtr make_preproc_wrapper_pca(const LearnerPtr& learner,
                                    std::optional<double> thresh,
                                    std::optional<int> n_comp) {
  if (thresh && n_comp)
    throw ValueError("give at most one of thresh/n_comp");
  if (thresh && !(*thresh > 0.0 && *thresh <= 1.0))
    throw ValueError("thresh must lie in (0,1]");
  if (n_comp && *n_comp < 1) throw ValueError("n_comp must be >= 1");
  const double th = thresh.value_or(0.9);
  const int nc = n_comp.value_or(0);

  PreprocTrainFn train_fn = [th, nc](const Dataset& data,
                                     const std::vector<std::string>& targets,
                                     const ParamMap&) {
    std::vector<std::string> num_cols;
    for (const auto& c : data.columns)
      if (c.kind == ColKind::Numeric && !is_preproc_target(targets, c.name))
        num_cols.push_back(c.name);
    const int p = static_cast<int>(num_cols.size());
    if (p == 0) throw ValueError("pca needs at least one numeric feature");
    if (nc > p) throw ValueError("n_comp exceeds the numeric feature count");
    const int n = data.n_rows;

    Eigen::MatrixXd x(n, p);
    json means = json::array(), sds = json::array();
    for (int j = 0; j < p; ++j) {
      const auto& c = data.col(num_cols[j]);
      if (c.has_missings())
        throw ValueError("pca cannot handle missing values in " + c.name);
      double sum = 0;
      for (int i = 0; i < n; ++i) sum += c.values[i];
      const double m = sum / n;
      double ss = 0;
      for (int i = 0; i < n; ++i) ss += (c.values[i] - m) * (c.values[i] - m);
      double s = n > 1 ? std::sqrt(ss / (n - 1)) : 1.0;
      if (s == 0.0) s = 1.0;
      for (int i = 0; i < n; ++i) x(i, j) = (c.values[i] - m) / s;
      means.push_back(m);
      sds.push_back(s);
    }
    const Eigen::MatrixXd cov =
        x.transpose() * x / std::max(1, n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    // eigenvalues ascending; walk from the top
    std::vector<int> order(p);
    for (int j = 0; j < p; ++j) order[j] = p - 1 - j;
    const double total = std::max(es.eigenvalues().sum(), 1e-300);
    int m = nc > 0 ? nc : p;
    if (nc == 0) {
      double cum = 0;
      for (int j = 0; j < p; ++j) {
        cum += es.eigenvalues()(order[j]);
        if (cum / total >= th) {
          m = j + 1;
          break;
        }
      }
    }
    json loadings = json::array();
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd v = es.eigenvectors().col(order[k]);
      // deterministic sign: largest-magnitude entry positive
      int arg = 0;
      for (int j = 1; j < p; ++j)
        if (std::fabs(v(j)) > std::fabs(v(arg))) arg = j;
      if (v(arg) < 0) v = -v;
      json col = json::array();
      for (int j = 0; j < p; ++j) col.push_back(v(j));
      loadings.push_back(std::move(col));
    }

    PreprocTrainOut out;
    out.control = json{{"cols", num_cols},
                       {"means", std::move(means)},
                       {"sds", std::move(sds)},
                       {"loadings", std::move(loadings)}};
    // non-numeric features pass through; numerics become PC scores
    Dataset d;
    d.n_rows = n;
    for (const auto& c : data.columns)
      if (c.kind != ColKind::Numeric || is_preproc_target(targets, c.name))
        d.add_column(c);
    for (int k = 0; k < m; ++k) {
      FeatureColumn pc;
      pc.name = "PC" + std::to_string(k + 1);
      pc.kind = ColKind::Numeric;
      pc.values.resize(n);
      for (int i = 0; i < n; ++i) {
        double dot = 0;
        for (int j = 0; j < p; ++j)
          dot += x(i, j) * out.control["loadings"][k][j].get<double>();
        pc.values[i] = dot;
      }
      d.add_column(std::move(pc));
    }
    out.data = std::move(d);
    return out;
  };
  PreprocPredictFn predict_fn = [](const Dataset& data,
                                   const std::vector<std::string>& targets,
                                   const ParamMap&, const json& control) {
    const auto cols = control.at("cols").get<std::vector<std::string>>();
    const int p = static_cast<int>(cols.size());
    const int m = static_cast<int>(control.at("loadings").size());
    const int n = data.n_rows;
    Eigen::MatrixXd x(n, p);
    for (int j = 0; j < p; ++j) {
      const auto& c = data.col(cols[j]);
      if (c.has_missings())
        throw ValueError("pca cannot handle missing values in " + c.name);
      const double mu = control.at("means")[j].get<double>();
      const double s = control.at("sds")[j].get<double>();
      for (int i = 0; i < n; ++i) x(i, j) = (c.values[i] - mu) / s;
    }
    Dataset d;
    d.n_rows = n;
    for (const auto& c : data.columns) {
      if (std::find(cols.begin(), cols.end(), c.name) != cols.end()) continue;
      if (c.kind == ColKind::Numeric && !is_preproc_target(targets, c.name) &&
          c.name.rfind("PC", 0) == 0)
        continue;  // never double-transform already-projected data
      d.add_column(c);
    }
    for (int k = 0; k < m; ++k) {
      FeatureColumn pc;
      pc.name = "PC" + std::to_string(k + 1);
      pc.kind = ColKind::Numeric;
      pc.values.resize(n);
      for (int i = 0; i < n; ++i) {
        double dot = 0;
        for (int j = 0; j < p; ++j)
          dot += x(i, j) * control.at("loadings")[k][j].get<double>();
        pc.values[i] = dot;
      }
      d.add_column(std::move(pc));
    }
    return d;
  };
  return make_preproc_wrapper(learner, train_fn, predict_fn, {}, {});
}

Task downsample(const Task& task, double perc, Rng rng) {
  if (!(perc > 0.0 && perc <= 1.0))
    throw ValueError("dw.perc must lie in (0,1]");
  const int n = task.n_rows();
  const int k = std::max(1, round_half_even(perc * n));
  std::vector<int> rows;
  for (int r : rng.sample_without_replacement(n, std::min(k, n)))
    rows.push_back(r + 1);
  std::sort(rows.begin(), rows.end());
  return subset_task(task, rows);
}

LearnerPtr make_downsample_wrapper(const LearnerPtr& learner, double dw_perc) {
  if (!(dw_perc > 0.0 && dw_perc <= 1.0))
    throw ValueError("dw.perc must lie in (0,1]");
  Learner w = wrap_base(learner, "downsampled");
  ParamSet own;
  own.add(make_numeric_param("dw.perc", 0.0, 1.0, 1.0));
  w.param_set = learner->param_set.merged_with(own);
  w.hyperpars["dw.perc"] = dw_perc;
  w.fit = [](const Learner& lrn, const Task& task,
             const std::vector<double>& weights, Rng& rng) -> std::any {
    if (!weights.empty())
      throw ValueError("sampling wrappers do not combine with explicit weights");
    const double perc = lrn.par_num("dw.perc");
    if (!(perc > 0.0 && perc <= 1.0))
      throw ValueError("dw.perc must lie in (0,1]");
    const Task down = downsample(task, perc, rng.child(ExecLevel::Unit, 0));
    const LearnerPtr inner = inner_learner(lrn, {"dw.perc"}, lrn.predict_type);
    return checked_train(inner, down, {}, rng.child(ExecLevel::Unit, 1));
  };
  w.predict = forward_predict;
  w.featimp = forward_featimp;
  return std::make_shared<Learner>(std::move(w));
}

namespace {

struct TuneWrapperState {
  ModelPtr inner;
  TuneResult result;
};

}  // namespace

LearnerPtr make_tune_wrapper(const LearnerPtr& learner,
                             const ResampleDesc& desc,
                             const ParamSet& param_set,
                             const TuneControl& control,
                             std::vector<Measure> measures) {
  Learner w = wrap_base(learner, "tuned");
  w.fit = [desc, param_set, control, measures](
              const Learner& lrn, const Task& task,
              const std::vector<double>& weights, Rng& rng) -> std::any {
    LearnerPtr inner = inner_learner(lrn, {}, lrn.predict_type);
    TuneResult tr = tune_params(inner, task, desc, param_set, control,
                                measures, rng.child(ExecLevel::Unit, 0));
    inner = set_hyperpars(inner, tr.x_trafo);
    ModelPtr m = checked_train(inner, task, weights,
                               rng.child(ExecLevel::Unit, 1));
    return TuneWrapperState{std::move(m), std::move(tr)};
  };
  w.predict = [](const Learner&, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const TuneWrapperState&>(model.state);
    return raw_predict(*st.inner, newdata, rng);
  };
  w.featimp = [](const Learner&, const WrappedModel& model) {
    const auto& st = std::any_cast<const TuneWrapperState&>(model.state);
    return get_feature_importance(st.inner);
  };
  return std::make_shared<Learner>(std::move(w));
}

TuneResult get_tune_result(const ModelPtr& model) {
  if (!model) throw ValueError("null model");
  const auto* st = std::any_cast<TuneWrapperState>(&model->state);
  if (st == nullptr)
    throw ValueError("model was not trained by a tune wrapper");
  return st->result;
}

}  // namespace mlkit
