#include "mlkit/tune.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mlkit/error.hpp"
#include "mlkit/parallel.hpp"

namespace mlkit {

namespace {

json cell_from(const json& v, const Param* p, bool trafo) {
  if (trafo && p != nullptr && p->trafo) return p->trafo(v);
  return v;
}

}  // namespace

Table OptPath::as_table(bool trafo, bool include_diagnostics) const {
  Table t;
  t.columns = par_ids;
  for (const auto& m : measure_names) t.columns.push_back(m);
  t.columns.push_back("dob");
  if (include_diagnostics) t.columns.push_back("error.message");
  t.columns.push_back("exec.time");
  for (const auto& r : rows) {
    auto& row = t.add_row();
    int c = 0;
    for (const auto& id : par_ids) {
      auto it = r.x.find(id);
      row[c++] = it == r.x.end() ? json()
                                 : cell_from(it->second, param_set.find(id), trafo);
    }
    for (double v : r.y) row[c++] = is_missing(v) ? json() : json(v);
    row[c++] = r.dob;
    if (include_diagnostics)
      row[c++] = r.error_message.empty() ? json() : json(r.error_message);
    row[c++] = r.exec_time;
  }
  return t;
}

std::string OptPath::to_csv() const { return as_table(false, true).to_csv(); }

json OptPath::to_json() const {
  json j;
  j["par.ids"] = par_ids;
  j["measure.names"] = measure_names;
  json rows_j = json::array();
  for (const auto& r : rows) {
    json rj;
    rj["x"] = r.x;
    json y = json::array();
    for (double v : r.y) y.push_back(is_missing(v) ? json() : json(v));
    rj["y"] = y;
    rj["dob"] = r.dob;
    rj["error.message"] = r.error_message;
    rj["exec.time"] = r.exec_time;
    rows_j.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows_j);
  return j;
}

OptPath opt_path_from_json(const json& j) {
  OptPath op;
  op.par_ids = j.at("par.ids").get<std::vector<std::string>>();
  op.measure_names = j.at("measure.names").get<std::vector<std::string>>();
  for (const auto& rj : j.at("rows")) {
    OptPathRow r;
    for (auto it = rj.at("x").begin(); it != rj.at("x").end(); ++it)
      r.x[it.key()] = it.value();
    for (const auto& v : rj.at("y"))
      r.y.push_back(v.is_null() ? kMissing : v.get<double>());
    r.dob = rj.at("dob").get<int>();
    r.error_message = rj.at("error.message").get<std::string>();
    r.exec_time = rj.at("exec.time").get<double>();
    op.rows.push_back(std::move(r));
  }
  return op;
}

json TuneResult::to_json() const {
  json j;
  j["x"] = x;
  j["x.trafo"] = x_trafo;
  json y_j = json::object();
  for (const auto& [name, v] : y) y_j[name] = is_missing(v) ? json() : json(v);
  j["y"] = std::move(y_j);
  if (!threshold.empty()) {
    j["threshold"] = threshold;
    j["threshold.value"] = threshold_value;
  }
  j["opt.path"] = opt_path.to_json();
  return j;
}

TuneResult tune_result_from_json(const json& j) {
  TuneResult tr;
  for (auto it = j.at("x").begin(); it != j.at("x").end(); ++it)
    tr.x[it.key()] = it.value();
  for (auto it = j.at("x.trafo").begin(); it != j.at("x.trafo").end(); ++it)
    tr.x_trafo[it.key()] = it.value();
  for (auto it = j.at("y").begin(); it != j.at("y").end(); ++it)
    tr.y.push_back({it.key(), it.value().is_null() ? kMissing
                                                   : it.value().get<double>()});
  if (j.contains("threshold")) {
    tr.threshold = j.at("threshold").get<std::vector<double>>();
    const auto& tv = j.at("threshold.value");
    tr.threshold_value = tv.is_null() ? kMissing : tv.get<double>();
  }
  tr.opt_path = opt_path_from_json(j.at("opt.path"));
  return tr;
}

namespace {

struct EvalOutcome {
  std::vector<double> y;
  std::string error;
  double exec_time = 0.0;
};

// one resample call per design point; failures land in the path, imputed
EvalOutcome evaluate_config(const LearnerPtr& learner, const Task& task,
                            const ResampleInstance& instance,
                            const ParamSet& ps, const ParamMap& config,
                            const std::vector<Measure>& measures,
                            const TuneControl& control, Rng ev_rng) {
  EvalOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  out.y.assign(measures.size(), kMissing);
  try {
    const LearnerPtr lrn = set_hyperpars(learner, ps.apply_trafos(config));
    ResampleOpts opts;
    opts.measures = measures;
    opts.keep_pred = false;
    const ResampleResult rr = resample(lrn, task, instance, opts, ev_rng);
    for (std::size_t j = 0; j < measures.size(); ++j) out.y[j] = rr.aggr[j].second;
    for (const auto& msg : rr.err_msgs)
      if (!msg.empty()) {
        out.error = msg;
        break;
      }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  if (!out.error.empty()) {
    for (std::size_t j = 0; j < measures.size(); ++j)
      if (is_missing(out.y[j]))
        out.y[j] = j == 0 ? control.impute_val.value_or(measures[0].worst)
                          : measures[j].worst;
  }
  out.exec_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

OptPath run_design(const LearnerPtr& learner, const Task& task,
                   const ResampleDesc& desc, const ParamSet& ps,
                   const TuneControl& control,
                   const std::vector<Measure>& measures, Rng& rng) {
  std::vector<ParamMap> design;
  if (control.method == "grid") {
    design = grid_design(ps, control.resolution);
  } else if (control.method == "random") {
    Rng drng = rng.child(ExecLevel::Unit, 0);
    design = random_design(ps, control.maxit, drng);
  } else {
    throw ValueError("unknown tune method: " + control.method);
  }
  if (design.empty()) throw ValueError("tuning design is empty");

  const ResampleInstance instance =
      make_resample_instance(desc, task, rng.child(ExecLevel::Instance, 0));

  OptPath op;
  op.param_set = ps;
  for (const auto& p : ps.params) op.par_ids.push_back(p.id);
  for (const auto& m : measures) op.measure_names.push_back(m.aggr_name());
  op.rows.resize(design.size());
  parallel_for("tuneParams", static_cast<int>(design.size()), [&](int i) {
    EvalOutcome out = evaluate_config(
        learner, task, instance, ps, design[i], measures, control,
        rng.child(ExecLevel::TuneParams, static_cast<std::uint64_t>(i)));
    op.rows[i] = {design[i], std::move(out.y), i + 1, std::move(out.error),
                  out.exec_time};
  });
  return op;
}

int best_row(const OptPath& op, const Measure& first) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(op.rows.size()); ++i) {
    const double cur = op.rows[i].y[0], inc = op.rows[best].y[0];
    if (is_missing(cur)) continue;
    if (is_missing(inc) || (first.minimize ? cur < inc : cur > inc)) best = i;
  }
  return best;
}

}  // namespace

TuneResult tune_params(const LearnerPtr& learner, const Task& task,
                       const ResampleDesc& desc, const ParamSet& param_set,
                       const TuneControl& control,
                       std::vector<Measure> measures, Rng rng) {
  if (measures.empty()) measures.push_back(get_default_measure(task));
  TuneResult res;
  res.opt_path =
      run_design(learner, task, desc, param_set, control, measures, rng);
  const int bi = best_row(res.opt_path, measures[0]);
  res.x = res.opt_path.rows[bi].x;
  res.x_trafo = param_set.apply_trafos(res.x);
  for (std::size_t j = 0; j < measures.size(); ++j)
    res.y.emplace_back(res.opt_path.measure_names[j], res.opt_path.rows[bi].y[j]);

  if (control.tune_threshold) {
    if (task.kind != TaskKind::Classif ||
        learner->predict_type != PredictType::Prob)
      throw ValueError(
          "threshold tuning needs a classif learner with predict type prob");
    const LearnerPtr lrn = set_hyperpars(learner, res.x_trafo);
    ResampleOpts opts;
    opts.measures = measures;
    const ResampleInstance instance = make_resample_instance(
        desc, task, rng.child(ExecLevel::Instance, 0));
    const ResampleResult rr =
        resample(lrn, task, instance, opts,
                 rng.child(ExecLevel::TuneParams, static_cast<std::uint64_t>(bi)));
    if (!rr.has_pred)
      throw ValueError("threshold tuning needs kept predictions");
    const ThresholdTuneResult tt =
        tune_threshold(rr.pred, measures[0], 5000, rng.child(ExecLevel::Unit, 1));
    res.threshold = tt.threshold;
    res.threshold_value = tt.value;
  }
  return res;
}

ThresholdTuneResult tune_threshold(const Prediction& pred,
                                   const Measure& measure, int ndraws,
                                   Rng rng) {
  if (pred.task_kind != TaskKind::Classif)
    throw ValueError("threshold tuning needs a classification prediction");
  if (pred.predict_type != PredictType::Prob)
    throw ValueError("threshold tuning needs probability predictions");
  if (!pred.has_truth()) throw ValueError("threshold tuning needs truth");
  const int K = static_cast<int>(pred.class_levels.size());

  auto value_at = [&](const std::vector<double>& th) {
    const Prediction p = set_threshold(pred, th);
    return performance(p, measure, nullptr, nullptr);
  };
  auto better = [&](double a, double b) {
    if (is_missing(a)) return false;
    if (is_missing(b)) return true;
    return measure.minimize ? a < b : a > b;
  };

  ThresholdTuneResult out;
  if (K == 2) {
    const int pos = pred.positive_index();
    for (int i = 0; i <= 1000; ++i) {
      const double t = static_cast<double>(i) / 1000.0;
      std::vector<double> th(2);
      th[pos] = t;
      th[1 - pos] = 1.0 - t;
      const double v = value_at(th);
      if (out.threshold.empty() || better(v, out.value)) {
        out.threshold = th;
        out.value = v;
      }
    }
    return out;
  }
  for (int d = 0; d < ndraws; ++d) {
    std::vector<double> th(K);
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      th[k] = std::max(rng.exponential(), 1e-12);
      sum += th[k];
    }
    for (double& t : th) t /= sum;
    const double v = value_at(th);
    if (out.threshold.empty() || better(v, out.value)) {
      out.threshold = th;
      out.value = v;
    }
  }
  return out;
}

std::vector<int> pareto_front_indices(const std::vector<std::vector<double>>& ys,
                                      const std::vector<bool>& minimize) {
  const int n = static_cast<int>(ys.size());
  const int m = static_cast<int>(minimize.size());
  auto canon = [&](int i, int k) {
    const double v = ys[i][k];
    if (is_missing(v)) return std::numeric_limits<double>::infinity();
    return minimize[k] ? v : -v;
  };
  auto dominates = [&](int a, int b) {
    bool strict = false;
    for (int k = 0; k < m; ++k) {
      const double va = canon(a, k), vb = canon(b, k);
      if (va > vb) return false;
      if (va < vb) strict = true;
    }
    return strict;
  };
  auto equal = [&](int a, int b) {
    for (int k = 0; k < m; ++k)
      if (canon(a, k) != canon(b, k)) return false;
    return true;
  };
  std::vector<int> front;
  for (int i = 0; i < n; ++i) {
    bool drop = false;
    for (int j = 0; j < n && !drop; ++j) {
      if (j == i) continue;
      if (dominates(j, i) || (equal(i, j) && j < i)) drop = true;
    }
    if (!drop) front.push_back(i);
  }
  return front;
}

TuneMultiCritResult tune_params_multicrit(
    const LearnerPtr& learner, const Task& task, const ResampleDesc& desc,
    const ParamSet& param_set, const TuneControl& control,
    std::vector<Measure> measures, Rng rng) {
  if (measures.size() < 2)
    throw ValueError("multi-criteria tuning needs at least 2 measures");
  TuneMultiCritResult res;
  res.opt_path =
      run_design(learner, task, desc, param_set, control, measures, rng);
  std::vector<std::vector<double>> ys;
  for (const auto& r : res.opt_path.rows) ys.push_back(r.y);
  std::vector<bool> minimize;
  for (const auto& m : measures) minimize.push_back(m.minimize);
  for (int i : pareto_front_indices(ys, minimize)) {
    res.pareto_x.push_back(res.opt_path.rows[i].x);
    res.pareto_x_trafo.push_back(param_set.apply_trafos(res.opt_path.rows[i].x));
    res.pareto_y.push_back(res.opt_path.rows[i].y);
  }
  return res;
}

namespace {

ParamMap deprefix(const std::string& learner_id, const ParamMap& values) {
  ParamMap out;
  const std::string prefix = learner_id + ".";
  for (const auto& [k, v] : values)
    if (k.rfind(prefix, 0) == 0) out[k.substr(prefix.size())] = v;
  return out;
}

Param prefixed_param(const Param& p, const std::string& learner_id) {
  Param q = p;
  q.id = learner_id + "." + p.id;
  auto orig = p.requires_fn;
  q.requires_fn = [learner_id, orig](const ParamMap& values) {
    auto it = values.find("selected.learner");
    if (it == values.end() || !it->second.is_string() ||
        it->second.get<std::string>() != learner_id)
      return false;
    return !orig || orig(deprefix(learner_id, values));
  };
  q.requires_desc = "selected.learner == " + learner_id +
                    (p.requires_desc.empty() ? "" : " && " + p.requires_desc);
  return q;
}

}  // namespace

LearnerPtr make_model_multiplexer(const std::vector<LearnerPtr>& learners) {
  if (learners.empty())
    throw ValueError("model multiplexer needs at least one learner");
  std::vector<std::string> ids;
  for (const auto& l : learners) {
    if (l->kind != learners[0]->kind)
      throw ValueError("model multiplexer: learners span different task kinds");
    if (std::find(ids.begin(), ids.end(), l->id) != ids.end())
      throw ValueError("model multiplexer: duplicate learner id " + l->id);
    ids.push_back(l->id);
  }

  Learner mm;
  mm.id = "ModelMultiplexer";
  mm.class_name = task_kind_name(learners[0]->kind) + ".model_multiplexer";
  mm.kind = learners[0]->kind;
  mm.properties = learners[0]->properties;
  for (const auto& l : learners) {
    std::set<std::string> keep;
    for (const auto& p : mm.properties)
      if (l->has_property(p)) keep.insert(p);
    mm.properties = std::move(keep);
  }

  std::vector<json> sel_values;
  for (const auto& id : ids) sel_values.push_back(id);
  mm.param_set.add(make_discrete_param("selected.learner", sel_values, ids[0]));
  for (const auto& l : learners)
    for (const auto& p : l->param_set.params)
      mm.param_set.add(prefixed_param(p, l->id));

  const std::vector<LearnerPtr> bases = learners;
  mm.fit = [bases](const Learner& lrn, const Task& task,
                   const std::vector<double>& weights, Rng& rng) -> std::any {
    const std::string sel = lrn.par_str("selected.learner");
    LearnerPtr base;
    for (const auto& b : bases)
      if (b->id == sel) base = b;
    if (!base) throw ValueError("model multiplexer: unknown learner " + sel);
    base = set_hyperpars(base, deprefix(sel, lrn.hyperpars));
    if (base->predict_type != lrn.predict_type)
      base = set_predict_type(base, lrn.predict_type);
    base = set_learner_config(base, lrn.config);
    ModelPtr m = train(base, task, {}, weights, rng);
    if (is_failure_model(m)) throw std::runtime_error(get_failure_message(*m));
    return m;
  };
  mm.predict = [](const Learner&, const WrappedModel& model,
                  const Dataset& newdata, Rng& rng) {
    const auto& inner = std::any_cast<const ModelPtr&>(model.state);
    return raw_predict(*inner, newdata, rng);
  };
  mm.featimp = [](const Learner&, const WrappedModel& model) {
    const auto& inner = std::any_cast<const ModelPtr&>(model.state);
    return get_feature_importance(inner);
  };
  return std::make_shared<Learner>(std::move(mm));
}

ParamSet make_model_multiplexer_param_set(const LearnerPtr& multiplexer,
                                          const std::vector<Param>& params) {
  const Param* sel = multiplexer->param_set.find("selected.learner");
  if (sel == nullptr)
    throw ValueError("not a model multiplexer: selected.learner param missing");
  ParamSet out;
  out.add(*sel);
  std::vector<std::string> ids;
  for (const auto& v : sel->values) ids.push_back(v.get<std::string>());
  for (const auto& p : params) {
    int matches = 0;
    for (const auto& id : ids) {
      if (!multiplexer->param_set.has(id + "." + p.id)) continue;
      out.add(prefixed_param(p, id));
      ++matches;
    }
    if (matches == 0)
      throw ValueError("param " + p.id + " not found in any base learner");
  }
  return out;
}

namespace {

Table effect_table(const std::vector<const OptPath*>& paths, bool trafo,
                   bool include_diagnostics, const ParamSet* ps,
                   bool nested) {
  if (paths.empty()) throw ValueError("no tuning paths available");
  const OptPath& first = *paths[0];
  Table t;
  t.columns = first.par_ids;
  for (const auto& m : first.measure_names) t.columns.push_back(m);
  t.columns.push_back("iteration");
  t.columns.push_back("exec.time");
  if (include_diagnostics) t.columns.push_back("error.message");
  if (nested) t.columns.push_back("nested_cv_run");
  for (std::size_t run = 0; run < paths.size(); ++run) {
    for (const auto& r : paths[run]->rows) {
      auto& row = t.add_row();
      int c = 0;
      for (const auto& id : first.par_ids) {
        auto it = r.x.find(id);
        row[c++] = it == r.x.end()
                       ? json()
                       : cell_from(it->second, ps ? ps->find(id) : nullptr, trafo);
      }
      for (double v : r.y) row[c++] = is_missing(v) ? json() : json(v);
      row[c++] = r.dob;
      row[c++] = r.exec_time;
      if (include_diagnostics)
        row[c++] = r.error_message.empty() ? json() : json(r.error_message);
      if (nested) row[c++] = static_cast<int>(run + 1);
    }
  }
  return t;
}

}  // namespace

Table hyperpars_effect_data(const TuneResult& result, bool trafo,
                            bool include_diagnostics) {
  return effect_table({&result.opt_path}, trafo, include_diagnostics,
                      &result.opt_path.param_set, false);
}

Table hyperpars_effect_data(const ResampleResult& nested, bool trafo,
                            bool include_diagnostics,
                            const ParamSet* param_set) {
  if (trafo && param_set == nullptr)
    throw ValueError("trafo on nested tuning data needs the param set");
  std::vector<OptPath> parsed;
  for (const auto& ex : nested.extracts) {
    if (ex.is_null()) continue;
    if (!ex.is_object() || !ex.contains("opt.path"))
      throw ValueError("resample result carries no tune_result extracts");
    parsed.push_back(opt_path_from_json(ex.at("opt.path")));
  }
  if (parsed.empty())
    throw ValueError("resample result carries no tune_result extracts");
  std::vector<const OptPath*> paths;
  for (const auto& p : parsed) paths.push_back(&p);
  return effect_table(paths, trafo, include_diagnostics, param_set, true);
}

}  // namespace mlkit
