#include "mlkit/impute.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "mlkit/error.hpp"
#include "mlkit/task.hpp"

namespace mlkit {

namespace {

std::vector<int> missing_rows(const FeatureColumn& col) {
  std::vector<int> out;
  for (int i = 0; i < col.size(); ++i)
    if (col.missing(i)) out.push_back(i);
  return out;
}

void require_numeric(const FeatureColumn& col, const std::string& method) {
  if (col.kind != ColKind::Numeric)
    throw ValueError("impute method " + method + " needs a numeric column: " +
                     col.name);
}

// fill value as stored in control args: numeric for numeric/logical columns,
// level label for factor kinds
json cell_to_json(const FeatureColumn& col, int i) {
  if (col.is_factor_like()) return col.level_of(i);
  return col.values[i];
}

void fill_cell(FeatureColumn& col, int i, const json& v) {
  if (col.is_factor_like()) {
    const std::string label = v.get<std::string>();
    int idx = col.level_index(label);
    if (idx < 0) {
      col.levels.push_back(label);
      idx = static_cast<int>(col.levels.size()) - 1;
    }
    col.values[i] = idx;
  } else if (col.kind == ColKind::Logical) {
    if (v.is_boolean())
      col.values[i] = v.get<bool>() ? 1.0 : 0.0;
    else
      col.values[i] = v.get<double>() != 0.0 ? 1.0 : 0.0;
  } else {
    col.values[i] = v.get<double>();
  }
}

void fill_all_missing(Dataset& data, const std::string& name, const json& v) {
  auto& col = data.col(name);
  for (int i : missing_rows(col)) fill_cell(col, i, v);
}

ImputeControl value_control(std::string method, json value) {
  ImputeControl c;
  c.method = std::move(method);
  c.args = json{{"value", std::move(value)}};
  c.apply = [](const ImputeControl& ctl, Dataset& data, const std::string& col,
               Rng&) { fill_all_missing(data, col, ctl.args.at("value")); };
  return c;
}

// most frequent non-missing value; ties resolve to the lowest code/value
json column_mode(const FeatureColumn& col) {
  std::map<double, int> counts;
  for (int i = 0; i < col.size(); ++i)
    if (!col.missing(i)) counts[col.values[i]] += 1;
  if (counts.empty())
    throw ValueError("cannot impute an all-missing column: " + col.name);
  double best = counts.begin()->first;
  int best_n = counts.begin()->second;
  for (const auto& [v, n] : counts)
    if (n > best_n) {
      best = v;
      best_n = n;
    }
  if (col.is_factor_like()) return col.levels[static_cast<int>(best)];
  if (col.kind == ColKind::Logical) return best != 0.0;
  return best;
}

}  // namespace

ImputeMethod impute_constant(json value) {
  ImputeMethod m;
  m.name = "constant";
  m.learn = [value](const Dataset&, const std::string&,
                    const std::vector<std::string>&, Rng&) {
    return value_control("constant", value);
  };
  m.apply = value_control("constant", json()).apply;
  return m;
}

ImputeMethod impute_mean() {
  ImputeMethod m;
  m.name = "mean";
  m.learn = [](const Dataset& data, const std::string& col,
               const std::vector<std::string>&, Rng&) {
    const auto& c = data.col(col);
    require_numeric(c, "mean");
    double sum = 0.0;
    int n = 0;
    for (int i = 0; i < c.size(); ++i)
      if (!c.missing(i)) {
        sum += c.values[i];
        ++n;
      }
    if (n == 0)
      throw ValueError("cannot impute an all-missing column: " + col);
    return value_control("mean", sum / n);
  };
  m.apply = value_control("mean", json()).apply;
  return m;
}

ImputeMethod impute_median() {
  ImputeMethod m;
  m.name = "median";
  m.learn = [](const Dataset& data, const std::string& col,
               const std::vector<std::string>&, Rng&) {
    const auto& c = data.col(col);
    require_numeric(c, "median");
    std::vector<double> v;
    for (int i = 0; i < c.size(); ++i)
      if (!c.missing(i)) v.push_back(c.values[i]);
    if (v.empty())
      throw ValueError("cannot impute an all-missing column: " + col);
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double med =
        n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    return value_control("median", med);
  };
  m.apply = value_control("median", json()).apply;
  return m;
}

ImputeMethod impute_mode() {
  ImputeMethod m;
  m.name = "mode";
  m.learn = [](const Dataset& data, const std::string& col,
               const std::vector<std::string>&, Rng&) {
    return value_control("mode", column_mode(data.col(col)));
  };
  m.apply = value_control("mode", json()).apply;
  return m;
}

ImputeMethod impute_hist() {
  ImputeMethod m;
  m.name = "hist";
  const ImputeApplyHook apply = [](const ImputeControl& ctl, Dataset& data,
                                   const std::string& col, Rng& rng) {
    const auto& pool = ctl.args.at("pool");
    auto& c = data.col(col);
    for (int i : missing_rows(c))
      fill_cell(c, i,
                pool.at(static_cast<std::size_t>(rng.unif_int(
                    0, static_cast<std::int64_t>(pool.size()) - 1))));
  };
  m.learn = [apply](const Dataset& data, const std::string& col,
                    const std::vector<std::string>&, Rng&) {
    const auto& c = data.col(col);
    json pool = json::array();
    for (int i = 0; i < c.size(); ++i)
      if (!c.missing(i)) pool.push_back(cell_to_json(c, i));
    if (pool.empty())
      throw ValueError("cannot impute an all-missing column: " + col);
    ImputeControl ctl;
    ctl.method = "hist";
    ctl.args = json{{"pool", std::move(pool)}};
    ctl.apply = apply;
    return ctl;
  };
  m.apply = apply;
  return m;
}

namespace {

// the imputation model's training frame: all columns except targets and the
// imputed column itself
std::vector<std::string> learner_features(const Dataset& data,
                                          const std::string& col,
                                          const std::vector<std::string>& targets) {
  std::vector<std::string> feats;
  for (const auto& c : data.columns) {
    if (c.name == col) continue;
    if (std::find(targets.begin(), targets.end(), c.name) != targets.end())
      continue;
    feats.push_back(c.name);
  }
  return feats;
}

FeatureColumn logical_as_factor(const FeatureColumn& col) {
  FeatureColumn out = col;
  out.kind = ColKind::Factor;
  out.levels = {"FALSE", "TRUE"};
  return out;
}

void apply_learner_control(const ImputeControl& ctl, Dataset& data,
                           const std::string& col, Rng& rng) {
  auto& c = data.col(col);
  const std::vector<int> rows = missing_rows(c);
  if (rows.empty()) return;
  Dataset newdata = data.select_cols(ctl.model_features).select_rows(rows);
  const Prediction pred = predict_newdata(ctl.model, newdata, rng);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (c.kind == ColKind::Numeric) {
      c.values[rows[k]] = pred.response_num[k];
    } else {
      const int code = pred.response_cls[k];
      if (code < 0) continue;
      fill_cell(c, rows[k],
                c.kind == ColKind::Logical
                    ? json(pred.class_levels[code] == "TRUE")
                    : json(pred.class_levels[code]));
    }
  }
}

}  // namespace

ImputeMethod impute_learner(const std::string& class_name) {
  ImputeMethod m;
  m.name = "learner";
  m.apply = apply_learner_control;
  m.learn = [class_name](const Dataset& data, const std::string& col,
                         const std::vector<std::string>& targets, Rng& rng) {
    const auto& c = data.col(col);
    const bool classif = c.kind != ColKind::Numeric;
    if (classif && class_name.rfind("classif.", 0) != 0)
      throw ValueError("factor column " + col + " needs a classif learner");
    if (!classif && class_name.rfind("regr.", 0) != 0)
      throw ValueError("numeric column " + col + " needs a regr learner");

    std::vector<int> obs;
    for (int i = 0; i < c.size(); ++i)
      if (!c.missing(i)) obs.push_back(i);
    if (obs.empty())
      throw ValueError("cannot impute an all-missing column: " + col);

    ImputeControl ctl;
    ctl.method = "learner";
    ctl.model_features = learner_features(data, col, targets);
    std::vector<std::string> keep = ctl.model_features;
    keep.push_back(col);
    Dataset frame = data.select_cols(keep).select_rows(obs);
    if (c.kind == ColKind::Logical)
      frame.col(col) = logical_as_factor(frame.col(col));
    MakeTaskOptions topts;
    topts.id = "impute." + col;
    const Task t = make_task(classif ? TaskKind::Classif : TaskKind::Regr,
                             std::move(frame), {col}, topts);
    ctl.model = train(make_learner(class_name), t, {}, {}, rng);
    ctl.apply = apply_learner_control;
    return ctl;
  };
  return m;
}

ImputeMethod impute_locf() {
  ImputeMethod m;
  m.name = "locf";
  const ImputeApplyHook apply = [](const ImputeControl& ctl, Dataset& data,
                                   const std::string& col, Rng&) {
    const auto& values = ctl.args.at("values");
    const auto& times = ctl.args.at("times");
    auto& c = data.col(col);
    std::vector<json> full;
    for (std::size_t r = 0; r < values.size(); ++r)
      for (int k = 0; k < times.at(r).get<int>(); ++k)
        full.push_back(values.at(r));
    if (static_cast<int>(full.size()) != c.size())
      throw ValueError("locf control does not match column length: " + col);
    for (int i : missing_rows(c)) fill_cell(c, i, full[i]);
  };
  m.apply = apply;
  m.learn = [apply](const Dataset& data, const std::string& col,
                    const std::vector<std::string>&, Rng&) {
    const auto& c = data.col(col);
    if (c.size() > 0 && c.missing(0))
      throw ValueError("locf cannot impute a leading missing value: " + col);
    json values = json::array();
    json times = json::array();
    for (int i = 0; i < c.size(); ++i) {
      if (!c.missing(i)) {
        values.push_back(cell_to_json(c, i));
        times.push_back(1);
      } else {
        times.back() = times.back().get<int>() + 1;
      }
    }
    ImputeControl ctl;
    ctl.method = "locf";
    ctl.args = json{{"values", std::move(values)}, {"times", std::move(times)}};
    ctl.apply = apply;
    return ctl;
  };
  return m;
}

ImputeMethod make_impute_method(
    std::function<json(const Dataset&, const std::string& col)> learn_fn,
    std::function<void(const json&, Dataset&, const std::string& col)> apply_fn) {
  ImputeMethod m;
  m.name = "custom";
  const ImputeApplyHook apply = [apply_fn](const ImputeControl& ctl,
                                           Dataset& data,
                                           const std::string& col, Rng&) {
    apply_fn(ctl.args, data, col);
  };
  m.apply = apply;
  m.learn = [learn_fn, apply](const Dataset& data, const std::string& col,
                              const std::vector<std::string>&, Rng&) {
    ImputeControl ctl;
    ctl.method = "custom";
    ctl.args = learn_fn(data, col);
    ctl.apply = apply;
    return ctl;
  };
  return m;
}

ImputeMethod impute_method_from_name(const std::string& name) {
  if (name == "mean") return impute_mean();
  if (name == "median") return impute_median();
  if (name == "mode") return impute_mode();
  if (name == "hist") return impute_hist();
  if (name == "locf") return impute_locf();
  if (name.rfind("learner:", 0) == 0) return impute_learner(name.substr(8));
  if (name.rfind("constant:", 0) == 0) {
    const std::string raw = name.substr(9);
    char* end = nullptr;
    const double num = std::strtod(raw.c_str(), &end);
    if (end != nullptr && *end == '\0' && end != raw.c_str())
      return impute_constant(num);
    return impute_constant(raw);
  }
  throw ValueError("unknown impute method: " + name);
}

namespace {

FeatureColumn make_dummy_column(const std::string& name,
                                const std::vector<bool>& was_missing,
                                const std::string& dummy_type) {
  FeatureColumn d;
  d.name = name + ".dummy";
  d.values.reserve(was_missing.size());
  for (bool b : was_missing) d.values.push_back(b ? 1.0 : 0.0);
  if (dummy_type == "factor") {
    d.kind = ColKind::Factor;
    d.levels = {"FALSE", "TRUE"};
  } else if (dummy_type == "numeric") {
    d.kind = ColKind::Numeric;
  } else {
    throw ValueError("dummy_type must be factor or numeric");
  }
  return d;
}

void check_filled(const Dataset& data, const std::string& col,
                  const std::string& method) {
  if (data.col(col).has_missings())
    throw ValueError("impute method " + method +
                     " left missing values in column " + col);
}

// reconcile a test factor column with the training snapshot
void recode_column(FeatureColumn& col, const ImputeControl& ctl,
                   const ImputationDesc& desc) {
  if (!col.is_factor_like() || ctl.train_levels.empty()) return;
  if (!desc.recode_factor_levels) {
    if (col.levels != ctl.train_levels)
      throw ValueError("factor levels of " + col.name +
                       " differ from training levels");
    return;
  }
  std::vector<double> remap(col.levels.size(), kMissing);
  for (std::size_t i = 0; i < col.levels.size(); ++i) {
    const auto it = std::find(ctl.train_levels.begin(), ctl.train_levels.end(),
                              col.levels[i]);
    if (it != ctl.train_levels.end()) {
      remap[i] = static_cast<double>(it - ctl.train_levels.begin());
    } else if (desc.impute_new_levels) {
      const auto mit = std::find(ctl.train_levels.begin(),
                                 ctl.train_levels.end(), ctl.train_mode);
      remap[i] = mit == ctl.train_levels.end()
                     ? kMissing
                     : static_cast<double>(mit - ctl.train_levels.begin());
    } else {
      throw ValueError("unseen factor level '" + col.levels[i] +
                       "' in column " + col.name);
    }
  }
  for (auto& v : col.values)
    if (!is_missing(v)) v = remap[static_cast<int>(v)];
  col.levels = ctl.train_levels;
}

}  // namespace

ImputeResult impute(const Dataset& data,
                    const std::vector<std::string>& targets,
                    const ImputeOpts& opts, Rng rng) {
  for (const auto& t : targets)
    if (!data.has_col(t)) throw ValueError("target column not found: " + t);
  auto is_target = [&](const std::string& name) {
    return std::find(targets.begin(), targets.end(), name) != targets.end();
  };
  for (const auto& [name, method] : opts.cols) {
    if (!data.has_col(name)) throw ValueError("column not found: " + name);
    if (is_target(name))
      throw ValueError("target column cannot be imputed: " + name);
  }

  ImputeResult out;
  out.data = data;
  out.desc.targets = targets;
  out.desc.dummy_type = opts.dummy_type;
  out.desc.impute_new_levels = opts.impute_new_levels;
  out.desc.recode_factor_levels = opts.recode_factor_levels;

  // dummies reflect pre-fill missingness
  std::vector<std::pair<std::string, std::vector<bool>>> dummies;
  for (const auto& c : data.columns) {
    if (is_target(c.name)) continue;
    const bool wanted =
        std::find(opts.dummy_cols.begin(), opts.dummy_cols.end(), c.name) !=
            opts.dummy_cols.end() ||
        std::find(opts.dummy_classes.begin(), opts.dummy_classes.end(),
                  col_kind_name(c.kind)) != opts.dummy_classes.end();
    if (!wanted) continue;
    std::vector<bool> miss(c.size());
    for (int i = 0; i < c.size(); ++i) miss[i] = c.missing(i);
    dummies.emplace_back(c.name, std::move(miss));
    out.desc.dummy_cols.push_back(c.name);
  }
  for (const auto& name : opts.dummy_cols)
    if (!data.has_col(name))
      throw ValueError("dummy column not found: " + name);

  int ci = 0;
  for (const auto& c : data.columns) {
    if (is_target(c.name)) continue;
    const ImputeMethod* method = nullptr;
    const auto it = opts.cols.find(c.name);
    if (it != opts.cols.end()) {
      method = &it->second;
    } else {
      const auto kt = opts.classes.find(col_kind_name(c.kind));
      if (kt != opts.classes.end()) method = &kt->second;
    }
    if (method == nullptr) continue;
    Rng learn_rng = rng.child(ExecLevel::Unit, 2 * ci);
    Rng apply_rng = rng.child(ExecLevel::Unit, 2 * ci + 1);
    ImputeControl ctl = method->learn(data, c.name, targets, learn_rng);
    if (c.is_factor_like()) {
      ctl.train_levels = c.levels;
      for (int i = 0; i < c.size(); ++i)
        if (!c.missing(i)) {
          ctl.train_mode = column_mode(c).get<std::string>();
          break;
        }
    }
    ctl.apply(ctl, out.data, c.name, apply_rng);
    check_filled(out.data, c.name, method->name);
    out.desc.controls.emplace_back(c.name, std::move(ctl));
    ++ci;
  }

  for (const auto& [name, miss] : dummies)
    out.data.add_column(make_dummy_column(name, miss, opts.dummy_type));
  return out;
}

Dataset reimpute(const Dataset& data, const ImputationDesc& desc, Rng rng) {
  Dataset out = data;
  for (const auto& [name, ctl] : desc.controls)
    if (!out.has_col(name))
      throw ValueError("column named in imputation desc absent: " + name);

  std::vector<std::pair<std::string, std::vector<bool>>> dummies;
  for (const auto& name : desc.dummy_cols) {
    if (!out.has_col(name))
      throw ValueError("column named in imputation desc absent: " + name);
    const auto& c = out.col(name);
    std::vector<bool> miss(c.size());
    for (int i = 0; i < c.size(); ++i) miss[i] = c.missing(i);
    dummies.emplace_back(name, std::move(miss));
  }

  for (const auto& [name, ctl] : desc.controls)
    recode_column(out.col(name), ctl, desc);

  int ci = 0;
  for (const auto& [name, ctl] : desc.controls) {
    Rng apply_rng = rng.child(ExecLevel::Unit, 2 * ci + 1);
    ctl.apply(ctl, out, name, apply_rng);
    check_filled(out, name, ctl.method);
    ++ci;
  }
  for (const auto& [name, miss] : dummies)
    out.add_column(make_dummy_column(name, miss, desc.dummy_type));
  return out;
}

namespace {

struct ImputeWrapperState {
  ModelPtr inner;
  ImputationDesc desc;
};

}  // namespace

LearnerPtr make_impute_wrapper(const LearnerPtr& learner,
                               const ImputeOpts& opts) {
  Learner w = *learner;
  w.id = learner->id + ".imputed";
  w.class_name = learner->class_name + ".imputed";
  w.next = learner;
  w.hyperpars = {};
  w.properties.insert("missings");
  w.fit = [opts](const Learner& lrn, const Task& task,
                 const std::vector<double>& weights, Rng& rng) -> std::any {
    ImputeResult ir =
        impute(task.data, task.targets, opts, rng.child(ExecLevel::Unit, 0));
    LearnerPtr inner = lrn.next;
    if (!lrn.hyperpars.empty()) inner = set_hyperpars(inner, lrn.hyperpars);
    if (inner->predict_type != lrn.predict_type)
      inner = set_predict_type(inner, lrn.predict_type);
    ModelPtr m = train(inner, with_data(task, std::move(ir.data)), {}, weights,
                       rng);
    if (is_failure_model(m)) throw std::runtime_error(get_failure_message(*m));
    return ImputeWrapperState{std::move(m), std::move(ir.desc)};
  };
  w.predict = [](const Learner&, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const ImputeWrapperState&>(model.state);
    Dataset filled =
        reimpute(newdata, st.desc, rng.child(ExecLevel::Unit, 0));
    Rng prng = rng.child(ExecLevel::Unit, 1);
    return raw_predict(*st.inner, filled, prng);
  };
  w.featimp = [](const Learner&, const WrappedModel& model) {
    const auto& st = std::any_cast<const ImputeWrapperState&>(model.state);
    return get_feature_importance(st.inner);
  };
  return std::make_shared<Learner>(std::move(w));
}

}  // namespace mlkit
