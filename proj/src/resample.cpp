#include "mlkit/resample.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "mlkit/error.hpp"
#include "mlkit/parallel.hpp"

namespace mlkit {

std::string resample_method_name(ResampleMethod m) {
  switch (m) {
    case ResampleMethod::Holdout: return "Holdout";
    case ResampleMethod::CV: return "CV";
    case ResampleMethod::LOO: return "LOO";
    case ResampleMethod::RepCV: return "RepCV";
    case ResampleMethod::Subsample: return "Subsample";
    case ResampleMethod::Bootstrap: return "Bootstrap";
  }
  return "?";
}

ResampleMethod resample_method_from_name(const std::string& name) {
  if (name == "Holdout") return ResampleMethod::Holdout;
  if (name == "CV") return ResampleMethod::CV;
  if (name == "LOO") return ResampleMethod::LOO;
  if (name == "RepCV") return ResampleMethod::RepCV;
  if (name == "Subsample") return ResampleMethod::Subsample;
  if (name == "Bootstrap") return ResampleMethod::Bootstrap;
  throw ValueError("unknown resampling method: " + name);
}

std::string ResampleDesc::name() const {
  switch (method) {
    case ResampleMethod::Holdout: return "holdout";
    case ResampleMethod::CV: return "cross-validation";
    case ResampleMethod::LOO: return "leave-one-out";
    case ResampleMethod::RepCV: return "repeated cross-validation";
    case ResampleMethod::Subsample: return "subsampling";
    case ResampleMethod::Bootstrap: return "bootstrapping";
  }
  return "?";
}

int ResampleDesc::total_iters(int size) const {
  switch (method) {
    case ResampleMethod::Holdout: return 1;
    case ResampleMethod::LOO: return size;
    case ResampleMethod::RepCV: return iters * reps;
    default: return iters;
  }
}

namespace {

PredictSet parse_predict(const std::string& s) {
  if (s == "test") return PredictSet::Test;
  if (s == "train") return PredictSet::Train;
  if (s == "both") return PredictSet::Both;
  throw ValueError("predict must be one of test/train/both");
}

int round_half_even(double x) {
  return static_cast<int>(std::nearbyint(x));
}

}  // namespace

ResampleDesc make_resample_desc(const std::string& method, int iters,
                                const ResampleDescOpts& opts) {
  ResampleDesc d;
  d.method = resample_method_from_name(method);
  d.predict = parse_predict(opts.predict);
  d.stratify = opts.stratify;
  d.stratify_cols = opts.stratify_cols;
  if (d.stratify && !d.stratify_cols.empty())
    throw ValueError("stratify and stratify_cols are mutually exclusive");

  switch (d.method) {
    case ResampleMethod::Holdout:
      if (iters > 1) throw ValueError("Holdout has a single iteration");
      d.iters = 1;
      break;
    case ResampleMethod::CV:
      d.iters = iters > 0 ? iters : 10;
      if (d.iters < 2) throw ValueError("CV needs iters >= 2");
      break;
    case ResampleMethod::LOO:
      if (iters > 0) throw ValueError("LOO has no free iters setting");
      d.iters = 0;
      break;
    case ResampleMethod::RepCV:
      d.iters = iters > 0 ? iters : 10;
      if (d.iters < 2) throw ValueError("RepCV needs folds >= 2");
      d.reps = opts.reps > 0 ? opts.reps : 10;
      break;
    case ResampleMethod::Subsample:
      d.iters = iters > 0 ? iters : 30;
      break;
    case ResampleMethod::Bootstrap:
      d.iters = iters > 0 ? iters : 30;
      break;
  }
  if (opts.split >= 0) {
    if (d.method != ResampleMethod::Holdout &&
        d.method != ResampleMethod::Subsample)
      throw ValueError("split only applies to Holdout/Subsample");
    if (!(opts.split > 0.0 && opts.split < 1.0))
      throw ValueError("split must lie in (0,1)");
    d.split = opts.split;
  }
  if (opts.reps > 0 && d.method != ResampleMethod::RepCV)
    throw ValueError("reps only applies to RepCV");
  return d;
}

namespace {

// strata as 0-based row index lists, deterministic order
std::vector<std::vector<int>> build_strata(const ResampleDesc& desc,
                                           const Task& task) {
  std::map<std::vector<int>, std::vector<int>> by_key;
  const int n = task.n_rows();
  if (desc.stratify) {
    if (task.kind != TaskKind::Classif)
      throw ValueError("stratify requires a classif task target");
    const auto& tc = task.target_col();
    for (int i = 0; i < n; ++i)
      by_key[{static_cast<int>(tc.values[i])}].push_back(i);
  } else {
    for (const auto& name : desc.stratify_cols) {
      if (!task.data.has_col(name))
        throw ValueError("stratify column not found: " + name);
      const auto& c = task.data.col(name);
      if (c.kind == ColKind::Numeric)
        throw ValueError("cannot stratify on numeric column: " + name);
    }
    for (int i = 0; i < n; ++i) {
      std::vector<int> key;
      for (const auto& name : desc.stratify_cols) {
        const auto& c = task.data.col(name);
        key.push_back(c.missing(i) ? -1 : static_cast<int>(c.values[i]));
      }
      by_key[key].push_back(i);
    }
  }
  std::vector<std::vector<int>> strata;
  for (auto& [key, rows] : by_key) strata.push_back(std::move(rows));
  return strata;
}

// deal shuffled stratum members round-robin; remainders rotate across folds
std::vector<std::vector<int>> stratified_folds(
    const std::vector<std::vector<int>>& strata, int k, Rng& rng) {
  std::vector<std::vector<int>> folds(k);
  int rot = 0;
  for (const auto& stratum : strata) {
    std::vector<int> idx = stratum;
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i)
      folds[(rot + i) % k].push_back(idx[i]);
    rot = (rot + static_cast<int>(stratum.size())) % k;
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

// train-set sizes per stratum by largest remainder, matching the global count
std::vector<int> stratified_train_sizes(
    const std::vector<std::vector<int>>& strata, double split, int n) {
  const int target = round_half_even(split * n);
  std::vector<int> sizes(strata.size());
  std::vector<std::pair<double, int>> fracs;
  int assigned = 0;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    const double want = split * static_cast<double>(strata[s].size());
    sizes[s] = static_cast<int>(std::floor(want));
    assigned += sizes[s];
    fracs.push_back({-(want - sizes[s]), static_cast<int>(s)});
  }
  std::sort(fracs.begin(), fracs.end());
  for (int i = 0; i < target - assigned && i < static_cast<int>(fracs.size());
       ++i)
    sizes[fracs[i].second] += 1;
  return sizes;
}

void append_cv_iterations(ResampleInstance& inst, int n, int k, Rng& rng,
                          const std::vector<std::vector<int>>* strata) {
  std::vector<std::vector<int>> folds;
  if (strata != nullptr) {
    folds = stratified_folds(*strata, k, rng);
  } else {
    std::vector<int> perm = rng.permutation(n);
    folds.assign(k, {});
    const int base = n / k, extra = n % k;
    int at = 0;
    for (int f = 0; f < k; ++f) {
      const int sz = base + (f < extra ? 1 : 0);
      for (int i = 0; i < sz; ++i) folds[f].push_back(perm[at++]);
      std::sort(folds[f].begin(), folds[f].end());
    }
  }
  for (int f = 0; f < k; ++f) {
    std::vector<int> test, train;
    test.reserve(folds[f].size());
    for (int i : folds[f]) test.push_back(i + 1);
    std::vector<bool> in_test(n + 1, false);
    for (int i : test) in_test[i] = true;
    for (int i = 1; i <= n; ++i)
      if (!in_test[i]) train.push_back(i);
    inst.train_inds.push_back(std::move(train));
    inst.test_inds.push_back(std::move(test));
  }
}

void append_split_iteration(ResampleInstance& inst, int n, double split,
                            Rng& rng,
                            const std::vector<std::vector<int>>* strata) {
  std::vector<int> train, test;
  if (strata != nullptr) {
    const auto sizes = stratified_train_sizes(*strata, split, n);
    for (std::size_t s = 0; s < strata->size(); ++s) {
      std::vector<int> idx = (*strata)[s];
      rng.shuffle(idx);
      for (std::size_t i = 0; i < idx.size(); ++i)
        (static_cast<int>(i) < sizes[s] ? train : test).push_back(idx[i] + 1);
    }
  } else {
    std::vector<int> perm = rng.permutation(n);
    const int n_train = round_half_even(split * n);
    for (int i = 0; i < n; ++i)
      (i < n_train ? train : test).push_back(perm[i] + 1);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  inst.train_inds.push_back(std::move(train));
  inst.test_inds.push_back(std::move(test));
}

}  // namespace

ResampleInstance make_resample_instance(const ResampleDesc& desc, int size,
                                        Rng rng) {
  if (desc.stratify || !desc.stratify_cols.empty())
    throw ValueError("stratification requires the task");
  ResampleInstance inst;
  inst.desc = desc;
  inst.size = size;
  if (size < 1) throw ValueError("resample instance needs size >= 1");
  switch (desc.method) {
    case ResampleMethod::Holdout:
      append_split_iteration(inst, size, desc.split, rng, nullptr);
      break;
    case ResampleMethod::Subsample:
      for (int i = 0; i < desc.iters; ++i)
        append_split_iteration(inst, size, desc.split, rng, nullptr);
      break;
    case ResampleMethod::CV:
      if (desc.iters > size)
        throw ValueError("CV folds exceed the number of observations");
      append_cv_iterations(inst, size, desc.iters, rng, nullptr);
      break;
    case ResampleMethod::RepCV:
      if (desc.iters > size)
        throw ValueError("RepCV folds exceed the number of observations");
      for (int r = 0; r < desc.reps; ++r)
        append_cv_iterations(inst, size, desc.iters, rng, nullptr);
      break;
    case ResampleMethod::LOO:
      for (int i = 1; i <= size; ++i) {
        std::vector<int> train;
        train.reserve(size - 1);
        for (int j = 1; j <= size; ++j)
          if (j != i) train.push_back(j);
        inst.train_inds.push_back(std::move(train));
        inst.test_inds.push_back({i});
      }
      break;
    case ResampleMethod::Bootstrap:
      for (int it = 0; it < desc.iters; ++it) {
        std::vector<int> train(size);
        std::vector<bool> seen(size + 1, false);
        for (int i = 0; i < size; ++i) {
          train[i] = static_cast<int>(rng.unif_int(1, size));
          seen[train[i]] = true;
        }
        std::sort(train.begin(), train.end());
        std::vector<int> test;
        for (int i = 1; i <= size; ++i)
          if (!seen[i]) test.push_back(i);
        inst.train_inds.push_back(std::move(train));
        inst.test_inds.push_back(std::move(test));
      }
      break;
  }
  return inst;
}

ResampleInstance make_resample_instance(const ResampleDesc& desc,
                                        const Task& task, Rng rng) {
  if (!desc.stratify && desc.stratify_cols.empty())
    return make_resample_instance(desc, task.n_rows(), rng);
  const bool ok = desc.method == ResampleMethod::Holdout ||
                  desc.method == ResampleMethod::CV ||
                  desc.method == ResampleMethod::RepCV ||
                  desc.method == ResampleMethod::Subsample;
  if (!ok)
    throw ValueError("stratification is supported for Holdout/CV/RepCV/Subsample only");
  const auto strata = build_strata(desc, task);
  ResampleInstance inst;
  inst.desc = desc;
  inst.size = task.n_rows();
  const int n = task.n_rows();
  switch (desc.method) {
    case ResampleMethod::Holdout:
      append_split_iteration(inst, n, desc.split, rng, &strata);
      break;
    case ResampleMethod::Subsample:
      for (int i = 0; i < desc.iters; ++i)
        append_split_iteration(inst, n, desc.split, rng, &strata);
      break;
    case ResampleMethod::CV:
      append_cv_iterations(inst, n, desc.iters, rng, &strata);
      break;
    case ResampleMethod::RepCV:
      for (int r = 0; r < desc.reps; ++r)
        append_cv_iterations(inst, n, desc.iters, rng, &strata);
      break;
    default: break;
  }
  return inst;
}

ResampleInstance make_fixed_holdout_instance(std::vector<int> train_inds,
                                             std::vector<int> test_inds,
                                             int size) {
  if (test_inds.empty()) throw ValueError("fixed holdout: empty test set");
  if (train_inds.empty()) throw ValueError("fixed holdout: empty train set");
  std::vector<bool> in_train(size + 1, false);
  for (int i : train_inds) {
    if (i < 1 || i > size) throw ValueError("fixed holdout: index out of range");
    in_train[i] = true;
  }
  for (int i : test_inds) {
    if (i < 1 || i > size) throw ValueError("fixed holdout: index out of range");
    if (in_train[i])
      throw ValueError("fixed holdout: train and test sets overlap");
  }
  ResampleInstance inst;
  inst.desc = make_resample_desc("Holdout");
  inst.desc.split = static_cast<double>(train_inds.size()) /
                    static_cast<double>(train_inds.size() + test_inds.size());
  inst.size = size;
  inst.train_inds.push_back(std::move(train_inds));
  inst.test_inds.push_back(std::move(test_inds));
  return inst;
}

double ResampleResult::aggr_value(const std::string& name) const {
  for (const auto& [k, v] : aggr)
    if (k == name) return v;
  throw ValueError("no aggregated value named " + name);
}

Table ResampleResult::perf_table(bool train) const {
  Table t;
  t.columns.push_back("iter");
  for (const auto& m : measures) t.columns.push_back(m.id);
  const auto& src = train ? perf_train : perf_test;
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto& row = t.add_row();
    row[0] = static_cast<int>(i + 1);
    for (std::size_t j = 0; j < src[i].size(); ++j)
      row[j + 1] = is_missing(src[i][j]) ? json() : json(src[i][j]);
  }
  return t;
}

ResampleResult resample(const LearnerPtr& learner, const Task& task,
                        const ResampleDesc& desc, const ResampleOpts& opts,
                        Rng rng) {
  const ResampleInstance inst =
      make_resample_instance(desc, task, rng.child(ExecLevel::Instance, 0));
  return resample(learner, task, inst, opts, rng);
}

ResampleResult resample(const LearnerPtr& learner, const Task& task,
                        const ResampleInstance& instance,
                        const ResampleOpts& opts, Rng rng) {
  const auto t_start = std::chrono::steady_clock::now();
  std::vector<Measure> measures = opts.measures;
  if (measures.empty()) measures.push_back(get_default_measure(task));
  const PredictSet pset = instance.desc.predict;
  for (const auto& m : measures) {
    if (m.aggr.properties.count("req.train") && pset == PredictSet::Test)
      throw ValueError("aggregation " + m.aggr.id + " of measure " + m.id +
                       " needs training-set predictions (predict=both)");
    if (m.aggr.properties.count("req.test") && pset == PredictSet::Train)
      throw ValueError("aggregation " + m.aggr.id + " of measure " + m.id +
                       " needs test-set predictions");
    if (m.has_property("predtype.prob") &&
        learner->predict_type != PredictType::Prob)
      throw ValueError("measure " + m.id +
                       " requires predict type prob on the learner");
  }
  if (instance.size != task.n_rows())
    throw ValueError("resample instance size does not match the task");

  const int R = instance.iters();
  const int M = static_cast<int>(measures.size());
  ResampleResult res;
  res.task_id = task.id;
  res.learner_id = learner->id;
  res.measures = measures;
  res.instance = instance;
  res.perf_test.assign(R, std::vector<double>(M, kMissing));
  res.perf_train.assign(R, std::vector<double>(M, kMissing));
  res.err_msgs.assign(R, "");

  std::function<json(const ModelPtr&)> extract_fn = opts.extract_fn;
  if (!extract_fn && !opts.extract.empty())
    extract_fn = named_extractor(opts.extract);

  std::vector<Prediction> preds_test(R), preds_train(R);
  std::vector<std::uint8_t> has_test(R, 0), has_train(R, 0);
  std::vector<ModelPtr> models(R);
  std::vector<json> extracts(R, json());

  parallel_for("resample", R, [&](int i) {
    Rng it_rng = rng.child(ExecLevel::Resample, static_cast<std::uint64_t>(i));
    ModelPtr model = train(learner, task, instance.train_inds[i], {},
                           it_rng.child(ExecLevel::Unit, 0));
    if (is_failure_model(model)) res.err_msgs[i] = model->failure_msg;
    if (pset != PredictSet::Train && !instance.test_inds[i].empty()) {
      Prediction p = predict(model, task, instance.test_inds[i],
                             it_rng.child(ExecLevel::Unit, 1));
      p.iters.assign(p.n(), i + 1);
      p.on_train.assign(p.n(), 0);
      const PerfValues pv = performance(p, measures, &task, model.get());
      for (int j = 0; j < M; ++j) res.perf_test[i][j] = pv.values[j].second;
      preds_test[i] = std::move(p);
      has_test[i] = 1;
    }
    if (pset != PredictSet::Test) {
      Prediction p = predict(model, task, instance.train_inds[i],
                             it_rng.child(ExecLevel::Unit, 2));
      p.iters.assign(p.n(), i + 1);
      p.on_train.assign(p.n(), 1);
      const PerfValues pv = performance(p, measures, &task, model.get());
      for (int j = 0; j < M; ++j) res.perf_train[i][j] = pv.values[j].second;
      preds_train[i] = std::move(p);
      has_train[i] = 1;
    }
    if (opts.models) models[i] = model;
    if (extract_fn && !is_failure_model(model)) extracts[i] = extract_fn(model);
  });

  if (opts.models) res.models = std::move(models);
  if (extract_fn) res.extracts = std::move(extracts);

  std::vector<Prediction> parts;
  for (int i = 0; i < R; ++i) {
    if (has_test[i]) parts.push_back(std::move(preds_test[i]));
    if (has_train[i]) parts.push_back(std::move(preds_train[i]));
  }
  if (!parts.empty() && opts.keep_pred) {
    res.pred = concat_predictions(parts);
    res.has_pred = true;
  }

  for (int j = 0; j < M; ++j) {
    std::vector<double> col_test(R), col_train(R);
    for (int i = 0; i < R; ++i) {
      col_test[i] = res.perf_test[i][j];
      col_train[i] = res.perf_train[i][j];
    }
    if (pset == PredictSet::Test) col_train.clear();
    if (pset == PredictSet::Train) col_test.clear();
    const Prediction* merged = res.has_pred ? &res.pred : nullptr;
    const double v =
        measures[j].aggr.fn(measures[j], col_test, col_train, merged);
    res.aggr.emplace_back(measures[j].aggr_name(), v);
  }
  res.runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return res;
}

}  // namespace mlkit
