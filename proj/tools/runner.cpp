#include "runner.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "mlkit/costsens.hpp"
#include "mlkit/filters.hpp"
#include "mlkit/impute.hpp"
#include "mlkit/inspect.hpp"
#include "mlkit/multilabel.hpp"
#include "mlkit/parallel.hpp"
#include "mlkit/wrappers.hpp"

namespace mlkit::cli {

namespace {

namespace fs = std::filesystem;

json cell(double v) { return is_missing(v) ? json() : json(v); }

void info(const RunContext& ctx, const std::string& msg) {
  if (ctx.cfg.options.show_info) std::cerr << "mlkit: " << msg << "\n";
}

void write_out(const RunContext& ctx, const std::string& name,
               const std::string& content) {
  fs::create_directories(ctx.out_dir);
  write_text_file((fs::path(ctx.out_dir) / name).string(), content);
}

void write_json_out(const RunContext& ctx, const std::string& name,
                    const json& j) {
  write_out(ctx, name, j.dump(2) + "\n");
}

// the manifest is the one file allowed to differ between replays
void write_manifest(const RunContext& ctx, const std::string& command,
                    double seconds) {
  json j;
  j["command"] = command;
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["created"] = buf;
  j["level"] = ctx.level;
  j["runtime"] = seconds;
  j["seed"] = ctx.seed;
  j["workers"] = ctx.workers;
  write_json_out(ctx, "manifest.json", j);
}

void write_config_out(const RunContext& ctx) {
  write_json_out(ctx, "config.json", serialize_config(ctx.cfg));
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void apply_parallel(const RunContext& ctx) {
  parallel_config().workers = ctx.workers;
  parallel_config().level = ctx.level;
}

const TaskSpec& single_task(const RunContext& ctx, const char* cmd) {
  if (ctx.cfg.tasks.size() != 1)
    throw ConfigError(std::string("/task: ") + cmd +
                      " needs exactly one task");
  return ctx.cfg.tasks[0];
}

const LearnerSpec& single_learner(const RunContext& ctx, const char* cmd) {
  if (ctx.cfg.learners.size() != 1)
    throw ConfigError(std::string("/learner: ") + cmd +
                      " needs exactly one learner");
  return ctx.cfg.learners[0];
}

ResampleDesc require_resampling(const RunContext& ctx, const char* cmd) {
  if (!ctx.cfg.resampling)
    throw ConfigError(std::string("/resampling: ") + cmd +
                      " needs a resampling block");
  return build_resampling(*ctx.cfg.resampling, "/resampling");
}

// ---- wrapper construction ----

// typed access into a raw wrapper-arg object, with config-path errors
struct Args {
  const json& j;
  std::string path;

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(path + "/" + key + ": " + msg);
  }
  const json* get(const std::string& key) const {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  }
  double num(const std::string& key) const {
    const json* v = get(key);
    if (!v || !v->is_number()) fail(key, "expected a number");
    return v->get<double>();
  }
  double num_or(const std::string& key, double def) const {
    return get(key) ? num(key) : def;
  }
  std::optional<double> opt_num(const std::string& key) const {
    if (!get(key)) return std::nullopt;
    return num(key);
  }
  int int_or(const std::string& key, int def) const {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_number_integer()) fail(key, "expected an integer");
    return v->get<int>();
  }
  std::optional<int> opt_int(const std::string& key) const {
    if (!get(key)) return std::nullopt;
    return int_or(key, 0);
  }
  bool flag_or(const std::string& key, bool def) const {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(key, "expected a boolean");
    return v->get<bool>();
  }
  std::string str_or(const std::string& key, const std::string& def) const {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_string()) fail(key, "expected a string");
    return v->get<std::string>();
  }
  std::vector<std::string> str_list(const std::string& key) const {
    const json* v = get(key);
    if (!v) return {};
    if (!v->is_array()) fail(key, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *v) {
      if (!e.is_string()) fail(key, "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }
};

ImputeOpts build_impute_opts(const Args& a) {
  ImputeOpts opts;
  auto method_of = [&](const json& v, const std::string& key) {
    if (!v.is_string()) a.fail(key, "expected an impute method name");
    try {
      return impute_method_from_name(v.get<std::string>());
    } catch (const ValueError& e) {
      a.fail(key, e.what());
    }
  };
  if (const json* c = a.get("classes")) {
    if (!c->is_object()) a.fail("classes", "expected an object");
    for (const auto& [kind, m] : c->items())
      opts.classes[kind] = method_of(m, "classes/" + kind);
  }
  if (const json* c = a.get("cols")) {
    if (!c->is_object()) a.fail("cols", "expected an object");
    for (const auto& [col, m] : c->items())
      opts.cols[col] = method_of(m, "cols/" + col);
  }
  opts.dummy_cols = a.str_list("dummy_cols");
  opts.dummy_classes = a.str_list("dummy_classes");
  opts.dummy_type = a.str_or("dummy_type", "factor");
  return opts;
}

LearnerPtr apply_wrapper(LearnerPtr lrn, const WrapperSpec& w,
                         const std::string& path) {
  const Args a{w.args, path};
  const std::string& t = w.type;
  if (t == "downsample")
    return make_downsample_wrapper(lrn, a.num("perc"));
  if (t == "oversample")
    return make_oversample_wrapper(lrn, a.num("rate"), a.str_or("class", ""));
  if (t == "undersample")
    return make_undersample_wrapper(lrn, a.num("rate"), a.str_or("class", ""));
  if (t == "smote")
    return make_smote_wrapper(lrn, a.num("rate"), a.int_or("nn", 5));
  if (t == "bagging")
    return make_bagging_wrapper(lrn, a.int_or("iters", 10),
                                a.flag_or("replace", true), a.opt_num("size"),
                                a.num_or("feats", 2.0 / 3.0));
  if (t == "overbagging")
    return make_overbagging_wrapper(lrn, a.num("rate"), a.int_or("iters", 10),
                                    a.str_or("maxcl", "all"));
  if (t == "weightedclasses") {
    const json* v = a.get("weight");
    if (v && v->is_array()) {
      std::vector<double> ws;
      for (const auto& e : *v) {
        if (!e.is_number()) a.fail("weight", "expected numbers");
        ws.push_back(e.get<double>());
      }
      return make_weighted_classes_wrapper(lrn, ws);
    }
    return make_weighted_classes_wrapper(lrn, a.num("weight"));
  }
  if (t == "impute") return make_impute_wrapper(lrn, build_impute_opts(a));
  if (t == "filter")
    return make_filter_wrapper(lrn, a.str_or("method", ""), a.opt_int("abs"),
                               a.opt_num("perc"), a.opt_num("threshold"));
  if (t == "scale")
    return make_preproc_wrapper_scale(lrn, a.flag_or("center", true),
                                      a.flag_or("scale", true));
  if (t == "pca")
    return make_preproc_wrapper_pca(lrn, a.opt_num("thresh"),
                                    a.opt_int("n_comp"));
  if (t == "costsens.classif") return make_costsens_classif_wrapper(lrn);
  if (t == "costsens.regr") return make_costsens_regr_wrapper(lrn);
  if (t == "costsens.pairs") return make_costsens_weighted_pairs_wrapper(lrn);
  if (t == "multilabel.br") return make_multilabel_binary_relevance_wrapper(lrn);
  if (t == "multilabel.cc")
    return make_multilabel_classifier_chains_wrapper(lrn, a.str_list("order"));
  if (t == "multilabel.ns")
    return make_multilabel_nested_stacking_wrapper(lrn, a.str_list("order"));
  if (t == "multilabel.dbr") return make_multilabel_dbr_wrapper(lrn);
  if (t == "multilabel.stacking") return make_multilabel_stacking_wrapper(lrn);
  throw ConfigError(path + "/type: unknown wrapper type: " + t);
}

}  // namespace

// ---- builders ----

Task build_task(const TaskSpec& spec, const std::string& path) {
  if (!fs::exists(spec.path))
    throw ConfigError(path + "/path: file not found: " + spec.path);
  std::map<std::string, ColKind> schema;
  for (const auto& [col, kind] : spec.schema) {
    try {
      schema[col] = col_kind_from_name(kind);
    } catch (const ValueError& e) {
      throw ConfigError(path + "/schema/" + col + ": " + e.what());
    }
  }
  try {
    Dataset data = load_dataset(spec.path, schema);
    const TaskKind kind = task_kind_from_name(spec.kind);

    std::vector<double> weights;
    if (!spec.weights.empty()) {
      if (!data.has_col(spec.weights))
        throw ValueError("no such weight column: " + spec.weights);
      const FeatureColumn& wc = data.col(spec.weights);
      if (wc.kind != ColKind::Numeric)
        throw ValueError("weight column must be numeric: " + spec.weights);
      weights = wc.values;
      std::vector<std::string> keep;
      for (const auto& c : data.columns)
        if (c.name != spec.weights) keep.push_back(c.name);
      data = data.select_cols(keep);
    }

    if (kind == TaskKind::CostSens) {
      if (spec.cost_cols.size() < 2)
        throw ValueError("costsens needs at least two cost_cols");
      Matrix costs(data.n_rows, static_cast<int>(spec.cost_cols.size()));
      for (std::size_t c = 0; c < spec.cost_cols.size(); ++c) {
        if (!data.has_col(spec.cost_cols[c]))
          throw ValueError("no such cost column: " + spec.cost_cols[c]);
        const FeatureColumn& col = data.col(spec.cost_cols[c]);
        if (col.kind != ColKind::Numeric)
          throw ValueError("cost column must be numeric: " + spec.cost_cols[c]);
        for (int r = 0; r < data.n_rows; ++r)
          costs.at(r, static_cast<int>(c)) = col.values[r];
      }
      std::vector<std::string> keep;
      for (const auto& c : data.columns) {
        bool is_cost = false;
        for (const auto& cc : spec.cost_cols) is_cost |= c.name == cc;
        if (!is_cost) keep.push_back(c.name);
      }
      data = data.select_cols(keep);
      Task task = make_costsens_task(std::move(data), std::move(costs),
                                     spec.cost_cols, spec.id);
      task.weights = std::move(weights);
      return task;
    }
    if (kind == TaskKind::Multilabel) {
      Task task = make_multilabel_task(std::move(data), spec.targets, spec.id);
      task.weights = std::move(weights);
      return task;
    }
    MakeTaskOptions opts;
    opts.id = spec.id;
    opts.positive = spec.positive;
    opts.weights = std::move(weights);
    return make_task(kind, std::move(data), spec.targets, std::move(opts));
  } catch (const ValueError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ResampleDesc build_resampling(const ResamplingSpec& spec,
                              const std::string& path) {
  try {
    ResampleDescOpts opts;
    opts.split = spec.split;
    opts.reps = spec.reps > 0 ? spec.reps : -1;
    opts.stratify = spec.stratify;
    opts.stratify_cols = spec.stratify_cols;
    opts.predict = spec.predict;
    return make_resample_desc(spec.method, spec.iters, opts);
  } catch (const ValueError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<Measure> build_measures(const std::vector<MeasureSpec>& specs,
                                    const std::string& path) {
  std::vector<Measure> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      Measure m = get_measure(specs[i].id);
      if (!specs[i].aggr.empty()) m = set_aggregation(std::move(m), specs[i].aggr);
      out.push_back(std::move(m));
    } catch (const ValueError& e) {
      throw ConfigError(path + "/" + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

ParamSet build_param_set(const std::vector<ParamSpec>& specs,
                         const std::string& path) {
  ParamSet ps;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const ParamSpec& s = specs[i];
    const std::string ppath = path + "/" + std::to_string(i);
    try {
      Param p;
      if (s.type == "numeric") {
        p = make_numeric_param(s.id, s.lower, s.upper);
      } else if (s.type == "integer") {
        p = make_integer_param(s.id, static_cast<long long>(s.lower),
                               static_cast<long long>(s.upper));
      } else if (s.type == "discrete") {
        p = make_discrete_param(s.id, s.values);
      } else {
        p = make_logical_param(s.id);
      }
      if (s.trafo != "none") p.trafo = named_trafo(s.trafo);
      ps.add(std::move(p));
    } catch (const ValueError& e) {
      throw ConfigError(ppath + ": " + e.what());
    }
  }
  return ps;
}

json sanitize_volatile(json j) {
  if (j.is_object()) {
    for (auto& [key, value] : j.items()) {
      if ((key == "exec.time" || key == "runtime") && value.is_number())
        value = 0.0;
      else
        value = sanitize_volatile(value);
    }
  } else if (j.is_array()) {
    for (auto& e : j) e = sanitize_volatile(e);
  }
  return j;
}

// ---- learner construction ----

LearnerPtr build_learner(const LearnerSpec& spec, const OptionsSpec& options,
                         const std::string& path) {
  if (!learner_registered(spec.class_name))
    throw ConfigError(path + "/class: unknown learner class: " +
                      spec.class_name);
  LearnerConfig lc;
  lc.on_learner_error = options.on_learner_error == "warn"
                            ? OnLearnerError::Warn
                            : OnLearnerError::Stop;
  lc.show_info = options.show_info;
  LearnerPtr lrn;
  try {
    lrn = make_learner(spec.class_name, spec.predict_type, spec.hyperpars, "",
                       lc);
  } catch (const ValueError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  // first listed wrapper is the outermost layer, so wrap back to front
  for (int i = static_cast<int>(spec.wrappers.size()) - 1; i >= 0; --i) {
    const std::string wpath = path + "/wrappers/" + std::to_string(i);
    const WrapperSpec& w = spec.wrappers[i];
    try {
      if (w.type == "tune") {
        const ResampleDesc desc = build_resampling(
            parse_resampling(w.args.at("resampling"), wpath + "/resampling"),
            wpath + "/resampling");
        json block = w.args;
        block.erase("type");
        block.erase("resampling");
        const TuningSpec ts = parse_tuning_block(block, wpath);
        TuneControl control;
        control.method = ts.method;
        control.resolution = ts.resolution;
        control.maxit = ts.maxit;
        control.impute_val = ts.impute_val;
        control.tune_threshold = ts.tune_threshold;
        lrn = make_tune_wrapper(lrn, desc, build_param_set(ts.params, wpath),
                                control,
                                build_measures(ts.measures, wpath + "/measures"));
      } else if (w.type == "featsel") {
        const ResampleDesc desc = build_resampling(
            parse_resampling(w.args.at("resampling"), wpath + "/resampling"),
            wpath + "/resampling");
        json block = w.args;
        block.erase("type");
        block.erase("resampling");
        const FeatselSpec fsp = parse_featsel_block(block, wpath);
        FeatSelControl control;
        control.method = fsp.method;
        control.maxit = fsp.maxit;
        control.prob = fsp.prob;
        control.seq_method = fsp.seq_method;
        control.alpha = fsp.alpha;
        control.beta = fsp.beta;
        control.max_features = fsp.max_features;
        lrn = make_featsel_wrapper(lrn, desc, control,
                                   build_measures(fsp.measures,
                                                  wpath + "/measures"));
      } else {
        lrn = apply_wrapper(lrn, w, wpath);
      }
    } catch (const ValueError& e) {
      throw ConfigError(wpath + ": " + e.what());
    }
  }
  try {
    if (!spec.wrappers.empty()) {
      if (!spec.predict_type.empty())
        lrn = set_predict_type(lrn, spec.predict_type);
      lrn = set_learner_config(lrn, lc);
    }
    if (!spec.id.empty()) lrn = set_learner_id(lrn, spec.id);
  } catch (const ValueError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return lrn;
}

// ---- commands ----

namespace {

json aggr_object(const std::vector<std::pair<std::string, double>>& aggr) {
  json j = json::object();
  for (const auto& [name, v] : aggr) j[name] = cell(v);
  return j;
}

bool any_error(const std::vector<std::string>& msgs) {
  for (const auto& m : msgs)
    if (!m.empty()) return true;
  return false;
}

// one CSV over all benchmark cells; schemas may differ per task, absent
// columns stay NA
Table merged_prediction_table(const BenchmarkResult& bmr) {
  Table out;
  out.columns = {"task.id", "learner.id"};
  std::vector<std::pair<std::vector<std::string>, Table>> parts;
  for (const auto& [tid, lid, pred] : get_bmr_predictions(bmr)) {
    Table pt = pred.as_table();
    for (const auto& c : pt.columns)
      if (out.col_index(c) < 0) out.columns.push_back(c);
    parts.push_back({{tid, lid}, std::move(pt)});
  }
  for (const auto& [ids, pt] : parts) {
    std::vector<int> dest(pt.columns.size());
    for (std::size_t c = 0; c < pt.columns.size(); ++c)
      dest[c] = out.col_index(pt.columns[c]);
    for (const auto& src : pt.rows) {
      auto& row = out.add_row();
      row[0] = ids[0];
      row[1] = ids[1];
      for (std::size_t c = 0; c < src.size(); ++c) row[dest[c]] = src[c];
    }
  }
  return out;
}

}  // namespace

RunContext make_run_context(const std::string& config_path,
                            const std::string& out_dir,
                            std::optional<long long> seed,
                            std::optional<int> workers,
                            std::optional<std::string> level) {
  RunContext ctx;
  ctx.cfg = load_config_file(config_path);
  ctx.out_dir = out_dir;
  ctx.seed = seed.value_or(ctx.cfg.seed);
  // the effective seed is part of the experiment identity, so it lands in
  // config.json; the worker count must not (results are worker-independent)
  ctx.cfg.seed = ctx.seed;
  ctx.workers = workers.value_or(ctx.cfg.workers);
  if (ctx.workers < 1)
    throw ConfigError("/workers: expected a positive integer");
  if (level) {
    static const std::set<std::string> known{"benchmark", "resample",
                                             "selectFeatures", "tuneParams"};
    if (!known.count(*level))
      throw ConfigError(
          "--level: expected benchmark, resample, selectFeatures or "
          "tuneParams");
    ctx.level = *level;
  }
  return ctx;
}

void cmd_resample(const RunContext& ctx) {
  Timer timer;
  apply_parallel(ctx);
  const Task task = build_task(single_task(ctx, "resample"), "/task");
  const LearnerPtr lrn =
      build_learner(single_learner(ctx, "resample"), ctx.cfg.options,
                    "/learner");
  const ResampleDesc desc = require_resampling(ctx, "resample");
  const BenchmarkSpec bs = ctx.cfg.benchmark.value_or(BenchmarkSpec{});

  ResampleOpts opts;
  opts.measures = build_measures(ctx.cfg.measures, "/measures");
  opts.keep_pred = bs.keep_pred;
  opts.extract = bs.extract;
  info(ctx, "resampling " + lrn->id + " on " + task.id + " (" + desc.name() +
                ")");
  const ResampleResult rr =
      resample(lrn, task, desc, opts, Rng(static_cast<std::uint64_t>(ctx.seed)));

  json aggr;
  aggr["task.id"] = rr.task_id;
  aggr["learner.id"] = rr.learner_id;
  aggr["resampling"] = desc.name();
  aggr["iters"] = static_cast<int>(rr.perf_test.size());
  aggr["aggr"] = aggr_object(rr.aggr);
  if (any_error(rr.err_msgs)) aggr["err.msgs"] = rr.err_msgs;
  write_json_out(ctx, "aggr.json", aggr);
  write_out(ctx, "perf.csv", rr.perf_table(false).to_csv());
  if (desc.predict != PredictSet::Test)
    write_out(ctx, "perf_train.csv", rr.perf_table(true).to_csv());
  if (rr.has_pred) write_out(ctx, "pred.csv", rr.pred.to_csv());
  if (!bs.extract.empty())
    write_json_out(ctx, "extracts.json", sanitize_volatile(json(rr.extracts)));
  write_config_out(ctx);
  write_manifest(ctx, "resample", timer.seconds());
}

void cmd_tune(const RunContext& ctx) {
  Timer timer;
  apply_parallel(ctx);
  if (!ctx.cfg.tuning)
    throw ConfigError("/tuning: tune needs a tuning block");
  const Task task = build_task(single_task(ctx, "tune"), "/task");
  const LearnerPtr lrn =
      build_learner(single_learner(ctx, "tune"), ctx.cfg.options, "/learner");
  const ResampleDesc desc = require_resampling(ctx, "tune");
  const TuningSpec& ts = *ctx.cfg.tuning;

  TuneControl control;
  control.method = ts.method;
  control.resolution = ts.resolution;
  control.maxit = ts.maxit;
  control.impute_val = ts.impute_val;
  control.tune_threshold = ts.tune_threshold;
  const ParamSet ps = build_param_set(ts.params, "/tuning/params");
  std::vector<Measure> measures =
      ts.measures.empty() ? build_measures(ctx.cfg.measures, "/measures")
                          : build_measures(ts.measures, "/tuning/measures");

  info(ctx, "tuning " + lrn->id + " on " + task.id + " (" + control.method +
                " search)");
  TuneResult tr = tune_params(lrn, task, desc, ps, control, measures,
                              Rng(static_cast<std::uint64_t>(ctx.seed)));
  for (auto& row : tr.opt_path.rows) row.exec_time = 0.0;

  json aggr;
  aggr["x"] = tr.x;
  aggr["x.trafo"] = tr.x_trafo;
  aggr["y"] = aggr_object(tr.y);
  if (!tr.threshold.empty()) {
    aggr["threshold"] = tr.threshold;
    aggr["threshold.value"] = cell(tr.threshold_value);
  }
  write_json_out(ctx, "aggr.json", aggr);
  write_json_out(ctx, "tune.json", sanitize_volatile(tr.to_json()));
  write_out(ctx, "optpath.csv", tr.opt_path.to_csv());
  write_config_out(ctx);
  write_manifest(ctx, "tune", timer.seconds());
}

void cmd_featsel(const RunContext& ctx) {
  Timer timer;
  apply_parallel(ctx);
  const Task task = build_task(single_task(ctx, "featsel"), "/task");
  const LearnerPtr lrn =
      build_learner(single_learner(ctx, "featsel"), ctx.cfg.options,
                    "/learner");
  const ResampleDesc desc = require_resampling(ctx, "featsel");
  const FeatselSpec fsp = ctx.cfg.featsel.value_or(FeatselSpec{});

  FeatSelControl control;
  control.method = fsp.method;
  control.maxit = fsp.maxit;
  control.prob = fsp.prob;
  control.seq_method = fsp.seq_method;
  control.alpha = fsp.alpha;
  control.beta = fsp.beta;
  control.max_features = fsp.max_features;
  std::vector<Measure> measures =
      fsp.measures.empty() ? build_measures(ctx.cfg.measures, "/measures")
                           : build_measures(fsp.measures, "/featsel/measures");

  info(ctx, "selecting features for " + lrn->id + " on " + task.id + " (" +
                control.method + ")");
  FeatSelResult fr = select_features(lrn, task, desc, control, measures,
                                     Rng(static_cast<std::uint64_t>(ctx.seed)));
  for (auto& row : fr.rows) row.exec_time = 0.0;

  json aggr;
  aggr["x"] = fr.x;
  aggr["y"] = aggr_object(fr.y);
  write_json_out(ctx, "aggr.json", aggr);
  write_json_out(ctx, "featsel.json", sanitize_volatile(fr.to_json()));
  write_out(ctx, "optpath.csv", fr.path_csv());
  write_config_out(ctx);
  write_manifest(ctx, "featsel", timer.seconds());
}

void cmd_benchmark(const RunContext& ctx) {
  Timer timer;
  apply_parallel(ctx);
  if (ctx.cfg.tasks.empty())
    throw ConfigError("/tasks: benchmark needs at least one task");
  if (ctx.cfg.learners.empty())
    throw ConfigError("/learners: benchmark needs at least one learner");
  const ResampleDesc desc = require_resampling(ctx, "benchmark");
  const BenchmarkSpec bs = ctx.cfg.benchmark.value_or(BenchmarkSpec{});

  std::vector<Task> tasks;
  for (std::size_t i = 0; i < ctx.cfg.tasks.size(); ++i)
    tasks.push_back(build_task(ctx.cfg.tasks[i],
                               ctx.cfg.tasks.size() == 1
                                   ? "/task"
                                   : "/tasks/" + std::to_string(i)));
  std::vector<LearnerPtr> learners;
  for (std::size_t i = 0; i < ctx.cfg.learners.size(); ++i)
    learners.push_back(build_learner(ctx.cfg.learners[i], ctx.cfg.options,
                                     ctx.cfg.learners.size() == 1
                                         ? "/learner"
                                         : "/learners/" + std::to_string(i)));

  BenchmarkOpts opts;
  opts.measures = build_measures(ctx.cfg.measures, "/measures");
  opts.keep_pred = bs.keep_pred;
  opts.extract = bs.extract;
  info(ctx, "benchmarking " + std::to_string(learners.size()) +
                " learners on " + std::to_string(tasks.size()) + " tasks");
  BenchmarkResult bmr = benchmark(learners, tasks, desc, opts,
                                  Rng(static_cast<std::uint64_t>(ctx.seed)));

  json aggr = json::array();
  for (const auto& tid : bmr.task_ids) {
    for (const auto& lid : bmr.learner_ids) {
      const ResampleResult& rr = bmr.at(tid, lid);
      json row;
      row["task.id"] = tid;
      row["learner.id"] = lid;
      row["aggr"] = aggr_object(rr.aggr);
      if (any_error(rr.err_msgs)) row["err.msgs"] = rr.err_msgs;
      aggr.push_back(std::move(row));
    }
  }
  write_json_out(ctx, "aggr.json", aggr);
  write_out(ctx, "perf.csv", get_bmr_performances(bmr).to_csv());
  if (bs.keep_pred)
    write_out(ctx, "pred.csv", merged_prediction_table(bmr).to_csv());
  write_json_out(ctx, "benchmark.json", sanitize_volatile(bmr.to_json()));

  if (bs.stats) {
    write_out(ctx, "ranks.csv", rank_matrix(bmr).as_table().to_csv());
    const FriedmanTestResult ft = friedman_test(bmr);
    json fj;
    fj["statistic"] = ft.statistic;
    fj["df"] = ft.df;
    fj["p.value"] = ft.p_value;
    write_json_out(ctx, "friedman.json", fj);
  }
  if (bs.cd) {
    const CriticalDifferencesResult cd = critical_differences(
        bmr, bmr.measures.at(0), bs.cd_test, bs.cd_alpha, bs.cd_baseline);
    json cj;
    cj["test"] = cd.test;
    cj["alpha"] = cd.alpha;
    cj["cd"] = cd.cd;
    json ranks = json::object();
    for (std::size_t i = 0; i < cd.learner_ids.size(); ++i)
      ranks[cd.learner_ids[i]] = cd.mean_ranks[i];
    cj["mean.ranks"] = std::move(ranks);
    json pairs = json::array();
    for (const auto& [i, j] : cd.significant_pairs)
      pairs.push_back({cd.learner_ids[i], cd.learner_ids[j]});
    cj["significant.pairs"] = std::move(pairs);
    if (!cd.baseline.empty()) {
      cj["baseline"] = cd.baseline;
      cj["interval"] = {cd.interval_lo, cd.interval_hi};
    }
    write_json_out(ctx, "cd.json", cj);
  }
  write_config_out(ctx);
  write_manifest(ctx, "benchmark", timer.seconds());
}

void cmd_inspect(const RunContext& ctx, const std::string& subcommand) {
  Timer timer;
  apply_parallel(ctx);
  if (!ctx.cfg.inspect)
    throw ConfigError("/inspect: inspect needs an inspect block");
  const InspectSpec& is = *ctx.cfg.inspect;
  if (!subcommand.empty() && subcommand != is.type)
    throw ConfigError("/inspect/type: config type " + is.type +
                      " does not match subcommand " + subcommand);
  const Rng rng(static_cast<std::uint64_t>(ctx.seed));

  if (is.type == "threshperf" || is.type == "calibration") {
    const Task task = build_task(single_task(ctx, is.type.c_str()), "/task");
    const LearnerPtr lrn =
        build_learner(single_learner(ctx, is.type.c_str()), ctx.cfg.options,
                      "/learner");
    const ResampleDesc desc = require_resampling(ctx, is.type.c_str());
    ResampleOpts opts;
    opts.measures = build_measures(ctx.cfg.measures, "/measures");
    opts.keep_pred = true;
    info(ctx, is.type + " sweep of " + lrn->id + " on " + task.id);
    const ResampleResult rr =
        resample(lrn, task, desc, opts, rng);
    if (is.type == "threshperf") {
      const Table t = thresh_vs_perf_data(rr, opts.measures, is.gridsize,
                                          is.aggregate);
      write_out(ctx, "threshperf.csv", t.to_csv());
    } else {
      CalibrationBreaks breaks;
      breaks.rule = is.breaks_rule;
      breaks.bins = is.bins;
      breaks.cuts = is.cuts;
      const CalibrationData cd =
          calibration_data({{rr.learner_id, rr.pred}}, breaks, is.groups);
      write_out(ctx, "calibration.csv", cd.proportions.to_csv());
      write_out(ctx, "rag.csv", cd.rag.to_csv());
    }
  } else if (is.type == "learningcurve") {
    const Task task = build_task(single_task(ctx, "learningcurve"), "/task");
    if (ctx.cfg.learners.empty())
      throw ConfigError("/learners: learningcurve needs at least one learner");
    std::vector<LearnerPtr> learners;
    for (std::size_t i = 0; i < ctx.cfg.learners.size(); ++i)
      learners.push_back(build_learner(ctx.cfg.learners[i], ctx.cfg.options,
                                       ctx.cfg.learners.size() == 1
                                           ? "/learner"
                                           : "/learners/" + std::to_string(i)));
    const ResampleDesc desc = require_resampling(ctx, "learningcurve");
    info(ctx, "learning curve over " + std::to_string(learners.size()) +
                  " learners on " + task.id);
    const Table t = learning_curve_data(
        learners, task, is.percs, build_measures(ctx.cfg.measures, "/measures"),
        desc, rng);
    write_out(ctx, "learningcurve.csv", t.to_csv());
  } else {  // pdp | fanova
    const Task task = build_task(single_task(ctx, is.type.c_str()), "/task");
    const LearnerPtr lrn =
        build_learner(single_learner(ctx, is.type.c_str()), ctx.cfg.options,
                      "/learner");
    info(ctx, is.type + " of " + lrn->id + " on " + task.id);
    const ModelPtr model = train(lrn, task, {}, {}, rng);
    if (is.type == "pdp") {
      PartialDependenceOpts opts;
      opts.interaction = is.interaction;
      opts.gridsize = is.gridsize;
      opts.fmin = is.fmin;
      opts.fmax = is.fmax;
      opts.fun = is.fun;
      opts.quantiles = is.quantiles;
      opts.individual = is.individual;
      opts.center = is.center;
      opts.derivative = is.derivative;
      opts.bounds = {is.bounds[0], is.bounds[1]};
      const Table t = partial_dependence_data(model, task, is.features, opts);
      write_out(ctx, "pdp.csv", t.to_csv());
    } else {
      const Table t = functional_anova_data(model, task, is.features, is.depth,
                                            is.fun, is.gridsize);
      write_out(ctx, "fanova.csv", t.to_csv());
    }
  }
  write_config_out(ctx);
  write_manifest(ctx, "inspect " + is.type, timer.seconds());
}

Table cmd_list(const std::string& what, const std::string& kind,
               const std::set<std::string>& properties) {
  Table t;
  if (what == "learners") {
    t.columns = {"class", "kind", "properties", "package"};
    for (const auto& info : list_learners(kind, properties)) {
      auto& row = t.add_row();
      row[0] = info.class_name;
      row[1] = task_kind_name(info.kind);
      std::string props;
      for (const auto& p : info.properties)
        props += (props.empty() ? "" : ";") + p;
      row[2] = props;
      row[3] = info.package;
    }
    return t;
  }
  if (what == "measures") {
    t.columns = {"id", "name", "minimize", "best", "worst", "properties"};
    std::set<std::string> want = properties;
    if (!kind.empty()) want.insert(kind);
    for (const auto& m : list_measures(want)) {
      auto& row = t.add_row();
      row[0] = m.id;
      row[1] = m.name;
      row[2] = m.minimize;
      row[3] = cell(m.best);
      row[4] = cell(m.worst);
      std::string props;
      for (const auto& p : m.properties)
        props += (props.empty() ? "" : ";") + p;
      row[5] = props;
    }
    return t;
  }
  if (what == "filters") {
    t.columns = {"name", "task.kinds"};
    for (const auto& name : list_filters()) {
      const FilterInfo& fi = get_filter(name);
      auto& row = t.add_row();
      row[0] = name;
      std::string kinds;
      for (const auto& k : fi.task_kinds)
        kinds += (kinds.empty() ? "" : ";") + k;
      row[1] = kinds;
    }
    return t;
  }
  throw ConfigError("list: expected learners, measures or filters");
}

}  // namespace mlkit::cli
