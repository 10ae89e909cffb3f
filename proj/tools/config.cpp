#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mlkit::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void need_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void need_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
}

// typo guard: every object is checked against its known key set
void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& path) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) fail(path + "/" + key, "unknown key");
}

const json* get(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

std::string str_at(const json& j, const std::string& key,
                   const std::string& path, const std::string& def = "",
                   bool required = false) {
  const json* v = get(j, key);
  if (!v) {
    if (required) fail(path + "/" + key, "missing required key");
    return def;
  }
  if (!v->is_string()) fail(path + "/" + key, "expected a string");
  return v->get<std::string>();
}

double num_at(const json& j, const std::string& key, const std::string& path,
              double def) {
  const json* v = get(j, key);
  if (!v) return def;
  if (!v->is_number()) fail(path + "/" + key, "expected a number");
  return v->get<double>();
}

long long int_at(const json& j, const std::string& key,
                 const std::string& path, long long def) {
  const json* v = get(j, key);
  if (!v) return def;
  if (!v->is_number_integer()) fail(path + "/" + key, "expected an integer");
  return v->get<long long>();
}

bool bool_at(const json& j, const std::string& key, const std::string& path,
             bool def) {
  const json* v = get(j, key);
  if (!v) return def;
  if (!v->is_boolean()) fail(path + "/" + key, "expected a boolean");
  return v->get<bool>();
}

std::vector<std::string> str_list_at(const json& j, const std::string& key,
                                     const std::string& path) {
  const json* v = get(j, key);
  if (!v) return {};
  if (!v->is_array()) fail(path + "/" + key, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : *v) {
    if (!e.is_string()) fail(path + "/" + key, "expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<double> num_list_at(const json& j, const std::string& key,
                                const std::string& path) {
  const json* v = get(j, key);
  if (!v) return {};
  if (!v->is_array()) fail(path + "/" + key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *v) {
    if (!e.is_number()) fail(path + "/" + key, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::map<std::string, double> num_map_at(const json& j, const std::string& key,
                                         const std::string& path) {
  const json* v = get(j, key);
  if (!v) return {};
  if (!v->is_object()) fail(path + "/" + key, "expected an object of numbers");
  std::map<std::string, double> out;
  for (const auto& [name, value] : v->items()) {
    if (!value.is_number())
      fail(path + "/" + key + "/" + name, "expected a number");
    out[name] = value.get<double>();
  }
  return out;
}

TaskSpec parse_task(const json& j, const std::string& path) {
  need_object(j, path);
  check_keys(j,
             {"id", "kind", "path", "schema", "target", "targets", "positive",
              "weights", "cost_cols"},
             path);
  TaskSpec s;
  s.path = str_at(j, "path", path, "", true);
  s.kind = str_at(j, "kind", path, "classif");
  s.id = str_at(j, "id", path);
  if (s.id.empty()) {
    // basename without extension
    std::string base = s.path;
    const auto slash = base.find_last_of("/\\");
    if (slash != std::string::npos) base = base.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
    s.id = base.empty() ? "task" : base;
  }
  if (const json* sc = get(j, "schema")) {
    if (!sc->is_object()) fail(path + "/schema", "expected an object");
    for (const auto& [col, kind] : sc->items()) {
      if (!kind.is_string())
        fail(path + "/schema/" + col, "expected a column kind string");
      s.schema[col] = kind.get<std::string>();
    }
  }
  if (get(j, "target") && get(j, "targets"))
    fail(path, "give either target or targets, not both");
  if (const json* t = get(j, "target")) {
    if (!t->is_string()) fail(path + "/target", "expected a string");
    s.targets = {t->get<std::string>()};
  } else {
    s.targets = str_list_at(j, "targets", path);
  }
  s.positive = str_at(j, "positive", path);
  s.weights = str_at(j, "weights", path);
  s.cost_cols = str_list_at(j, "cost_cols", path);
  return s;
}

// wrapper arg schemas; deep blocks (tune/featsel) reuse the block parsers
void validate_wrapper(const WrapperSpec& w, const std::string& path) {
  const json& a = w.args;
  auto keys = [&](const std::set<std::string>& allowed) {
    check_keys(a, allowed, path);
  };
  auto require = [&](const std::string& key) {
    if (!get(a, key)) fail(path + "/" + key, "missing required key");
  };
  if (w.type == "downsample") {
    keys({"type", "perc"});
    require("perc");
  } else if (w.type == "oversample" || w.type == "undersample") {
    keys({"type", "rate", "class"});
    require("rate");
  } else if (w.type == "smote") {
    keys({"type", "rate", "nn"});
    require("rate");
  } else if (w.type == "bagging") {
    keys({"type", "iters", "replace", "size", "feats"});
  } else if (w.type == "overbagging") {
    keys({"type", "rate", "iters", "maxcl"});
    require("rate");
  } else if (w.type == "weightedclasses") {
    keys({"type", "weight"});
    require("weight");
  } else if (w.type == "impute") {
    keys({"type", "classes", "cols", "dummy_cols", "dummy_classes",
          "dummy_type"});
  } else if (w.type == "filter") {
    keys({"type", "method", "abs", "perc", "threshold"});
    require("method");
  } else if (w.type == "scale") {
    keys({"type", "center", "scale"});
  } else if (w.type == "pca") {
    keys({"type", "thresh", "n_comp"});
  } else if (w.type == "tune" || w.type == "featsel") {
    keys(w.type == "tune"
             ? std::set<std::string>{"type", "params", "control", "resampling",
                                     "measures"}
             : std::set<std::string>{"type", "control", "resampling",
                                     "measures"});
    require("resampling");
    parse_resampling(a.at("resampling"), path + "/resampling");
    json block = a;
    block.erase("type");
    block.erase("resampling");
    if (w.type == "tune")
      parse_tuning_block(block, path);
    else
      parse_featsel_block(block, path);
  } else if (w.type == "costsens.classif" || w.type == "costsens.regr" ||
             w.type == "costsens.pairs") {
    keys({"type"});
  } else if (w.type == "multilabel.br" || w.type == "multilabel.dbr" ||
             w.type == "multilabel.stacking") {
    keys({"type"});
  } else if (w.type == "multilabel.cc" || w.type == "multilabel.ns") {
    keys({"type", "order"});
  } else {
    fail(path + "/type", "unknown wrapper type: " + w.type);
  }
}

LearnerSpec parse_learner(const json& j, const std::string& path) {
  LearnerSpec s;
  if (j.is_string()) {
    s.class_name = j.get<std::string>();
    return s;
  }
  need_object(j, path);
  check_keys(j, {"class", "id", "predict_type", "hyperpars", "wrappers"}, path);
  s.class_name = str_at(j, "class", path, "", true);
  s.id = str_at(j, "id", path);
  s.predict_type = str_at(j, "predict_type", path);
  if (const json* hp = get(j, "hyperpars")) {
    if (!hp->is_object()) fail(path + "/hyperpars", "expected an object");
    for (const auto& [name, value] : hp->items()) s.hyperpars[name] = value;
  }
  if (const json* ws = get(j, "wrappers")) {
    need_array(*ws, path + "/wrappers");
    for (std::size_t i = 0; i < ws->size(); ++i) {
      const std::string wpath = path + "/wrappers/" + std::to_string(i);
      const json& wj = (*ws)[i];
      need_object(wj, wpath);
      WrapperSpec w;
      w.type = str_at(wj, "type", wpath, "", true);
      w.args = wj;
      validate_wrapper(w, wpath);
      s.wrappers.push_back(std::move(w));
    }
  }
  return s;
}

}  // namespace

TuningSpec parse_tuning_block(const json& j, const std::string& path) {
  need_object(j, path);
  check_keys(j, {"params", "control", "measures"}, path);
  TuningSpec s;
  if (!get(j, "params")) fail(path + "/params", "missing required key");
  s.params = parse_params(j.at("params"), path + "/params");
  if (const json* c = get(j, "control")) {
    const std::string cpath = path + "/control";
    need_object(*c, cpath);
    check_keys(*c,
               {"method", "resolution", "maxit", "impute_val",
                "tune_threshold"},
               cpath);
    s.method = str_at(*c, "method", cpath, "grid");
    if (s.method != "grid" && s.method != "random")
      fail(cpath + "/method", "expected grid or random");
    s.resolution = static_cast<int>(int_at(*c, "resolution", cpath, 10));
    s.maxit = static_cast<int>(int_at(*c, "maxit", cpath, 100));
    if (const json* iv = get(*c, "impute_val")) {
      if (!iv->is_number()) fail(cpath + "/impute_val", "expected a number");
      s.impute_val = iv->get<double>();
    }
    s.tune_threshold = bool_at(*c, "tune_threshold", cpath, false);
  }
  if (get(j, "measures"))
    s.measures = parse_measures(j.at("measures"), path + "/measures");
  return s;
}

FeatselSpec parse_featsel_block(const json& j, const std::string& path) {
  need_object(j, path);
  check_keys(j, {"control", "measures"}, path);
  FeatselSpec s;
  if (const json* c = get(j, "control")) {
    const std::string cpath = path + "/control";
    need_object(*c, cpath);
    check_keys(*c,
               {"method", "maxit", "prob", "seq_method", "alpha", "beta",
                "max_features"},
               cpath);
    s.method = str_at(*c, "method", cpath, "sequential");
    if (s.method != "sequential" && s.method != "exhaustive" &&
        s.method != "random")
      fail(cpath + "/method", "expected sequential, exhaustive or random");
    s.maxit = static_cast<int>(int_at(*c, "maxit", cpath, 100));
    s.prob = num_at(*c, "prob", cpath, 0.5);
    s.seq_method = str_at(*c, "seq_method", cpath, "sfs");
    s.alpha = num_at(*c, "alpha", cpath, 0.01);
    s.beta = num_at(*c, "beta", cpath, 0.01);
    if (const json* mf = get(*c, "max_features")) {
      if (!mf->is_number_integer())
        fail(cpath + "/max_features", "expected an integer");
      s.max_features = mf->get<int>();
    }
  }
  if (get(j, "measures"))
    s.measures = parse_measures(j.at("measures"), path + "/measures");
  return s;
}

namespace {

BenchmarkSpec parse_benchmark(const json& j, const std::string& path) {
  need_object(j, path);
  check_keys(j, {"keep_pred", "extract", "stats", "cd"}, path);
  BenchmarkSpec s;
  s.keep_pred = bool_at(j, "keep_pred", path, true);
  s.extract = str_at(j, "extract", path);
  s.stats = bool_at(j, "stats", path, false);
  if (const json* c = get(j, "cd")) {
    const std::string cpath = path + "/cd";
    need_object(*c, cpath);
    check_keys(*c, {"test", "alpha", "baseline"}, cpath);
    s.cd = true;
    s.cd_test = str_at(*c, "test", cpath, "nemenyi");
    s.cd_alpha = num_at(*c, "alpha", cpath, 0.05);
    s.cd_baseline = str_at(*c, "baseline", cpath);
  }
  return s;
}

InspectSpec parse_inspect(const json& j, const std::string& path) {
  need_object(j, path);
  InspectSpec s;
  s.type = str_at(j, "type", path, "", true);
  if (s.type == "threshperf") {
    check_keys(j, {"type", "gridsize", "aggregate"}, path);
    s.gridsize = static_cast<int>(int_at(j, "gridsize", path, 100));
    s.aggregate = bool_at(j, "aggregate", path, true);
  } else if (s.type == "calibration") {
    check_keys(j, {"type", "breaks", "groups"}, path);
    if (const json* b = get(j, "breaks")) {
      const std::string bpath = path + "/breaks";
      need_object(*b, bpath);
      check_keys(*b, {"rule", "bins", "cuts"}, bpath);
      s.breaks_rule = str_at(*b, "rule", bpath);
      s.bins = static_cast<int>(int_at(*b, "bins", bpath, 0));
      s.cuts = num_list_at(*b, "cuts", bpath);
    }
    s.groups = static_cast<int>(int_at(j, "groups", path, 0));
  } else if (s.type == "learningcurve") {
    check_keys(j, {"type", "percs"}, path);
    s.percs = num_list_at(j, "percs", path);
  } else if (s.type == "pdp") {
    check_keys(j,
               {"type", "features", "gridsize", "interaction", "individual",
                "derivative", "fun", "quantiles", "fmin", "fmax", "center",
                "bounds"},
               path);
    s.features = str_list_at(j, "features", path);
    if (s.features.empty()) fail(path + "/features", "missing required key");
    s.gridsize = static_cast<int>(int_at(j, "gridsize", path, 10));
    s.interaction = bool_at(j, "interaction", path, false);
    s.individual = bool_at(j, "individual", path, false);
    s.derivative = bool_at(j, "derivative", path, false);
    s.fun = str_at(j, "fun", path, "mean");
    if (get(j, "quantiles")) s.quantiles = num_list_at(j, "quantiles", path);
    s.fmin = num_map_at(j, "fmin", path);
    s.fmax = num_map_at(j, "fmax", path);
    s.center = num_map_at(j, "center", path);
    if (get(j, "bounds")) {
      s.bounds = num_list_at(j, "bounds", path);
      if (s.bounds.size() != 2)
        fail(path + "/bounds", "expected two numbers");
    }
  } else if (s.type == "fanova") {
    check_keys(j, {"type", "features", "depth", "fun", "gridsize"}, path);
    s.features = str_list_at(j, "features", path);
    if (s.features.empty()) fail(path + "/features", "missing required key");
    s.depth = static_cast<int>(int_at(j, "depth", path, 1));
    s.fun = str_at(j, "fun", path, "mean");
    s.gridsize = static_cast<int>(int_at(j, "gridsize", path, 10));
  } else {
    fail(path + "/type",
         "expected threshperf, calibration, learningcurve, pdp or fanova");
  }
  return s;
}

OptionsSpec parse_options(const json& j, const std::string& path) {
  need_object(j, path);
  check_keys(j, {"on_learner_error", "show_info"}, path);
  OptionsSpec s;
  s.on_learner_error = str_at(j, "on_learner_error", path, "stop");
  if (s.on_learner_error != "stop" && s.on_learner_error != "warn")
    fail(path + "/on_learner_error", "expected stop or warn");
  s.show_info = bool_at(j, "show_info", path, false);
  return s;
}

json serialize_task(const TaskSpec& s) {
  json j;
  j["id"] = s.id;
  j["kind"] = s.kind;
  j["path"] = s.path;
  if (!s.schema.empty()) j["schema"] = s.schema;
  if (s.targets.size() == 1)
    j["target"] = s.targets[0];
  else if (!s.targets.empty())
    j["targets"] = s.targets;
  if (!s.positive.empty()) j["positive"] = s.positive;
  if (!s.weights.empty()) j["weights"] = s.weights;
  if (!s.cost_cols.empty()) j["cost_cols"] = s.cost_cols;
  return j;
}

json serialize_learner(const LearnerSpec& s) {
  json j;
  j["class"] = s.class_name;
  if (!s.id.empty()) j["id"] = s.id;
  if (!s.predict_type.empty()) j["predict_type"] = s.predict_type;
  if (!s.hyperpars.empty()) j["hyperpars"] = s.hyperpars;
  if (!s.wrappers.empty()) {
    json ws = json::array();
    for (const auto& w : s.wrappers) ws.push_back(w.args);
    j["wrappers"] = std::move(ws);
  }
  return j;
}

json serialize_resampling(const ResamplingSpec& s) {
  json j;
  j["method"] = s.method;
  j["iters"] = s.iters;
  if (s.reps > 0) j["reps"] = s.reps;
  if (s.split >= 0) j["split"] = s.split;
  j["stratify"] = s.stratify;
  if (!s.stratify_cols.empty()) j["stratify_cols"] = s.stratify_cols;
  j["predict"] = s.predict;
  return j;
}

json serialize_measures(const std::vector<MeasureSpec>& ms) {
  json j = json::array();
  for (const auto& m : ms) {
    if (m.aggr.empty()) {
      j.push_back(m.id);
    } else {
      json o;
      o["id"] = m.id;
      o["aggr"] = m.aggr;
      j.push_back(std::move(o));
    }
  }
  return j;
}

json serialize_params(const std::vector<ParamSpec>& ps) {
  json j = json::array();
  for (const auto& p : ps) {
    json o;
    o["id"] = p.id;
    o["type"] = p.type;
    if (p.type == "numeric" || p.type == "integer") {
      o["lower"] = p.type == "integer" ? json(static_cast<long long>(p.lower))
                                       : json(p.lower);
      o["upper"] = p.type == "integer" ? json(static_cast<long long>(p.upper))
                                       : json(p.upper);
    }
    if (p.type == "discrete") o["values"] = p.values;
    if (p.trafo != "none") o["trafo"] = p.trafo;
    j.push_back(std::move(o));
  }
  return j;
}

json serialize_tuning(const TuningSpec& s) {
  json j;
  j["params"] = serialize_params(s.params);
  json c;
  c["method"] = s.method;
  c["resolution"] = s.resolution;
  c["maxit"] = s.maxit;
  if (s.impute_val) c["impute_val"] = *s.impute_val;
  c["tune_threshold"] = s.tune_threshold;
  j["control"] = std::move(c);
  if (!s.measures.empty()) j["measures"] = serialize_measures(s.measures);
  return j;
}

json serialize_featsel(const FeatselSpec& s) {
  json j;
  json c;
  c["method"] = s.method;
  c["maxit"] = s.maxit;
  c["prob"] = s.prob;
  c["seq_method"] = s.seq_method;
  c["alpha"] = s.alpha;
  c["beta"] = s.beta;
  if (s.max_features) c["max_features"] = *s.max_features;
  j["control"] = std::move(c);
  if (!s.measures.empty()) j["measures"] = serialize_measures(s.measures);
  return j;
}

json serialize_benchmark(const BenchmarkSpec& s) {
  json j;
  j["keep_pred"] = s.keep_pred;
  if (!s.extract.empty()) j["extract"] = s.extract;
  j["stats"] = s.stats;
  if (s.cd) {
    json c;
    c["test"] = s.cd_test;
    c["alpha"] = s.cd_alpha;
    if (!s.cd_baseline.empty()) c["baseline"] = s.cd_baseline;
    j["cd"] = std::move(c);
  }
  return j;
}

json serialize_inspect(const InspectSpec& s) {
  json j;
  j["type"] = s.type;
  if (s.type == "threshperf") {
    j["gridsize"] = s.gridsize;
    j["aggregate"] = s.aggregate;
  } else if (s.type == "calibration") {
    if (!s.breaks_rule.empty() || s.bins > 0 || !s.cuts.empty()) {
      json b;
      if (!s.breaks_rule.empty()) b["rule"] = s.breaks_rule;
      if (s.bins > 0) b["bins"] = s.bins;
      if (!s.cuts.empty()) b["cuts"] = s.cuts;
      j["breaks"] = std::move(b);
    }
    if (s.groups > 0) j["groups"] = s.groups;
  } else if (s.type == "learningcurve") {
    if (!s.percs.empty()) j["percs"] = s.percs;
  } else if (s.type == "pdp") {
    j["features"] = s.features;
    j["gridsize"] = s.gridsize;
    j["interaction"] = s.interaction;
    j["individual"] = s.individual;
    j["derivative"] = s.derivative;
    j["fun"] = s.fun;
    j["quantiles"] = s.quantiles;
    if (!s.fmin.empty()) j["fmin"] = s.fmin;
    if (!s.fmax.empty()) j["fmax"] = s.fmax;
    if (!s.center.empty()) j["center"] = s.center;
    j["bounds"] = s.bounds;
  } else if (s.type == "fanova") {
    j["features"] = s.features;
    j["depth"] = s.depth;
    j["fun"] = s.fun;
    j["gridsize"] = s.gridsize;
  }
  return j;
}

}  // namespace

ResamplingSpec parse_resampling(const json& j, const std::string& path) {
  need_object(j, path);
  check_keys(j,
             {"method", "iters", "reps", "split", "stratify", "stratify_cols",
              "predict"},
             path);
  ResamplingSpec s;
  s.method = str_at(j, "method", path, "CV");
  s.iters = static_cast<int>(int_at(j, "iters", path, 0));
  s.reps = static_cast<int>(int_at(j, "reps", path, 0));
  s.split = num_at(j, "split", path, -1);
  s.stratify = bool_at(j, "stratify", path, false);
  s.stratify_cols = str_list_at(j, "stratify_cols", path);
  s.predict = str_at(j, "predict", path, "test");
  return s;
}

std::vector<MeasureSpec> parse_measures(const json& j,
                                        const std::string& path) {
  need_array(j, path);
  std::vector<MeasureSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string mpath = path + "/" + std::to_string(i);
    const json& mj = j[i];
    MeasureSpec m;
    if (mj.is_string()) {
      m.id = mj.get<std::string>();
    } else if (mj.is_object()) {
      check_keys(mj, {"id", "aggr"}, mpath);
      m.id = str_at(mj, "id", mpath, "", true);
      m.aggr = str_at(mj, "aggr", mpath);
    } else {
      fail(mpath, "expected a measure id or {id, aggr} object");
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ParamSpec> parse_params(const json& j, const std::string& path) {
  need_array(j, path);
  if (j.empty()) fail(path, "expected at least one parameter");
  std::vector<ParamSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string ppath = path + "/" + std::to_string(i);
    const json& pj = j[i];
    need_object(pj, ppath);
    check_keys(pj, {"id", "type", "lower", "upper", "values", "trafo"}, ppath);
    ParamSpec p;
    p.id = str_at(pj, "id", ppath, "", true);
    p.type = str_at(pj, "type", ppath, "numeric");
    p.trafo = str_at(pj, "trafo", ppath, "none");
    if (p.type == "numeric" || p.type == "integer") {
      if (!get(pj, "lower")) fail(ppath + "/lower", "missing required key");
      if (!get(pj, "upper")) fail(ppath + "/upper", "missing required key");
      p.lower = num_at(pj, "lower", ppath, 0);
      p.upper = num_at(pj, "upper", ppath, 0);
    } else if (p.type == "discrete") {
      const json* v = get(pj, "values");
      if (!v || !v->is_array() || v->empty())
        fail(ppath + "/values", "expected a non-empty array");
      for (const auto& e : *v) p.values.push_back(e);
    } else if (p.type != "logical") {
      fail(ppath + "/type", "expected numeric, integer, discrete or logical");
    }
    out.push_back(std::move(p));
  }
  return out;
}

ExperimentConfig parse_config(const json& doc) {
  const std::string root = "/";
  need_object(doc, root);
  check_keys(doc,
             {"task", "tasks", "learner", "learners", "resampling", "measures",
              "tuning", "featsel", "benchmark", "inspect", "seed", "workers",
              "options"},
             "");
  ExperimentConfig cfg;

  if (get(doc, "task") && get(doc, "tasks"))
    fail("", "give either task or tasks, not both");
  if (const json* t = get(doc, "task")) {
    cfg.tasks.push_back(parse_task(*t, "/task"));
  } else if (const json* ts = get(doc, "tasks")) {
    need_array(*ts, "/tasks");
    for (std::size_t i = 0; i < ts->size(); ++i)
      cfg.tasks.push_back(parse_task((*ts)[i], "/tasks/" + std::to_string(i)));
  }

  if (get(doc, "learner") && get(doc, "learners"))
    fail("", "give either learner or learners, not both");
  if (const json* l = get(doc, "learner")) {
    cfg.learners.push_back(parse_learner(*l, "/learner"));
  } else if (const json* ls = get(doc, "learners")) {
    need_array(*ls, "/learners");
    for (std::size_t i = 0; i < ls->size(); ++i)
      cfg.learners.push_back(
          parse_learner((*ls)[i], "/learners/" + std::to_string(i)));
  }

  if (const json* r = get(doc, "resampling"))
    cfg.resampling = parse_resampling(*r, "/resampling");
  if (const json* m = get(doc, "measures"))
    cfg.measures = parse_measures(*m, "/measures");
  if (const json* t = get(doc, "tuning"))
    cfg.tuning = parse_tuning_block(*t, "/tuning");
  if (const json* f = get(doc, "featsel"))
    cfg.featsel = parse_featsel_block(*f, "/featsel");
  if (const json* b = get(doc, "benchmark"))
    cfg.benchmark = parse_benchmark(*b, "/benchmark");
  if (const json* i = get(doc, "inspect"))
    cfg.inspect = parse_inspect(*i, "/inspect");

  cfg.seed = int_at(doc, "seed", "", 1);
  cfg.workers = static_cast<int>(int_at(doc, "workers", "", 1));
  if (cfg.workers < 1) fail("/workers", "expected a positive integer");
  if (const json* o = get(doc, "options"))
    cfg.options = parse_options(*o, "/options");
  return cfg;
}

json serialize_config(const ExperimentConfig& cfg) {
  json j;
  if (!cfg.tasks.empty()) {
    if (cfg.tasks.size() == 1) {
      j["task"] = serialize_task(cfg.tasks[0]);
    } else {
      json ts = json::array();
      for (const auto& t : cfg.tasks) ts.push_back(serialize_task(t));
      j["tasks"] = std::move(ts);
    }
  }
  if (!cfg.learners.empty()) {
    if (cfg.learners.size() == 1) {
      j["learner"] = serialize_learner(cfg.learners[0]);
    } else {
      json ls = json::array();
      for (const auto& l : cfg.learners) ls.push_back(serialize_learner(l));
      j["learners"] = std::move(ls);
    }
  }
  if (cfg.resampling) j["resampling"] = serialize_resampling(*cfg.resampling);
  if (!cfg.measures.empty()) j["measures"] = serialize_measures(cfg.measures);
  if (cfg.tuning) j["tuning"] = serialize_tuning(*cfg.tuning);
  if (cfg.featsel) j["featsel"] = serialize_featsel(*cfg.featsel);
  if (cfg.benchmark) j["benchmark"] = serialize_benchmark(*cfg.benchmark);
  if (cfg.inspect) j["inspect"] = serialize_inspect(*cfg.inspect);
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  json o;
  o["on_learner_error"] = cfg.options.on_learner_error;
  o["show_info"] = cfg.options.show_info;
  j["options"] = std::move(o);
  return j;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

}  // namespace mlkit::cli
