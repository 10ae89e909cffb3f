#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "mlkit/error.hpp"
#include "mlkit/inspect.hpp"
#include "mlkit/wrappers.hpp"

namespace mlkit {

namespace {

json num_cell(double v) {
  if (is_missing(v)) return json();
  return json(v);
}

std::vector<double> threshold_grid(int gridsize) {
  if (gridsize < 2) throw ValueError("gridsize must be at least 2");
  std::vector<double> out(gridsize);
  for (int i = 0; i < gridsize; ++i)
    out[i] = static_cast<double>(i) / (gridsize - 1);
  return out;
}

void check_binary_prob(const Prediction& pred) {
  if (pred.task_kind != TaskKind::Classif ||
      pred.predict_type != PredictType::Prob || pred.prob.rows != pred.n() ||
      pred.n_classes() != 2)
    throw ValueError("threshold sweep needs binary probability predictions");
  if (!pred.has_truth())
    throw ValueError("threshold sweep needs labelled predictions");
}

std::vector<Measure> sweep_measures(std::vector<Measure> measures) {
  if (measures.empty())
    measures = {get_measure("fpr"), get_measure("tpr")};
  return measures;
}

// rows for one prediction object: columns <measures...>, threshold
void sweep_rows(Table& tb, const Prediction& pred,
                const std::vector<Measure>& measures,
                const std::vector<double>& grid,
                const std::vector<json>& tail) {
  for (double t : grid) {
    const Prediction p = set_threshold(pred, t);
    auto& row = tb.add_row();
    int c = 0;
    for (const auto& m : measures) row[c++] = num_cell(performance(p, m));
    row[c++] = t;
    for (const auto& cell : tail) row[c++] = cell;
  }
}

std::vector<int> train_positions(const Prediction& pred, int iter) {
  std::vector<int> out;
  for (int i = 0; i < pred.n(); ++i)
    if (!pred.on_train.empty() && pred.on_train[i] &&
        (pred.iters.empty() || pred.iters[i] == iter))
      out.push_back(i);
  return out;
}

void sweep_resample_rows(Table& tb, const ResampleResult& res,
                         const std::vector<Measure>& measures,
                         const std::vector<double>& grid, bool aggregate,
                         const std::vector<json>& tail) {
  if (!res.has_pred)
    throw ValueError("resample result was produced without predictions");
  check_binary_prob(res.pred);
  const int iters = static_cast<int>(res.perf_test.size());
  if (!aggregate) {
    for (int it = 1; it <= iters; ++it) {
      std::vector<json> t2 = {json(it)};
      t2.insert(t2.end(), tail.begin(), tail.end());
      sweep_rows(tb, res.pred.select(res.pred.test_positions(it)), measures,
                 grid, t2);
    }
    return;
  }
  for (double t : grid) {
    const Prediction thr = set_threshold(res.pred, t);
    auto& row = tb.add_row();
    int c = 0;
    for (const auto& m : measures) {
      std::vector<double> perf_test, perf_train;
      for (int it = 1; it <= iters; ++it) {
        perf_test.push_back(
            performance(thr.select(thr.test_positions(it)), m));
        const std::vector<int> tr = train_positions(thr, it);
        perf_train.push_back(tr.empty() ? kMissing
                                        : performance(thr.select(tr), m));
      }
      row[c++] = num_cell(m.aggr.fn(m, perf_test, perf_train, &thr));
    }
    row[c++] = t;
    for (const auto& cell : tail) row[c++] = cell;
  }
}

// ---- calibration bins ----

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string fixed_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

struct BinDef {
  std::vector<double> edges;  // ascending, size = bins + 1
  bool left_closed = false;   // quantile bins: [a,b) with closed last

  int bins() const { return static_cast<int>(edges.size()) - 1; }

  int assign(double p) const {
    if (p < edges.front() || p > edges.back()) return -1;
    if (left_closed) {
      const auto it = std::upper_bound(edges.begin(), edges.end(), p);
      const int j = static_cast<int>(it - edges.begin()) - 1;
      return std::min(j, bins() - 1);
    }
    const auto it = std::lower_bound(edges.begin() + 1, edges.end(), p);
    return static_cast<int>(it - edges.begin()) - 1;
  }

  std::string label(int i) const {
    if (left_closed) {
      const bool last = i == bins() - 1;
      return "[" + fixed_num(edges[i]) + "," + fixed_num(edges[i + 1]) +
             (last ? "]" : ")");
    }
    const std::string open = i == 0 ? "[" : "(";
    return open + short_num(edges[i]) + "," + short_num(edges[i + 1]) + "]";
  }
};

BinDef equal_width_bins(int k) {
  BinDef def;
  for (int i = 0; i <= k; ++i)
    def.edges.push_back(static_cast<double>(i) / k);
  return def;
}

BinDef quantile_bins(std::vector<double> values, int groups) {
  if (groups < 1) throw ValueError("groups must be positive");
  if (static_cast<int>(values.size()) < groups)
    throw ValueError("groups exceeds the number of observations");
  std::sort(values.begin(), values.end());
  const int n = static_cast<int>(values.size());
  BinDef def;
  def.left_closed = true;
  def.edges.push_back(values.front());
  for (int i = 1; i < groups; ++i)
    def.edges.push_back(values[static_cast<std::size_t>(i) * n / groups]);
  def.edges.push_back(values.back());
  return def;
}

struct CalEntry {
  double prob;
  int cls;   // class-level index the probability refers to
  bool hit;  // truth equals that class
};

void check_prob_pred(const Prediction& pred) {
  if (pred.task_kind != TaskKind::Classif ||
      pred.predict_type != PredictType::Prob || pred.prob.rows != pred.n())
    throw ValueError("calibration needs classification probability predictions");
  if (!pred.has_truth())
    throw ValueError("calibration needs labelled predictions");
}

std::vector<CalEntry> calibration_entries(const Prediction& pred) {
  std::vector<CalEntry> out;
  const int n = pred.n();
  if (pred.n_classes() == 2) {
    const int pos = pred.positive_index();
    for (int i = 0; i < n; ++i)
      out.push_back({pred.prob.at(i, pos), pos, pred.truth_cls[i] == pos});
  } else {
    for (int k = 0; k < pred.n_classes(); ++k)
      for (int i = 0; i < n; ++i)
        out.push_back({pred.prob.at(i, k), k, pred.truth_cls[i] == k});
  }
  return out;
}

// ---- partial dependence ----

struct PdModel {
  const ModelPtr model;
  bool classif = false;
  bool has_se = false;
  std::string target;
  std::vector<std::string> classes;
};

PdModel pd_check_model(const ModelPtr& model) {
  if (!model) throw ValueError("no model given");
  if (is_failure_model(model))
    throw ValueError("cannot inspect a failed model: " +
                     get_failure_message(*model));
  PdModel info{model};
  const TaskDesc& td = model->task_desc;
  if (td.kind == TaskKind::Classif) {
    if (model->learner->predict_type != PredictType::Prob)
      throw ValueError(
          "partial dependence on a classifier needs prob predictions");
    info.classif = true;
    info.classes = td.class_levels;
  } else if (td.kind == TaskKind::Regr) {
    info.target = td.targets[0];
    info.has_se = model->learner->predict_type == PredictType::SE;
  } else {
    throw ValueError(
        "partial dependence supports classification and regression models");
  }
  return info;
}

Dataset pd_base(const WrappedModel& model, const Dataset& input) {
  Dataset d;
  d.n_rows = input.n_rows;
  for (const auto& name : model.features) {
    const int idx = input.col_index(name);
    if (idx < 0) throw ValueError("input data misses feature: " + name);
    d.add_column(input.columns[idx]);
  }
  return d;
}

std::vector<double> pd_grid(const Dataset& base, const std::string& f,
                            int gridsize,
                            const std::map<std::string, double>& fmin,
                            const std::map<std::string, double>& fmax) {
  const FeatureColumn& col = base.col(f);
  if (col.kind != ColKind::Numeric)
    throw ValueError("partial dependence needs a numeric feature: " + f);
  double lo = kMissing, hi = kMissing;
  for (double v : col.values) {
    if (is_missing(v)) continue;
    if (is_missing(lo) || v < lo) lo = v;
    if (is_missing(hi) || v > hi) hi = v;
  }
  if (const auto it = fmin.find(f); it != fmin.end()) lo = it->second;
  if (const auto it = fmax.find(f); it != fmax.end()) hi = it->second;
  if (is_missing(lo) || is_missing(hi))
    throw ValueError("no grid range for feature: " + f);
  if (lo > hi) throw ValueError("fmin exceeds fmax for feature: " + f);
  std::vector<double> out(gridsize);
  for (int i = 0; i < gridsize; ++i)
    out[i] = lo + (hi - lo) * i / (gridsize - 1);
  return out;
}

// predictions with the listed columns pinned to fixed values; one vector of
// per-observation values per series (class or target), plus the mean se
struct PdPoint {
  std::vector<std::vector<double>> values;
  double se_mean = kMissing;
};

PdPoint pd_eval(const PdModel& info, const Dataset& base,
                const std::vector<int>& cols,
                const std::vector<double>& fixed) {
  Dataset d = base;
  for (std::size_t i = 0; i < cols.size(); ++i)
    d.columns[cols[i]].values.assign(d.n_rows, fixed[i]);
  Rng rng(1);
  const Prediction p = predict_newdata(info.model, d, rng);
  PdPoint out;
  if (info.classif) {
    out.values.resize(info.classes.size());
    for (std::size_t k = 0; k < info.classes.size(); ++k) {
      out.values[k].resize(p.n());
      for (int i = 0; i < p.n(); ++i)
        out.values[k][i] = p.prob.at(i, static_cast<int>(k));
    }
  } else {
    out.values.push_back(p.response_num);
    if (info.has_se && !p.se.empty()) {
      double s = 0.0;
      for (double v : p.se) s += v;
      out.se_mean = s / p.se.size();
    }
  }
  return out;
}

double quantile7(std::vector<double> v, double prob) {
  if (v.empty()) return kMissing;
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * prob;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

double reduce_fun(const std::vector<double>& v, const std::string& fun) {
  if (v.empty()) return kMissing;
  if (fun == "mean")
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  if (fun == "median") return quantile7(v, 0.5);
  if (fun == "var") {
    if (v.size() < 2) return kMissing;
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
  }
  throw ValueError("unknown reduction: " + fun);
}

// first listed feature varies fastest
struct ComboGrid {
  std::vector<std::vector<double>> grids;

  int total() const {
    int t = 1;
    for (const auto& g : grids) t *= static_cast<int>(g.size());
    return t;
  }
  double value(int f, int combo) const {
    int stride = 1;
    for (int i = 0; i < f; ++i) stride *= static_cast<int>(grids[i].size());
    return grids[f][(combo / stride) % grids[f].size()];
  }
  std::vector<double> point(int combo) const {
    std::vector<double> out(grids.size());
    for (std::size_t f = 0; f < grids.size(); ++f)
      out[f] = value(static_cast<int>(f), combo);
    return out;
  }
};

// series x unit x combo; unit = observation for ICE, single slot otherwise
struct PdBlock {
  std::vector<std::vector<std::vector<double>>> value, lower, upper;
};

void differentiate(std::vector<double>& y, const std::vector<double>& x) {
  const int g = static_cast<int>(y.size());
  std::vector<double> dy(g);
  for (int i = 0; i < g; ++i) {
    const int a = std::max(0, i - 1), b = std::min(g - 1, i + 1);
    dy[i] = (y[b] - y[a]) / (x[b] - x[a]);
  }
  y = std::move(dy);
}

PdBlock pd_block(const PdModel& info, const Dataset& base,
                 const std::vector<std::string>& feats, const ComboGrid& grid,
                 const PartialDependenceOpts& o) {
  std::vector<int> cols;
  for (const auto& f : feats) cols.push_back(base.col_index(f));
  const int C = grid.total();
  const int S = info.classif ? static_cast<int>(info.classes.size()) : 1;
  const bool triple = o.fun == "quantile" && !o.individual;
  const bool se_band = info.has_se && !o.individual && !triple && !o.derivative;

  PdBlock blk;
  blk.value.assign(S, {});
  if (triple || se_band) {
    blk.lower.assign(S, {});
    blk.upper.assign(S, {});
  }
  for (int c = 0; c < C; ++c) {
    const PdPoint pt = pd_eval(info, base, cols, grid.point(c));
    for (int s = 0; s < S; ++s) {
      const std::vector<double>& vals = pt.values[s];
      if (o.individual) {
        if (blk.value[s].empty()) blk.value[s].assign(vals.size(), {});
        for (std::size_t i = 0; i < vals.size(); ++i)
          blk.value[s][i].push_back(vals[i]);
        continue;
      }
      if (blk.value[s].empty()) blk.value[s].assign(1, {});
      if (triple) {
        if (blk.lower[s].empty()) {
          blk.lower[s].assign(1, {});
          blk.upper[s].assign(1, {});
        }
        blk.lower[s][0].push_back(quantile7(vals, o.quantiles[0]));
        blk.value[s][0].push_back(quantile7(vals, o.quantiles[1]));
        blk.upper[s][0].push_back(quantile7(vals, o.quantiles[2]));
        continue;
      }
      const double v = reduce_fun(vals, o.fun);
      blk.value[s][0].push_back(v);
      if (se_band) {
        if (blk.lower[s].empty()) {
          blk.lower[s].assign(1, {});
          blk.upper[s].assign(1, {});
        }
        blk.lower[s][0].push_back(v + o.bounds.first * pt.se_mean);
        blk.upper[s][0].push_back(v + o.bounds.second * pt.se_mean);
      }
    }
  }

  if (!o.center.empty()) {
    std::vector<double> at;
    for (const auto& f : feats) at.push_back(o.center.at(f));
    const PdPoint pt = pd_eval(info, base, cols, at);
    for (int s = 0; s < S; ++s)
      for (std::size_t i = 0; i < blk.value[s].size(); ++i)
        for (double& y : blk.value[s][i]) y -= pt.values[s][i];
  }

  if (o.derivative) {
    const std::vector<double>& x = grid.grids[0];
    for (auto* part : {&blk.value, &blk.lower, &blk.upper})
      for (auto& series : *part)
        for (auto& y : series) differentiate(y, x);
  }
  return blk;
}

void pd_validate(const PdModel& info, const std::vector<std::string>& features,
                 const PartialDependenceOpts& o) {
  if (features.empty()) throw ValueError("no features given");
  for (std::size_t i = 0; i < features.size(); ++i)
    for (std::size_t j = i + 1; j < features.size(); ++j)
      if (features[i] == features[j])
        throw ValueError("duplicate feature: " + features[i]);
  for (const auto& f : features)
    if (std::find(info.model->features.begin(), info.model->features.end(),
                  f) == info.model->features.end())
      throw ValueError("not a model feature: " + f);
  if (o.gridsize < 2) throw ValueError("gridsize must be at least 2");
  if (o.interaction && features.size() < 2)
    throw ValueError("interaction needs at least two features");
  if (o.derivative && (features.size() != 1 || o.interaction))
    throw ValueError("derivative needs a single feature");
  if (!o.center.empty()) {
    if (!o.individual) throw ValueError("center requires individual");
    for (const auto& f : features)
      if (!o.center.count(f)) throw ValueError("center misses feature: " + f);
    for (const auto& [k, v] : o.center)
      if (std::find(features.begin(), features.end(), k) == features.end())
        throw ValueError("center has unknown feature: " + k);
  }
  if (o.fun != "mean" && o.fun != "median" && o.fun != "var" &&
      o.fun != "quantile")
    throw ValueError("unknown reduction: " + o.fun);
  if (o.fun == "quantile") {
    if (o.quantiles.size() != 3 || o.quantiles[0] > o.quantiles[1] ||
        o.quantiles[1] > o.quantiles[2] || o.quantiles[0] < 0.0 ||
        o.quantiles[2] > 1.0)
      throw ValueError("quantiles must be three ascending probabilities");
  }
}

}  // namespace

// ---- threshold sweeps ----

Table thresh_vs_perf_data(const Prediction& pred,
                          const std::vector<Measure>& measures_in,
                          int gridsize) {
  check_binary_prob(pred);
  const std::vector<Measure> measures = sweep_measures(measures_in);
  const std::vector<double> grid = threshold_grid(gridsize);
  Table tb;
  for (const auto& m : measures) tb.columns.push_back(m.id);
  tb.columns.push_back("threshold");
  sweep_rows(tb, pred, measures, grid, {});
  return tb;
}

Table thresh_vs_perf_data(const ResampleResult& res,
                          const std::vector<Measure>& measures_in,
                          int gridsize, bool aggregate) {
  const std::vector<Measure> measures = sweep_measures(measures_in);
  const std::vector<double> grid = threshold_grid(gridsize);
  Table tb;
  for (const auto& m : measures) tb.columns.push_back(m.id);
  tb.columns.push_back("threshold");
  if (!aggregate) tb.columns.push_back("iter");
  sweep_resample_rows(tb, res, measures, grid, aggregate, {});
  return tb;
}

Table thresh_vs_perf_data(const BenchmarkResult& bmr,
                          const std::vector<Measure>& measures_in,
                          int gridsize, bool aggregate) {
  if (bmr.task_ids.size() != 1)
    throw ValueError("threshold sweep over a benchmark needs a single task");
  const std::vector<Measure> measures = sweep_measures(measures_in);
  const std::vector<double> grid = threshold_grid(gridsize);
  Table tb;
  for (const auto& m : measures) tb.columns.push_back(m.id);
  tb.columns.push_back("threshold");
  if (!aggregate) tb.columns.push_back("iter");
  tb.columns.push_back("learner");
  for (const auto& lid : bmr.learner_ids)
    sweep_resample_rows(tb, bmr.at(bmr.task_ids[0], lid), measures, grid,
                        aggregate, {json(lid)});
  return tb;
}

// ---- calibration ----

CalibrationData calibration_data(
    const std::vector<std::pair<std::string, Prediction>>& preds,
    const CalibrationBreaks& breaks, int groups) {
  if (preds.empty()) throw ValueError("no predictions given");
  for (const auto& [name, pred] : preds) check_prob_pred(pred);
  const bool explicit_breaks =
      !breaks.cuts.empty() || !breaks.rule.empty() || breaks.bins > 0;
  if (groups > 0 && explicit_breaks)
    throw ValueError("give either breaks or groups, not both");

  std::vector<std::vector<CalEntry>> entries;
  std::size_t pooled = 0;
  for (const auto& [name, pred] : preds) {
    entries.push_back(calibration_entries(pred));
    pooled += entries.back().size();
  }

  BinDef def;
  if (groups > 0) {
    std::vector<double> all;
    all.reserve(pooled);
    for (const auto& es : entries)
      for (const auto& e : es) all.push_back(e.prob);
    def = quantile_bins(std::move(all), groups);
  } else if (!breaks.cuts.empty()) {
    def.edges = breaks.cuts;
    if (def.edges.size() < 2 ||
        !std::is_sorted(def.edges.begin(), def.edges.end()))
      throw ValueError("cut points must be ascending");
  } else if (breaks.rule == "sturges") {
    def = equal_width_bins(
        static_cast<int>(std::ceil(std::log2(static_cast<double>(pooled)))) +
        1);
  } else if (!breaks.rule.empty()) {
    throw ValueError("unknown binning rule: " + breaks.rule);
  } else {
    def = equal_width_bins(breaks.bins > 0 ? breaks.bins : 10);
  }

  CalibrationData out;
  out.proportions.columns = {"Learner", "bin", "Class", "Proportion"};
  out.rag.columns = {"Learner", "Probability", "Correct"};

  for (std::size_t li = 0; li < preds.size(); ++li) {
    const Prediction& pred = preds[li].second;
    const std::vector<std::string>& levels = pred.class_levels;
    // per class, per bin: rows falling in the bin / rows whose truth matches
    std::map<std::pair<int, int>, std::pair<int, int>> counts;
    for (const auto& e : entries[li]) {
      const int b = def.assign(e.prob);
      if (b < 0) continue;
      auto& c = counts[{e.cls, b}];
      ++c.first;
      if (e.hit) ++c.second;
    }
    for (int k = 0; k < pred.n_classes(); ++k) {
      if (pred.n_classes() == 2 && k != pred.positive_index()) continue;
      for (int b = 0; b < def.bins(); ++b) {
        const auto it = counts.find({k, b});
        if (it == counts.end()) continue;
        auto& row = out.proportions.add_row();
        row[0] = preds[li].first;
        row[1] = def.label(b);
        row[2] = levels[k];
        row[3] =
            static_cast<double>(it->second.second) / it->second.first;
      }
    }
    for (int i = 0; i < pred.n(); ++i) {
      const int resp = pred.response_cls[i];
      const double p = pred.n_classes() == 2
                           ? pred.prob.at(i, pred.positive_index())
                           : (resp < 0 ? kMissing : pred.prob.at(i, resp));
      auto& row = out.rag.add_row();
      row[0] = preds[li].first;
      row[1] = num_cell(p);
      row[2] = resp >= 0 && resp == pred.truth_cls[i] ? 1 : 0;
    }
  }
  return out;
}

CalibrationData calibration_data(const Prediction& pred,
                                 const CalibrationBreaks& breaks, int groups) {
  return calibration_data({{"prediction", pred}}, breaks, groups);
}

// ---- learning curves ----

std::vector<double> default_percs() {
  std::vector<double> out;
  for (int i = 1; i <= 10; ++i) out.push_back(i / 10.0);
  return out;
}

Table learning_curve_data(const std::vector<LearnerPtr>& learners,
                          const Task& task, const std::vector<double>& percs_in,
                          std::vector<Measure> measures,
                          const ResampleInstance& resampling, Rng rng) {
  if (learners.empty()) throw ValueError("no learners given");
  for (std::size_t i = 0; i < learners.size(); ++i)
    for (std::size_t j = i + 1; j < learners.size(); ++j)
      if (learners[i]->id == learners[j]->id)
        throw ValueError("duplicate learner id: " + learners[i]->id);
  const std::vector<double> percs =
      percs_in.empty() ? default_percs() : percs_in;
  for (double p : percs)
    if (!(p > 0.0 && p <= 1.0))
      throw ValueError("percs must lie in (0,1]");
  if (measures.empty()) measures = {get_default_measure(task)};

  Table tb;
  tb.columns = {"learner", "perc", "measure", "value"};
  const int P = static_cast<int>(percs.size());
  for (std::size_t li = 0; li < learners.size(); ++li) {
    for (int pi = 0; pi < P; ++pi) {
      ResampleOpts opts;
      opts.measures = measures;
      opts.keep_pred = false;
      const ResampleResult rr = resample(
          make_downsample_wrapper(learners[li], percs[pi]), task, resampling,
          opts, rng.child(ExecLevel::Unit, static_cast<int>(li) * P + pi));
      for (const auto& m : measures) {
        auto& row = tb.add_row();
        row[0] = learners[li]->id;
        row[1] = percs[pi];
        row[2] = m.aggr_name();
        row[3] = num_cell(rr.aggr_value(m.aggr_name()));
      }
    }
  }
  return tb;
}

Table learning_curve_data(const std::vector<LearnerPtr>& learners,
                          const Task& task, const std::vector<double>& percs,
                          std::vector<Measure> measures,
                          const ResampleDesc& resampling, Rng rng) {
  const ResampleInstance rin = make_resample_instance(
      resampling, task, rng.child(ExecLevel::Instance, 0));
  return learning_curve_data(learners, task, percs, std::move(measures), rin,
                             rng);
}

// ---- partial dependence ----

Table partial_dependence_data(const ModelPtr& model, const Dataset& input,
                              const std::vector<std::string>& features,
                              const PartialDependenceOpts& opts) {
  const PdModel info = pd_check_model(model);
  pd_validate(info, features, opts);
  const Dataset base = pd_base(*model, input);

  std::map<std::string, std::vector<double>> grids;
  for (const auto& f : features)
    grids[f] = pd_grid(base, f, opts.gridsize, opts.fmin, opts.fmax);

  const bool bands = (opts.fun == "quantile" && !opts.individual) ||
                     (info.has_se && !opts.individual && !opts.derivative &&
                      opts.fun != "quantile");

  Table tb;
  if (info.classif)
    tb.columns = {"Class", "Probability"};
  else
    tb.columns = {info.target};
  for (const auto& f : features) tb.columns.push_back(f);
  if (bands) {
    tb.columns.push_back("lower");
    tb.columns.push_back("upper");
  }
  if (opts.individual) tb.columns.push_back("idx");

  std::vector<std::vector<std::string>> blocks;
  if (opts.interaction)
    blocks.push_back(features);
  else
    for (const auto& f : features) blocks.push_back({f});

  for (const auto& feats : blocks) {
    ComboGrid grid;
    for (const auto& f : feats) grid.grids.push_back(grids[f]);
    const PdBlock blk = pd_block(info, base, feats, grid, opts);
    const int C = grid.total();
    for (std::size_t s = 0; s < blk.value.size(); ++s) {
      for (std::size_t u = 0; u < blk.value[s].size(); ++u) {
        for (int c = 0; c < C; ++c) {
          auto& row = tb.add_row();
          int col = 0;
          if (info.classif) row[col++] = info.classes[s];
          row[col++] = num_cell(blk.value[s][u][c]);
          for (const auto& f : features) {
            const auto it = std::find(feats.begin(), feats.end(), f);
            if (it != feats.end())
              row[col] = grid.value(static_cast<int>(it - feats.begin()), c);
            ++col;
          }
          if (bands) {
            const bool have = !blk.lower[s].empty();
            if (have) {
              row[col] = num_cell(blk.lower[s][u][c]);
              row[col + 1] = num_cell(blk.upper[s][u][c]);
            }
            col += 2;
          }
          if (opts.individual) row[col++] = static_cast<int>(u) + 1;
        }
      }
    }
  }
  return tb;
}

Table partial_dependence_data(const ModelPtr& model, const Task& input,
                              const std::vector<std::string>& features,
                              const PartialDependenceOpts& opts) {
  return partial_dependence_data(model, input.data, features, opts);
}

// ---- functional ANOVA ----

Table functional_anova_data(const ModelPtr& model, const Dataset& input,
                            const std::vector<std::string>& features,
                            int depth, const std::string& fun, int gridsize) {
  const PdModel info = pd_check_model(model);
  if (info.classif)
    throw ValueError("functional ANOVA supports only regression models");
  if (fun != "mean" && fun != "median" && fun != "var")
    throw ValueError("unknown reduction: " + fun);
  PartialDependenceOpts probe;
  probe.gridsize = gridsize;
  probe.fun = fun;
  pd_validate(info, features, probe);
  const int F = static_cast<int>(features.size());
  if (depth < 1 || depth > F)
    throw ValueError("depth must lie between 1 and the feature count");

  const Dataset base = pd_base(*model, input);
  std::vector<std::vector<double>> grids;
  for (const auto& f : features)
    grids.push_back(pd_grid(base, f, gridsize, {}, {}));

  const double g0 =
      reduce_fun(pd_eval(info, base, {}, {}).values[0], fun);

  // partial dependence over the joint grid of the masked features; combo
  // order: lowest feature index varies fastest
  auto mask_feats = [&](std::uint32_t mask) {
    std::vector<int> out;
    for (int f = 0; f < F; ++f)
      if (mask & (1u << f)) out.push_back(f);
    return out;
  };

  auto pd_of = [&](std::uint32_t mask) {
    const std::vector<int> fs = mask_feats(mask);
    ComboGrid grid;
    std::vector<int> cols;
    for (int f : fs) {
      grid.grids.push_back(grids[f]);
      cols.push_back(base.col_index(features[f]));
    }
    const int C = grid.total();
    std::vector<double> out(C);
    for (int c = 0; c < C; ++c)
      out[c] = reduce_fun(pd_eval(info, base, cols, grid.point(c)).values[0],
                          fun);
    return out;
  };

  // effect with all lower-order terms (and the grand mean) removed
  std::map<std::uint32_t, std::vector<double>> memo;
  auto effect_of = [&](auto&& self, std::uint32_t mask) -> const std::vector<double>& {
    const auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    std::vector<double> vals = pd_of(mask);
    const std::vector<int> fs = mask_feats(mask);
    for (std::uint32_t v = (mask - 1) & mask; v; v = (v - 1) & mask) {
      const std::vector<double>& sub = self(self, v);
      const std::vector<int> vf = mask_feats(v);
      for (std::size_t c = 0; c < vals.size(); ++c) {
        int combo = 0, stride = 1;
        for (std::size_t p = 0; p < vf.size(); ++p) {
          const int pos = static_cast<int>(
              std::find(fs.begin(), fs.end(), vf[p]) - fs.begin());
          int fstride = 1;
          for (int q = 0; q < pos; ++q) fstride *= gridsize;
          combo += (static_cast<int>(c) / fstride % gridsize) * stride;
          stride *= gridsize;
        }
        vals[c] -= sub[combo];
      }
    }
    for (double& x : vals) x -= g0;
    return memo.emplace(mask, std::move(vals)).first->second;
  };

  Table tb;
  tb.columns = {"effect", info.target};
  for (const auto& f : features) tb.columns.push_back(f);

  std::vector<int> pick(depth);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    std::uint32_t mask = 0;
    std::string label;
    for (int i = 0; i < depth; ++i) {
      mask |= 1u << pick[i];
      if (i) label += ":";
      label += features[pick[i]];
    }
    std::vector<double> vals = effect_of(effect_of, mask);
    if (depth == 1)
      for (double& x : vals) x += g0;  // printed singletons stay equal to pd
    ComboGrid grid;
    for (int f : pick) grid.grids.push_back(grids[f]);
    for (std::size_t c = 0; c < vals.size(); ++c) {
      auto& row = tb.add_row();
      row[0] = label;
      row[1] = num_cell(vals[c]);
      for (int f = 0; f < F; ++f) {
        const auto it = std::find(pick.begin(), pick.end(), f);
        if (it != pick.end())
          row[f + 2] = grid.value(static_cast<int>(it - pick.begin()),
                                  static_cast<int>(c));
      }
    }
    // next size-depth combination
    int i = depth - 1;
    while (i >= 0 && pick[i] == F - depth + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < depth; ++j) pick[j] = pick[j - 1] + 1;
  }
  return tb;
}

Table functional_anova_data(const ModelPtr& model, const Task& input,
                            const std::vector<std::string>& features,
                            int depth, const std::string& fun, int gridsize) {
  return functional_anova_data(model, input.data, features, depth, fun,
                               gridsize);
}

}  // namespace mlkit
