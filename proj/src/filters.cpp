#include "mlkit/filters.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "mlkit/error.hpp"

namespace mlkit {

namespace {

bool numeric_like(const FeatureColumn& c) {
  return c.kind == ColKind::Numeric || c.kind == ColKind::Logical;
}

// complete-case pairs of feature and numeric target
std::pair<std::vector<double>, std::vector<double>> complete_pairs(
    const Task& task, const std::string& feature) {
  const auto& x = task.data.col(feature);
  const auto& y = task.target_col();
  std::vector<double> xs, ys;
  for (int i = 0; i < x.size(); ++i)
    if (!x.missing(i) && !y.missing(i)) {
      xs.push_back(x.values[i]);
      ys.push_back(y.values[i]);
    }
  return {std::move(xs), std::move(ys)};
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2) return kMissing;
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kMissing;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> ord(n);
  for (int i = 0; i < n; ++i) ord[i] = i;
  std::sort(ord.begin(), ord.end(),
            [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[ord[j + 1]] == v[ord[i]]) ++j;
    const double r = (i + j) / 2.0 + 1.0;
    for (int k = i; k <= j; ++k) ranks[ord[k]] = r;
    i = j + 1;
  }
  return ranks;
}

// class codes of complete cases alongside the feature bin/value
struct ClassGroups {
  std::vector<double> x;
  std::vector<int> cls;
  int n_classes = 0;
};

ClassGroups class_groups(const Task& task, const std::string& feature) {
  const auto& x = task.data.col(feature);
  const auto& y = task.target_col();
  ClassGroups g;
  g.n_classes = task.n_classes();
  for (int i = 0; i < x.size(); ++i)
    if (!x.missing(i) && !y.missing(i)) {
      g.x.push_back(x.values[i]);
      g.cls.push_back(static_cast<int>(y.values[i]));
    }
  return g;
}

double filter_variance(const Task& task, const std::string& feature) {
  const auto& c = task.data.col(feature);
  if (!numeric_like(c)) return kMissing;
  double sum = 0;
  int n = 0;
  for (int i = 0; i < c.size(); ++i)
    if (!c.missing(i)) {
      sum += c.values[i];
      ++n;
    }
  if (n < 2) return 0.0;
  const double mean = sum / n;
  double ss = 0;
  for (int i = 0; i < c.size(); ++i)
    if (!c.missing(i)) ss += (c.values[i] - mean) * (c.values[i] - mean);
  return ss / (n - 1);
}

double filter_linear_correlation(const Task& task, const std::string& feature) {
  if (!numeric_like(task.data.col(feature))) return kMissing;
  const auto [x, y] = complete_pairs(task, feature);
  const double r = pearson(x, y);
  return is_missing(r) ? kMissing : std::fabs(r);
}

double filter_rank_correlation(const Task& task, const std::string& feature) {
  if (!numeric_like(task.data.col(feature))) return kMissing;
  const auto [x, y] = complete_pairs(task, feature);
  const double r = pearson(average_ranks(x), average_ranks(y));
  return is_missing(r) ? kMissing : std::fabs(r);
}

double filter_anova(const Task& task, const std::string& feature) {
  if (!numeric_like(task.data.col(feature))) return kMissing;
  const ClassGroups g = class_groups(task, feature);
  const int n = static_cast<int>(g.x.size());
  std::vector<double> sum(g.n_classes, 0.0);
  std::vector<int> cnt(g.n_classes, 0);
  double total = 0;
  for (int i = 0; i < n; ++i) {
    sum[g.cls[i]] += g.x[i];
    cnt[g.cls[i]] += 1;
    total += g.x[i];
  }
  int k = 0;
  for (int c = 0; c < g.n_classes; ++c)
    if (cnt[c] > 0) ++k;
  if (k < 2 || n <= k) return kMissing;
  const double grand = total / n;
  double ssb = 0, ssw = 0;
  for (int c = 0; c < g.n_classes; ++c)
    if (cnt[c] > 0) {
      const double m = sum[c] / cnt[c];
      ssb += cnt[c] * (m - grand) * (m - grand);
    }
  for (int i = 0; i < n; ++i) {
    const double m = sum[g.cls[i]] / cnt[g.cls[i]];
    ssw += (g.x[i] - m) * (g.x[i] - m);
  }
  if (ssw == 0.0) return ssb == 0.0 ? kMissing : std::numeric_limits<double>::infinity();
  return (ssb / (k - 1)) / (ssw / (n - k));
}

double filter_kruskal(const Task& task, const std::string& feature) {
  if (!numeric_like(task.data.col(feature))) return kMissing;
  const ClassGroups g = class_groups(task, feature);
  const int n = static_cast<int>(g.x.size());
  if (n < 2) return kMissing;
  const std::vector<double> ranks = average_ranks(g.x);
  std::vector<double> rsum(g.n_classes, 0.0);
  std::vector<int> cnt(g.n_classes, 0);
  for (int i = 0; i < n; ++i) {
    rsum[g.cls[i]] += ranks[i];
    cnt[g.cls[i]] += 1;
  }
  int k = 0;
  for (int c = 0; c < g.n_classes; ++c)
    if (cnt[c] > 0) ++k;
  if (k < 2) return kMissing;
  double h = 0;
  for (int c = 0; c < g.n_classes; ++c)
    if (cnt[c] > 0) {
      const double rbar = rsum[c] / cnt[c];
      h += cnt[c] * (rbar - (n + 1) / 2.0) * (rbar - (n + 1) / 2.0);
    }
  h *= 12.0 / (static_cast<double>(n) * (n + 1));
  // tie correction
  std::vector<double> sorted = g.x;
  std::sort(sorted.begin(), sorted.end());
  double tie = 0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = j - i + 1;
    tie += t * t * t - t;
    i = j + 1;
  }
  const double denom = 1.0 - tie / (static_cast<double>(n) * n * n - n);
  if (denom == 0.0) return kMissing;
  return h / denom;
}

// contingency table of binned feature vs class, empty rows/cols dropped
struct Contingency {
  std::vector<std::vector<double>> cells;  // r x c counts
  int n = 0;
};

Contingency contingency(const Task& task, const std::string& feature) {
  const auto& y = task.target_col();
  const std::vector<int> bins = bin_feature(task.data.col(feature));
  const int nb = *std::max_element(bins.begin(), bins.end()) + 1;
  const int nc = task.n_classes();
  std::vector<std::vector<double>> cells(nb, std::vector<double>(nc, 0.0));
  int n = 0;
  for (int i = 0; i < y.size(); ++i) {
    if (y.missing(i)) continue;
    cells[bins[i]][static_cast<int>(y.values[i])] += 1.0;
    ++n;
  }
  // drop empty rows and columns
  Contingency ct;
  ct.n = n;
  std::vector<int> keep_c;
  for (int c = 0; c < nc; ++c) {
    double s = 0;
    for (int r = 0; r < nb; ++r) s += cells[r][c];
    if (s > 0) keep_c.push_back(c);
  }
  for (int r = 0; r < nb; ++r) {
    double s = 0;
    for (int c = 0; c < nc; ++c) s += cells[r][c];
    if (s == 0) continue;
    std::vector<double> row;
    for (int c : keep_c) row.push_back(cells[r][c]);
    ct.cells.push_back(std::move(row));
  }
  return ct;
}

double filter_chi_squared(const Task& task, const std::string& feature) {
  const Contingency ct = contingency(task, feature);
  const int r = static_cast<int>(ct.cells.size());
  if (r == 0 || ct.n == 0) return kMissing;
  const int c = static_cast<int>(ct.cells[0].size());
  const int mindim = std::min(r, c) - 1;
  if (mindim == 0) return 0.0;
  std::vector<double> rsum(r, 0), csum(c, 0);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      rsum[i] += ct.cells[i][j];
      csum[j] += ct.cells[i][j];
    }
  double chi2 = 0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      const double e = rsum[i] * csum[j] / ct.n;
      chi2 += (ct.cells[i][j] - e) * (ct.cells[i][j] - e) / e;
    }
  return std::sqrt(chi2 / (ct.n * mindim));
}

double entropy(const std::vector<double>& counts, double total) {
  double h = 0;
  for (double c : counts)
    if (c > 0) {
      const double p = c / total;
      h -= p * std::log(p);
    }
  return h;
}

double filter_information_gain(const Task& task, const std::string& feature) {
  const Contingency ct = contingency(task, feature);
  const int r = static_cast<int>(ct.cells.size());
  if (r == 0 || ct.n == 0) return kMissing;
  const int c = static_cast<int>(ct.cells[0].size());
  std::vector<double> csum(c, 0);
  double cond = 0;
  for (int i = 0; i < r; ++i) {
    double rs = 0;
    for (int j = 0; j < c; ++j) {
      csum[j] += ct.cells[i][j];
      rs += ct.cells[i][j];
    }
    cond += rs / ct.n * entropy(ct.cells[i], rs);
  }
  return entropy(csum, ct.n) - cond;
}

std::map<std::string, FilterInfo>& filter_registry() {
  static std::map<std::string, FilterInfo> reg = [] {
    std::map<std::string, FilterInfo> r;
    auto add = [&](const std::string& name, std::set<std::string> kinds,
                   double (*fn)(const Task&, const std::string&)) {
      r[name] = FilterInfo{name, std::move(kinds), fn};
    };
    add("variance", {"classif", "regr", "cluster", "multilabel"},
        filter_variance);
    add("linear.correlation", {"regr"}, filter_linear_correlation);
    add("rank.correlation", {"regr"}, filter_rank_correlation);
    add("anova.test", {"classif"}, filter_anova);
    add("kruskal.test", {"classif"}, filter_kruskal);
    add("chi.squared", {"classif"}, filter_chi_squared);
    add("information.gain", {"classif"}, filter_information_gain);
    return r;
  }();
  return reg;
}

std::mutex filter_mutex;

}  // namespace

std::vector<int> bin_feature(const FeatureColumn& col, int nbins) {
  const int n = col.size();
  std::vector<int> bins(n, 0);
  int miss_bin;
  if (col.is_factor_like() || col.kind == ColKind::Logical) {
    int maxcode = 0;
    for (int i = 0; i < n; ++i)
      if (!col.missing(i))
        maxcode = std::max(maxcode, static_cast<int>(col.values[i]));
    miss_bin = maxcode + 1;
    for (int i = 0; i < n; ++i)
      bins[i] = col.missing(i) ? miss_bin : static_cast<int>(col.values[i]);
    return bins;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (!col.missing(i)) {
      lo = std::min(lo, col.values[i]);
      hi = std::max(hi, col.values[i]);
    }
  miss_bin = nbins;
  const double width = (hi - lo) / nbins;
  for (int i = 0; i < n; ++i) {
    if (col.missing(i)) {
      bins[i] = miss_bin;
    } else if (width == 0.0 || !std::isfinite(width)) {
      bins[i] = 0;
    } else {
      bins[i] = std::min(static_cast<int>((col.values[i] - lo) / width),
                         nbins - 1);
    }
  }
  return bins;
}

void register_filter(FilterInfo info) {
  std::lock_guard<std::mutex> lock(filter_mutex);
  auto& reg = filter_registry();
  if (reg.count(info.name))
    throw ValueError("filter already registered: " + info.name);
  reg[info.name] = std::move(info);
}

std::vector<std::string> list_filters() {
  std::lock_guard<std::mutex> lock(filter_mutex);
  std::vector<std::string> out;
  for (const auto& [name, info] : filter_registry()) out.push_back(name);
  return out;
}

const FilterInfo& get_filter(const std::string& name) {
  std::lock_guard<std::mutex> lock(filter_mutex);
  const auto& reg = filter_registry();
  const auto it = reg.find(name);
  if (it == reg.end()) throw ValueError("unknown filter method: " + name);
  return it->second;
}

double FilterValues::score(const std::string& feature,
                           const std::string& method) const {
  const auto fit = std::find(names.begin(), names.end(), feature);
  const auto mit = std::find(methods.begin(), methods.end(), method);
  if (fit == names.end()) throw ValueError("unknown feature: " + feature);
  if (mit == methods.end()) throw ValueError("method not computed: " + method);
  return scores[fit - names.begin()][mit - methods.begin()];
}

Table FilterValues::as_table() const {
  Table t;
  t.columns = {"name", "type"};
  for (const auto& m : methods) t.columns.push_back(m);
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto& row = t.add_row();
    row[0] = names[i];
    row[1] = kinds[i];
    for (std::size_t j = 0; j < methods.size(); ++j)
      row[j + 2] = is_missing(scores[i][j]) ? json() : json(scores[i][j]);
  }
  return t;
}

std::string FilterValues::to_csv() const { return as_table().to_csv(); }

FilterValues filter_values(const Task& task,
                           const std::vector<std::string>& methods) {
  if (methods.empty()) throw ValueError("no filter methods given");
  FilterValues fv;
  fv.task_id = task.id;
  fv.methods = methods;
  const std::string kind = task_kind_name(task.kind);
  std::vector<const FilterInfo*> infos;
  for (const auto& m : methods) {
    const FilterInfo& info = get_filter(m);
    if (!info.task_kinds.count(kind))
      throw ValueError("filter " + m + " does not support " + kind + " tasks");
    infos.push_back(&info);
  }
  for (const auto& name : task.feature_names()) {
    fv.names.push_back(name);
    fv.kinds.push_back(col_kind_name(task.data.col(name).kind));
    std::vector<double> row;
    for (const auto* info : infos) row.push_back(info->fn(task, name));
    fv.scores.push_back(std::move(row));
  }
  return fv;
}

Task filter_features(const Task& task, const FilterFeaturesOpts& opts) {
  const int given = int(opts.abs.has_value()) + int(opts.perc.has_value()) +
                    int(opts.threshold.has_value());
  if (given != 1)
    throw ValueError("give exactly one of abs/perc/threshold");
  if (opts.method.empty() == (opts.values == nullptr))
    throw ValueError("give exactly one of method/values");

  FilterValues fv;
  std::string method;
  if (opts.values != nullptr) {
    fv = *opts.values;
    if (fv.methods.size() != 1)
      throw ValueError("filter values must carry exactly one method");
    method = fv.methods[0];
  } else {
    method = opts.method;
    fv = filter_values(task, {method});
  }

  const int p = static_cast<int>(fv.names.size());
  std::vector<double> score(p);
  for (int i = 0; i < p; ++i) score[i] = fv.scores[i][0];

  std::vector<std::string> kept;
  if (opts.threshold.has_value()) {
    for (int i = 0; i < p; ++i)
      if (!is_missing(score[i]) && score[i] >= *opts.threshold)
        kept.push_back(fv.names[i]);
  } else {
    int k;
    if (opts.abs.has_value()) {
      k = *opts.abs;
      if (k < 0 || k > p)
        throw ValueError("abs must lie in [0, number of features]");
    } else {
      if (!(*opts.perc > 0.0 && *opts.perc <= 1.0))
        throw ValueError("perc must lie in (0,1]");
      k = std::max(1, static_cast<int>(std::nearbyint(*opts.perc * p)));
    }
    std::vector<int> ord(p);
    for (int i = 0; i < p; ++i) ord[i] = i;
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) {
      const bool ma = is_missing(score[a]), mb = is_missing(score[b]);
      if (ma != mb) return mb;  // missing scores rank last
      if (ma) return false;
      return score[a] > score[b];
    });
    std::vector<bool> keep(p, false);
    for (int i = 0; i < k; ++i) keep[ord[i]] = true;
    for (int i = 0; i < p; ++i)
      if (keep[i]) kept.push_back(fv.names[i]);
  }
  if (kept.empty()) return drop_features(task, task.feature_names());
  return subset_task(task, {}, kept);
}

namespace {

struct FilterWrapperState {
  ModelPtr inner;
  std::vector<std::string> features;
};

}  // namespace

LearnerPtr make_filter_wrapper(const LearnerPtr& learner,
                               const std::string& method,
                               std::optional<int> abs,
                               std::optional<double> perc,
                               std::optional<double> threshold) {
  get_filter(method);  // validate early
  if (int(abs.has_value()) + int(perc.has_value()) +
          int(threshold.has_value()) >
      1)
    throw ValueError("give at most one of abs/perc/threshold");
  Learner w = *learner;
  w.id = learner->id + ".filtered";
  w.class_name = learner->class_name + ".filtered";
  w.next = learner;
  w.hyperpars = {};

  std::vector<json> method_values;
  for (const auto& name : list_filters()) method_values.push_back(name);
  ParamSet own;
  own.add(make_discrete_param("fw.method", method_values, json(method)));
  own.add(make_integer_param("fw.abs", 0, std::numeric_limits<int>::max()));
  own.add(make_numeric_param("fw.perc", 0.0, 1.0));
  Param thr = make_numeric_param("fw.threshold",
                                 -std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity());
  own.add(std::move(thr));
  w.param_set = learner->param_set.merged_with(own);
  w.hyperpars["fw.method"] = method;
  if (abs) w.hyperpars["fw.abs"] = *abs;
  if (perc) w.hyperpars["fw.perc"] = *perc;
  if (threshold) w.hyperpars["fw.threshold"] = *threshold;

  w.fit = [](const Learner& lrn, const Task& task,
             const std::vector<double>& weights, Rng& rng) -> std::any {
    FilterFeaturesOpts fopts;
    fopts.method = lrn.par_str("fw.method");
    if (lrn.par_set("fw.abs"))
      fopts.abs = static_cast<int>(lrn.par_int("fw.abs"));
    if (lrn.par_set("fw.perc")) fopts.perc = lrn.par_num("fw.perc");
    if (lrn.par_set("fw.threshold"))
      fopts.threshold = lrn.par_num("fw.threshold");
    const Task filtered = filter_features(task, fopts);

    ParamMap inner_pars;
    for (const auto& [k, v] : lrn.hyperpars)
      if (k.rfind("fw.", 0) != 0) inner_pars[k] = v;
    LearnerPtr inner = lrn.next;
    if (!inner_pars.empty()) inner = set_hyperpars(inner, inner_pars);
    if (inner->predict_type != lrn.predict_type)
      inner = set_predict_type(inner, lrn.predict_type);
    ModelPtr m = train(inner, filtered, {}, weights, rng);
    if (is_failure_model(m)) throw std::runtime_error(get_failure_message(*m));
    return FilterWrapperState{m, filtered.feature_names()};
  };
  w.predict = [](const Learner&, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const FilterWrapperState&>(model.state);
    return raw_predict(*st.inner, newdata, rng);
  };
  w.featimp = [](const Learner&, const WrappedModel& model) {
    const auto& st = std::any_cast<const FilterWrapperState&>(model.state);
    return get_feature_importance(st.inner);
  };
  return std::make_shared<Learner>(std::move(w));
}

std::vector<std::string> get_filtered_features(const ModelPtr& model) {
  if (!model) throw ValueError("null model");
  const auto* st = std::any_cast<FilterWrapperState>(&model->state);
  if (st == nullptr)
    throw ValueError("model was not trained by a filter wrapper");
  return st->features;
}

}  // namespace mlkit
