#include "mlkit/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mlkit/error.hpp"
#include "mlkit/model.hpp"

namespace mlkit {

double PerfValues::at(const std::string& id) const {
  for (const auto& [k, v] : values)
    if (k == id) return v;
  throw ValueError("no performance value for measure " + id);
}

bool PerfValues::has(const std::string& id) const {
  for (const auto& [k, v] : values)
    if (k == id) return true;
  return false;
}

namespace {

bool any_missing_response(const Prediction& p) {
  for (int v : p.response_cls)
    if (v < 0) return true;
  for (double v : p.response_num)
    if (is_missing(v)) return true;
  for (auto v : p.response_lbl)
    if (v == 255) return true;
  return false;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kMissing;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return kMissing;
  for (double x : v)
    if (is_missing(x)) return kMissing;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return kMissing;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// ---- classif helpers ----

struct BinaryCounts {
  double tp = 0, fn = 0, fp = 0, tn = 0;
};

BinaryCounts binary_counts(const Prediction& p) {
  const int pos = p.positive_index();
  if (p.n_classes() != 2 || pos < 0)
    throw ValueError("binary measure on a non-binary prediction");
  BinaryCounts c;
  for (int i = 0; i < p.n(); ++i) {
    const int t = p.truth_cls[i], r = p.response_cls[i];
    if (t < 0 || r < 0) continue;
    if (t == pos)
      (r == pos ? c.tp : c.fn) += 1.0;
    else
      (r == pos ? c.fp : c.tn) += 1.0;
  }
  return c;
}

double safe_ratio(double num, double den) {
  return den > 0 ? num / den : kMissing;
}

double measure_mmce(const Prediction& p) {
  double wrong = 0, n = 0;
  for (int i = 0; i < p.n(); ++i) {
    if (p.truth_cls[i] < 0) continue;
    n += 1;
    if (p.response_cls[i] != p.truth_cls[i]) wrong += 1;
  }
  return n > 0 ? wrong / n : kMissing;
}

double measure_ber(const Prediction& p) {
  const int K = p.n_classes();
  std::vector<double> wrong(K, 0), count(K, 0);
  for (int i = 0; i < p.n(); ++i) {
    const int t = p.truth_cls[i];
    if (t < 0) continue;
    count[t] += 1;
    if (p.response_cls[i] != t) wrong[t] += 1;
  }
  double s = 0;
  int present = 0;
  for (int c = 0; c < K; ++c)
    if (count[c] > 0) {
      s += wrong[c] / count[c];
      ++present;
    }
  return present > 0 ? s / present : kMissing;
}

double measure_auc(const Prediction& p) {
  const int pos = p.positive_index();
  std::vector<std::pair<double, int>> scored;  // (prob_pos, is_pos)
  for (int i = 0; i < p.n(); ++i) {
    const int t = p.truth_cls[i];
    if (t < 0) continue;
    scored.push_back({p.prob.at(i, pos), t == pos ? 1 : 0});
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t n = scored.size();
  double n_pos = 0, n_neg = 0, rank_sum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scored[j].first == scored[i].first) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (scored[k].second) rank_sum += avg_rank;
    i = j;
  }
  for (const auto& [s, y] : scored) (y ? n_pos : n_neg) += 1.0;
  if (n_pos == 0 || n_neg == 0) return kMissing;
  return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg);
}

double measure_logloss(const Prediction& p) {
  constexpr double eps = 1e-15;
  double s = 0, n = 0;
  for (int i = 0; i < p.n(); ++i) {
    const int t = p.truth_cls[i];
    if (t < 0) continue;
    const double pr = std::clamp(p.prob.at(i, t), eps, 1.0 - eps);
    s += -std::log(pr);
    n += 1;
  }
  return n > 0 ? s / n : kMissing;
}

double measure_multiclass_brier(const Prediction& p) {
  double s = 0, n = 0;
  const int K = p.n_classes();
  for (int i = 0; i < p.n(); ++i) {
    const int t = p.truth_cls[i];
    if (t < 0) continue;
    double row = 0;
    for (int c = 0; c < K; ++c) {
      const double d = p.prob.at(i, c) - (c == t ? 1.0 : 0.0);
      row += d * d;
    }
    s += row;
    n += 1;
  }
  return n > 0 ? s / n : kMissing;
}

// ---- regr helpers ----

template <typename F>
double mean_residual(const Prediction& p, F f) {
  double s = 0, n = 0;
  for (int i = 0; i < p.n(); ++i) {
    if (is_missing(p.truth_num[i])) continue;
    s += f(p.truth_num[i] - p.response_num[i]);
    n += 1;
  }
  return n > 0 ? s / n : kMissing;
}

double measure_medse(const Prediction& p) {
  std::vector<double> sq;
  for (int i = 0; i < p.n(); ++i) {
    if (is_missing(p.truth_num[i])) continue;
    const double r = p.truth_num[i] - p.response_num[i];
    sq.push_back(r * r);
  }
  return median_of(std::move(sq));
}

// ---- cluster helpers ----

Matrix numeric_feature_rows(const Task& task, const Prediction& p) {
  std::vector<const FeatureColumn*> cols;
  for (const auto& name : task.feature_names()) {
    const auto& c = task.data.col(name);
    if (c.kind == ColKind::Numeric || c.kind == ColKind::Logical)
      cols.push_back(&c);
  }
  if (cols.empty()) throw ValueError("cluster measures need numeric features");
  std::vector<int> rows0;
  if (!p.ids.empty())
    for (int id : p.ids) rows0.push_back(id - 1);
  else
    for (int i = 0; i < p.n(); ++i) rows0.push_back(i);
  Matrix m(static_cast<int>(rows0.size()), static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < rows0.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      m.at(static_cast<int>(i), static_cast<int>(j)) = cols[j]->values[rows0[i]];
  return m;
}

double dist_rows(const Matrix& m, int a, int b) {
  double s = 0;
  for (int c = 0; c < m.cols; ++c) {
    const double d = m.at(a, c) - m.at(b, c);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<std::vector<int>> cluster_groups(const Prediction& p) {
  std::vector<std::vector<int>> groups(p.n_classes());
  for (int i = 0; i < p.n(); ++i) {
    const int c = p.response_cls[i];
    if (c >= 0) groups[c].push_back(i);
  }
  groups.erase(std::remove_if(groups.begin(), groups.end(),
                              [](const auto& g) { return g.empty(); }),
               groups.end());
  return groups;
}

double measure_dunn(const Task& task, const Prediction& p) {
  const Matrix m = numeric_feature_rows(task, p);
  const auto groups = cluster_groups(p);
  if (groups.size() < 2) return kMissing;
  double min_inter = std::numeric_limits<double>::infinity();
  double max_diam = 0;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t i = 0; i < groups[a].size(); ++i)
      for (std::size_t j = i + 1; j < groups[a].size(); ++j)
        max_diam = std::max(max_diam, dist_rows(m, groups[a][i], groups[a][j]));
    for (std::size_t b = a + 1; b < groups.size(); ++b)
      for (int i : groups[a])
        for (int j : groups[b]) min_inter = std::min(min_inter, dist_rows(m, i, j));
  }
  if (max_diam == 0) return kMissing;
  return min_inter / max_diam;
}

double measure_silhouette(const Task& task, const Prediction& p) {
  const Matrix m = numeric_feature_rows(task, p);
  const auto groups = cluster_groups(p);
  if (groups.size() < 2) return kMissing;
  std::vector<int> of(m.rows, -1);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int i : groups[g]) of[i] = static_cast<int>(g);
  double s_sum = 0, n = 0;
  for (int i = 0; i < m.rows; ++i) {
    if (of[i] < 0) continue;
    const auto& own = groups[of[i]];
    double a = 0;
    if (own.size() > 1) {
      for (int j : own)
        if (j != i) a += dist_rows(m, i, j);
      a /= static_cast<double>(own.size() - 1);
    }
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (static_cast<int>(g) == of[i]) continue;
      double d = 0;
      for (int j : groups[g]) d += dist_rows(m, i, j);
      b = std::min(b, d / static_cast<double>(groups[g].size()));
    }
    const double s = own.size() > 1 ? (b - a) / std::max(a, b) : 0.0;
    s_sum += s;
    n += 1;
  }
  return n > 0 ? s_sum / n : kMissing;
}

double measure_db(const Task& task, const Prediction& p) {
  const Matrix m = numeric_feature_rows(task, p);
  const auto groups = cluster_groups(p);
  if (groups.size() < 2) return kMissing;
  const std::size_t G = groups.size();
  Matrix centroids(static_cast<int>(G), m.cols);
  std::vector<double> scatter(G, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    for (int i : groups[g])
      for (int c = 0; c < m.cols; ++c) centroids.at(static_cast<int>(g), c) += m.at(i, c);
    for (int c = 0; c < m.cols; ++c)
      centroids.at(static_cast<int>(g), c) /= static_cast<double>(groups[g].size());
    for (int i : groups[g]) {
      double d = 0;
      for (int c = 0; c < m.cols; ++c) {
        const double x = m.at(i, c) - centroids.at(static_cast<int>(g), c);
        d += x * x;
      }
      scatter[g] += std::sqrt(d);
    }
    scatter[g] /= static_cast<double>(groups[g].size());
  }
  double db = 0;
  for (std::size_t i = 0; i < G; ++i) {
    double worst = 0;
    for (std::size_t j = 0; j < G; ++j) {
      if (i == j) continue;
      double d = 0;
      for (int c = 0; c < m.cols; ++c) {
        const double x = centroids.at(static_cast<int>(i), c) - centroids.at(static_cast<int>(j), c);
        d += x * x;
      }
      d = std::sqrt(d);
      if (d > 0) worst = std::max(worst, (scatter[i] + scatter[j]) / d);
    }
    db += worst;
  }
  return db / static_cast<double>(G);
}

// ---- multilabel helpers ----

template <typename F>
double multilabel_rowwise(const Prediction& p, F per_row) {
  const int L = p.n_classes();
  double s = 0, n = 0;
  for (int i = 0; i < p.n(); ++i) {
    double t_and_p = 0, t_size = 0, p_size = 0, t_or_p = 0;
    for (int l = 0; l < L; ++l) {
      const bool t = p.truth_lbl[static_cast<std::size_t>(i) * L + l] == 1;
      const bool r = p.response_lbl[static_cast<std::size_t>(i) * L + l] == 1;
      t_and_p += t && r;
      t_or_p += t || r;
      t_size += t;
      p_size += r;
    }
    s += per_row(t_and_p, t_size, p_size, t_or_p);
    n += 1;
  }
  return n > 0 ? s / n : kMissing;
}

// rows where both sets are empty count as 1, other 0/0 cases as 0
double set_ratio(double num, double den, bool both_empty) {
  if (den > 0) return num / den;
  return both_empty ? 1.0 : 0.0;
}

double measure_hamloss(const Prediction& p) {
  const int L = p.n_classes();
  double s = 0, n = 0;
  for (int i = 0; i < p.n(); ++i)
    for (int l = 0; l < L; ++l) {
      const auto t = p.truth_lbl[static_cast<std::size_t>(i) * L + l];
      const auto r = p.response_lbl[static_cast<std::size_t>(i) * L + l];
      s += t != r;
      n += 1;
    }
  return n > 0 ? s / n : kMissing;
}

double measure_subset01(const Prediction& p) {
  const int L = p.n_classes();
  double s = 0, n = 0;
  for (int i = 0; i < p.n(); ++i) {
    bool mismatch = false;
    for (int l = 0; l < L; ++l)
      if (p.truth_lbl[static_cast<std::size_t>(i) * L + l] !=
          p.response_lbl[static_cast<std::size_t>(i) * L + l])
        mismatch = true;
    s += mismatch;
    n += 1;
  }
  return n > 0 ? s / n : kMissing;
}

// ---- costsens helpers ----

double measure_meancosts(const Task& task, const Prediction& p) {
  if (task.kind != TaskKind::CostSens)
    throw ValueError("meancosts requires a costsens task");
  double s = 0, n = 0;
  for (int i = 0; i < p.n(); ++i) {
    const int row = p.ids.empty() ? i : p.ids[i] - 1;
    const int r = p.response_cls[i];
    if (r < 0) continue;
    s += task.cost_matrix.at(row, r);
    n += 1;
  }
  return n > 0 ? s / n : kMissing;
}

double measure_mcp(const Task& task, const Prediction& p) {
  double s = 0, n = 0;
  for (int i = 0; i < p.n(); ++i) {
    const int row = p.ids.empty() ? i : p.ids[i] - 1;
    const int r = p.response_cls[i];
    if (r < 0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < task.cost_matrix.cols; ++c)
      best = std::min(best, task.cost_matrix.at(row, c));
    s += task.cost_matrix.at(row, r) - best;
    n += 1;
  }
  return n > 0 ? s / n : kMissing;
}

// ---- aggregation fns ----

const double kInf = std::numeric_limits<double>::infinity();

double require_train(const std::vector<double>& perf_train,
                     const std::string& id) {
  if (perf_train.empty())
    throw ValueError("aggregation " + id +
                     " requires training-set performances (predict=both)");
  return 0;
}

// no-information rate from the pooled test predictions: evaluate the measure
// on the cross product of observed truths and responses
double no_information_rate(const Measure& m, const Prediction& pooled) {
  std::vector<int> pos = pooled.test_positions();
  // keep the cross product tractable
  if (pos.size() > 2000) {
    std::vector<int> thin;
    const double step = static_cast<double>(pos.size()) / 2000.0;
    for (int i = 0; i < 2000; ++i) thin.push_back(pos[static_cast<std::size_t>(i * step)]);
    pos = thin;
  }
  const Prediction sub = pooled.select(pos);
  const int n = sub.n();
  std::vector<int> truth_idx, resp_idx;
  truth_idx.reserve(static_cast<std::size_t>(n) * n);
  resp_idx.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      truth_idx.push_back(i);
      resp_idx.push_back(j);
    }
  Prediction cross = sub.select(resp_idx);  // responses/probs from column index
  const Prediction truth_rows = sub.select(truth_idx);
  cross.truth_cls = truth_rows.truth_cls;
  cross.truth_num = truth_rows.truth_num;
  cross.truth_lbl = truth_rows.truth_lbl;
  cross.iters.clear();
  cross.on_train.clear();
  cross.ids.clear();
  return m.fn(nullptr, nullptr, cross);
}

std::map<std::string, Aggregation>& aggregation_registry() {
  static std::map<std::string, Aggregation> reg = [] {
    std::map<std::string, Aggregation> r;
    auto add = [&](const std::string& id, const std::string& name,
                   std::set<std::string> props, auto fn) {
      r[id] = Aggregation{id, name, std::move(props), fn};
    };
    add("test.mean", "mean of test performances", {"req.test"},
        [](const Measure&, const std::vector<double>& t,
           const std::vector<double>&, const Prediction*) { return mean_of(t); });
    add("test.median", "median of test performances", {"req.test"},
        [](const Measure&, const std::vector<double>& t,
           const std::vector<double>&, const Prediction*) { return median_of(t); });
    add("test.sd", "sd of test performances", {"req.test"},
        [](const Measure&, const std::vector<double>& t,
           const std::vector<double>&, const Prediction*) { return sd_of(t); });
    add("test.min", "min of test performances", {"req.test"},
        [](const Measure&, const std::vector<double>& t,
           const std::vector<double>&, const Prediction*) {
          return t.empty() ? kMissing : *std::min_element(t.begin(), t.end());
        });
    add("test.max", "max of test performances", {"req.test"},
        [](const Measure&, const std::vector<double>& t,
           const std::vector<double>&, const Prediction*) {
          return t.empty() ? kMissing : *std::max_element(t.begin(), t.end());
        });
    add("train.mean", "mean of training performances", {"req.train"},
        [](const Measure& m, const std::vector<double>&,
           const std::vector<double>& tr, const Prediction*) {
          require_train(tr, "train.mean");
          return mean_of(tr);
        });
    add("test.rmse", "root of mean test performances", {"req.test"},
        [](const Measure&, const std::vector<double>& t,
           const std::vector<double>&, const Prediction*) {
          return std::sqrt(mean_of(t));
        });
    add("b632", ".632 bootstrap", {"req.test", "req.train"},
        [](const Measure& m, const std::vector<double>& t,
           const std::vector<double>& tr, const Prediction*) {
          require_train(tr, "b632");
          return 0.368 * mean_of(tr) + 0.632 * mean_of(t);
        });
    add("b632plus", ".632+ bootstrap", {"req.test", "req.train"},
        [](const Measure& m, const std::vector<double>& t,
           const std::vector<double>& tr, const Prediction* pred) {
          require_train(tr, "b632plus");
          if (pred == nullptr)
            throw ValueError("aggregation b632plus needs the merged prediction");
          const double e_train = mean_of(tr);
          const double e_oob = mean_of(t);
          const double gamma = no_information_rate(m, *pred);
          double rel = 0.0;
          const double den = gamma - e_train;
          if (den != 0.0 && !is_missing(den))
            rel = std::clamp((e_oob - e_train) / den, 0.0, 1.0);
          const double w = 0.632 / (1.0 - 0.368 * rel);
          return (1.0 - w) * e_train + w * e_oob;
        });
    return r;
  }();
  return reg;
}

std::map<std::string, Measure>& measure_registry();

Measure basic_measure(const std::string& id, std::set<std::string> props,
                      bool minimize, double best, double worst,
                      std::function<double(const Task*, const WrappedModel*,
                                           const Prediction&)>
                          fn,
                      const std::string& aggr_id = "test.mean") {
  Measure m;
  m.id = id;
  m.name = id;
  m.properties = std::move(props);
  m.minimize = minimize;
  m.best = best;
  m.worst = worst;
  m.fn = std::move(fn);
  m.aggr = aggregation_registry().at(aggr_id);
  return m;
}

// wraps a truth/response-only formula with the missing-response guard
template <typename F>
auto guarded(F f) {
  return [f](const Task* task, const WrappedModel* model,
             const Prediction& p) -> double {
    if (any_missing_response(p)) return kMissing;
    return f(task, model, p);
  };
}

std::map<std::string, Measure>& measure_registry() {
  static std::map<std::string, Measure> reg = [] {
    std::map<std::string, Measure> r;
    auto add = [&](Measure m) { r[m.id] = std::move(m); };

    const std::set<std::string> cls = {"classif", "classif.multi", "req.pred",
                                       "req.truth"};
    const std::set<std::string> bin = {"classif", "req.pred", "req.truth"};

    add(basic_measure("mmce", cls, true, 0, 1,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) { return measure_mmce(p); })));
    add(basic_measure("acc", cls, false, 1, 0,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) {
                        const double e = measure_mmce(p);
                        return is_missing(e) ? e : 1.0 - e;
                      })));
    add(basic_measure("ber", cls, true, 0, 1,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) { return measure_ber(p); })));

    auto add_binary = [&](const std::string& id, bool minimize, double best,
                          double worst, auto pick) {
      add(basic_measure(id, bin, minimize, best, worst,
                        guarded([pick](const Task*, const WrappedModel*,
                                       const Prediction& p) {
                          return pick(binary_counts(p));
                        })));
    };
    add_binary("tpr", false, 1, 0,
               [](BinaryCounts c) { return safe_ratio(c.tp, c.tp + c.fn); });
    add_binary("tnr", false, 1, 0,
               [](BinaryCounts c) { return safe_ratio(c.tn, c.fp + c.tn); });
    add_binary("fpr", true, 0, 1,
               [](BinaryCounts c) { return safe_ratio(c.fp, c.fp + c.tn); });
    add_binary("fnr", true, 0, 1,
               [](BinaryCounts c) { return safe_ratio(c.fn, c.tp + c.fn); });
    add_binary("ppv", false, 1, 0,
               [](BinaryCounts c) { return safe_ratio(c.tp, c.tp + c.fp); });
    add_binary("npv", false, 1, 0,
               [](BinaryCounts c) { return safe_ratio(c.tn, c.tn + c.fn); });

    {
      auto m = basic_measure(
          "auc", {"classif", "req.pred", "req.truth", "predtype.prob"}, false,
          1, 0,
          guarded([](const Task*, const WrappedModel*, const Prediction& p) {
            return measure_auc(p);
          }));
      add(std::move(m));
    }
    add(basic_measure(
        "logloss",
        {"classif", "classif.multi", "req.pred", "req.truth", "predtype.prob"},
        true, 0, kInf,
        guarded([](const Task*, const WrappedModel*, const Prediction& p) {
          return measure_logloss(p);
        })));
    add(basic_measure(
        "multiclass.brier",
        {"classif", "classif.multi", "req.pred", "req.truth", "predtype.prob"},
        true, 0, 2,
        guarded([](const Task*, const WrappedModel*, const Prediction& p) {
          return measure_multiclass_brier(p);
        })));

    const std::set<std::string> reg_props = {"regr", "req.pred", "req.truth"};
    add(basic_measure("mse", reg_props, true, 0, kInf,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) {
                        return mean_residual(p, [](double r) { return r * r; });
                      })));
    add(basic_measure("rmse", reg_props, true, 0, kInf,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) {
                        return mean_residual(p, [](double r) { return r * r; });
                      }),
                      "test.rmse"));
    add(basic_measure("mae", reg_props, true, 0, kInf,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) {
                        return mean_residual(p, [](double r) { return std::abs(r); });
                      })));
    add(basic_measure("medse", reg_props, true, 0, kInf,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) { return measure_medse(p); })));

    const std::set<std::string> clu = {"cluster", "req.pred", "req.task"};
    auto add_cluster = [&](const std::string& id, bool minimize, double best,
                           double worst, auto f) {
      add(basic_measure(id, clu, minimize, best, worst,
                        guarded([f, id](const Task* task, const WrappedModel*,
                                        const Prediction& p) {
                          if (task == nullptr)
                            throw ValueError("measure " + id + " requires the task");
                          return f(*task, p);
                        })));
    };
    add_cluster("dunn", false, kInf, 0, measure_dunn);
    add_cluster("silhouette", false, 1, -1, measure_silhouette);
    add_cluster("db", true, 0, kInf, measure_db);

    const std::set<std::string> ml = {"multilabel", "req.pred", "req.truth"};
    add(basic_measure("multilabel.hamloss", ml, true, 0, 1,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) { return measure_hamloss(p); })));
    add(basic_measure("multilabel.subset01", ml, true, 0, 1,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) { return measure_subset01(p); })));
    add(basic_measure("multilabel.f1", ml, false, 1, 0,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) {
                        return multilabel_rowwise(
                            p, [](double tp, double t, double pr, double) {
                              return set_ratio(2 * tp, t + pr, t == 0 && pr == 0);
                            });
                      })));
    add(basic_measure("multilabel.acc", ml, false, 1, 0,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) {
                        return multilabel_rowwise(
                            p, [](double tp, double t, double pr, double un) {
                              return set_ratio(tp, un, t == 0 && pr == 0);
                            });
                      })));
    add(basic_measure("multilabel.tpr", ml, false, 1, 0,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) {
                        return multilabel_rowwise(
                            p, [](double tp, double t, double pr, double) {
                              return set_ratio(tp, t, t == 0 && pr == 0);
                            });
                      })));
    add(basic_measure("multilabel.ppv", ml, false, 1, 0,
                      guarded([](const Task*, const WrappedModel*,
                                 const Prediction& p) {
                        return multilabel_rowwise(
                            p, [](double tp, double t, double pr, double) {
                              return set_ratio(tp, pr, t == 0 && pr == 0);
                            });
                      })));

    const std::set<std::string> cs = {"costsens", "req.pred", "req.task"};
    add(basic_measure("meancosts", cs, true, 0, kInf,
                      guarded([](const Task* task, const WrappedModel*,
                                 const Prediction& p) {
                        if (task == nullptr)
                          throw ValueError("measure meancosts requires the task");
                        return measure_meancosts(*task, p);
                      })));
    add(basic_measure("mcp", cs, true, 0, kInf,
                      guarded([](const Task* task, const WrappedModel*,
                                 const Prediction& p) {
                        if (task == nullptr)
                          throw ValueError("measure mcp requires the task");
                        return measure_mcp(*task, p);
                      })));

    const std::set<std::string> all_kinds = {"classif", "classif.multi", "regr",
                                             "cluster", "multilabel", "costsens"};
    {
      auto props = all_kinds;
      props.insert("req.model");
      add(basic_measure("timetrain", props, true, 0, kInf,
                        [](const Task*, const WrappedModel* model,
                           const Prediction&) {
                          return model->train_time;
                        }));
    }
    {
      auto props = all_kinds;
      props.insert("req.pred");
      add(basic_measure("timepredict", props, true, 0, kInf,
                        [](const Task*, const WrappedModel*,
                           const Prediction& p) { return p.predict_time; }));
    }
    {
      auto props = all_kinds;
      props.insert("req.model");
      props.insert("req.pred");
      add(basic_measure("timeboth", props, true, 0, kInf,
                        [](const Task*, const WrappedModel* model,
                           const Prediction& p) {
                          return model->train_time + p.predict_time;
                        }));
    }
    return r;
  }();
  return reg;
}

std::string kind_property(const Prediction& pred) {
  switch (pred.task_kind) {
    case TaskKind::Classif:
      return pred.n_classes() > 2 ? "classif.multi" : "classif";
    case TaskKind::Regr: return "regr";
    case TaskKind::Cluster: return "cluster";
    case TaskKind::Multilabel: return "multilabel";
    case TaskKind::CostSens: return "costsens";
  }
  return "";
}

void check_requirements(const Measure& m, const Prediction& pred,
                        const Task* task, const WrappedModel* model) {
  const std::string kp = kind_property(pred);
  if (!m.has_property(kp))
    throw ValueError("measure " + m.id + " is not applicable here (needs " +
                     kp + ")");
  if (m.has_property("predtype.prob") &&
      (pred.predict_type != PredictType::Prob || pred.prob.empty()))
    throw ValueError("measure " + m.id +
                     " requires predtype.prob (a prob prediction)");
  if (m.has_property("req.truth") && !pred.has_truth())
    throw ValueError("measure " + m.id + " requires truth values (req.truth)");
  if (m.has_property("req.task") && task == nullptr)
    throw ValueError("measure " + m.id + " requires the task (req.task)");
  if (m.has_property("req.model") && model == nullptr)
    throw ValueError("measure " + m.id + " requires the model (req.model)");
}

}  // namespace

PerfValues performance(const Prediction& pred,
                       const std::vector<Measure>& measures, const Task* task,
                       const WrappedModel* model) {
  PerfValues out;
  for (const auto& m : measures) {
    check_requirements(m, pred, task, model);
    out.values.emplace_back(m.id, m.fn(task, model, pred));
  }
  return out;
}

double performance(const Prediction& pred, const Measure& measure,
                   const Task* task, const WrappedModel* model) {
  return performance(pred, std::vector<Measure>{measure}, task, model)
      .values[0]
      .second;
}

Aggregation get_aggregation(const std::string& id) {
  auto& reg = aggregation_registry();
  auto it = reg.find(id);
  if (it == reg.end()) throw ValueError("unknown aggregation: " + id);
  return it->second;
}

Measure set_aggregation(Measure measure, const Aggregation& aggr) {
  measure.aggr = aggr;
  return measure;
}

Measure set_aggregation(Measure measure, const std::string& aggr_id) {
  return set_aggregation(std::move(measure), get_aggregation(aggr_id));
}

Measure make_measure(
    const std::string& id, const std::set<std::string>& properties,
    bool minimize, double best, double worst,
    std::function<double(const Task*, const WrappedModel*, const Prediction&)>
        fn) {
  if (minimize && best > worst)
    throw ValueError("minimized measure must have best <= worst");
  if (!minimize && best < worst)
    throw ValueError("maximized measure must have best >= worst");
  Measure m;
  m.id = id;
  m.name = id;
  m.properties = properties;
  m.minimize = minimize;
  m.best = best;
  m.worst = worst;
  m.fn = [fn](const Task* t, const WrappedModel* mo, const Prediction& p) {
    if (any_missing_response(p)) return kMissing;
    return fn(t, mo, p);
  };
  m.aggr = get_aggregation("test.mean");
  return m;
}

Measure make_cost_measure(const Matrix& costs,
                          const std::vector<std::string>& class_levels,
                          double best, double worst, const std::string& id) {
  const int K = static_cast<int>(class_levels.size());
  if (costs.rows != K || costs.cols != K)
    throw ValueError("cost matrix must be KxK with class-level names");
  Matrix c = costs;
  std::vector<std::string> levels = class_levels;
  Measure m = make_measure(
      id, {"classif", "classif.multi", "req.pred", "req.truth"}, true, best,
      worst,
      [c, levels](const Task*, const WrappedModel*, const Prediction& p) {
        std::vector<int> remap(p.n_classes(), -1);
        for (int i = 0; i < p.n_classes(); ++i) {
          for (std::size_t j = 0; j < levels.size(); ++j)
            if (levels[j] == p.class_levels[i]) remap[i] = static_cast<int>(j);
          if (remap[i] < 0)
            throw ValueError("cost matrix has no row for class " +
                             p.class_levels[i]);
        }
        double s = 0, n = 0;
        for (int i = 0; i < p.n(); ++i) {
          const int t = p.truth_cls[i], r = p.response_cls[i];
          if (t < 0 || r < 0) continue;
          s += c.at(remap[t], remap[r]);
          n += 1;
        }
        return n > 0 ? s / n : kMissing;
      });
  json extra;
  extra["costs"] = json::array();
  for (int i = 0; i < K; ++i) {
    json row = json::array();
    for (int j = 0; j < K; ++j) row.push_back(c.at(i, j));
    extra["costs"].push_back(row);
  }
  extra["classes"] = levels;
  m.extra = std::move(extra);
  return m;
}

void register_measure(const Measure& measure) {
  auto& reg = measure_registry();
  if (reg.count(measure.id))
    throw ValueError("measure already registered: " + measure.id);
  reg[measure.id] = measure;
}

Measure get_measure(const std::string& id) {
  auto& reg = measure_registry();
  auto it = reg.find(id);
  if (it == reg.end()) throw ValueError("unknown measure: " + id);
  return it->second;
}

bool measure_registered(const std::string& id) {
  return measure_registry().count(id) > 0;
}

Measure get_default_measure(TaskKind kind) {
  switch (kind) {
    case TaskKind::Classif: return get_measure("mmce");
    case TaskKind::Regr: return get_measure("mse");
    case TaskKind::Cluster: return get_measure("db");
    case TaskKind::Multilabel: return get_measure("multilabel.hamloss");
    case TaskKind::CostSens: return get_measure("mcp");
  }
  throw ValueError("no default measure for this task kind");
}

Measure get_default_measure(const Task& task) {
  return get_default_measure(task.kind);
}

std::vector<Measure> list_measures(const std::set<std::string>& properties) {
  std::vector<Measure> out;
  for (const auto& [id, m] : measure_registry()) {
    bool ok = true;
    for (const auto& p : properties)
      if (!m.has_property(p)) ok = false;
    if (ok) out.push_back(m);
  }
  return out;
}

std::vector<Measure> list_measures(const Task& task) {
  std::set<std::string> props;
  switch (task.kind) {
    case TaskKind::Classif:
      props.insert(task.n_classes() > 2 ? "classif.multi" : "classif");
      break;
    case TaskKind::Regr: props.insert("regr"); break;
    case TaskKind::Cluster: props.insert("cluster"); break;
    case TaskKind::Multilabel: props.insert("multilabel"); break;
    case TaskKind::CostSens: props.insert("costsens"); break;
  }
  return list_measures(props);
}

}  // namespace mlkit
