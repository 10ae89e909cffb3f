#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mlkit/error.hpp"
#include "mlkit/learner.hpp"
#include "mlkit/model.hpp"

namespace mlkit {

void register_learner_raw(const Learner& prototype);

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix to_matrix(const Dataset& d) {
  Matrix m(d.n_rows, d.ncol());
  for (int j = 0; j < d.ncol(); ++j)
    for (int i = 0; i < d.n_rows; ++i) m.at(i, j) = d.columns[j].values[i];
  return m;
}

Matrix feature_matrix(const Task& task) {
  return to_matrix(task.data.select_cols(task.feature_names()));
}

std::vector<int> target_codes(const Task& task) {
  const auto& tc = task.target_col();
  std::vector<int> codes(tc.size());
  for (int i = 0; i < tc.size(); ++i)
    codes[i] = tc.missing(i) ? -1 : static_cast<int>(tc.values[i]);
  return codes;
}

std::vector<double> unit_weights(int n, const std::vector<double>& w) {
  if (!w.empty()) return w;
  return std::vector<double>(n, 1.0);
}

int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

// ---------- featureless ----------

struct FeaturelessClassifState {
  std::vector<double> freq;  // per class level
};

struct FeaturelessRegrState {
  double mean = 0.0;
};

std::any featureless_classif_fit(const Learner&, const Task& task,
                                 const std::vector<double>& weights, Rng&) {
  const auto codes = target_codes(task);
  const auto w = unit_weights(task.n_rows(), weights);
  FeaturelessClassifState st;
  st.freq.assign(task.n_classes(), 0.0);
  double total = 0.0;
  for (int i = 0; i < task.n_rows(); ++i) {
    if (codes[i] < 0) continue;
    st.freq[codes[i]] += w[i];
    total += w[i];
  }
  if (total <= 0) throw LearnerError("featureless: no usable training rows");
  for (auto& f : st.freq) f /= total;
  return st;
}

RawPrediction featureless_classif_predict(const Learner&,
                                          const WrappedModel& model,
                                          const Dataset& nd, Rng&) {
  const auto& st = std::any_cast<const FeaturelessClassifState&>(model.state);
  RawPrediction raw;
  const int K = static_cast<int>(st.freq.size());
  const int r = argmax_lowest(st.freq);
  raw.response_cls.assign(nd.n_rows, r);
  raw.prob = Matrix(nd.n_rows, K);
  for (int i = 0; i < nd.n_rows; ++i)
    for (int c = 0; c < K; ++c) raw.prob.at(i, c) = st.freq[c];
  return raw;
}

std::any featureless_regr_fit(const Learner&, const Task& task,
                              const std::vector<double>& weights, Rng&) {
  const auto& tc = task.target_col();
  const auto w = unit_weights(task.n_rows(), weights);
  double s = 0, total = 0;
  for (int i = 0; i < task.n_rows(); ++i) {
    if (tc.missing(i)) continue;
    s += w[i] * tc.values[i];
    total += w[i];
  }
  if (total <= 0) {  // all-zero weights: fall back to the plain mean
    s = 0;
    total = 0;
    for (int i = 0; i < task.n_rows(); ++i)
      if (!tc.missing(i)) {
        s += tc.values[i];
        total += 1;
      }
  }
  if (total <= 0) throw LearnerError("featureless: no usable training rows");
  return FeaturelessRegrState{s / total};
}

RawPrediction featureless_regr_predict(const Learner&,
                                       const WrappedModel& model,
                                       const Dataset& nd, Rng&) {
  const auto& st = std::any_cast<const FeaturelessRegrState&>(model.state);
  RawPrediction raw;
  raw.response_num.assign(nd.n_rows, st.mean);
  return raw;
}

// ---------- knn ----------

struct KnnState {
  Matrix x;
  std::vector<int> ycls;
  std::vector<double> ynum;
  int n_classes = 0;
  int k = 5;
};

std::any knn_fit(const Learner& lrn, const Task& task,
                 const std::vector<double>&, Rng&) {
  KnnState st;
  st.x = feature_matrix(task);
  st.k = static_cast<int>(lrn.par_int("k"));
  if (task.kind == TaskKind::Classif) {
    st.ycls = target_codes(task);
    st.n_classes = task.n_classes();
  } else {
    const auto& tc = task.target_col();
    st.ynum = tc.values;
  }
  if (st.x.rows == 0) throw LearnerError("knn: empty training set");
  return st;
}

std::vector<int> knn_neighbors(const KnnState& st, const Matrix& nd, int row,
                               int k) {
  std::vector<std::pair<double, int>> d(st.x.rows);
  for (int j = 0; j < st.x.rows; ++j) {
    double s = 0;
    for (int c = 0; c < st.x.cols; ++c) {
      const double diff = nd.at(row, c) - st.x.at(j, c);
      s += diff * diff;
    }
    d[j] = {s, j};
  }
  std::partial_sort(d.begin(), d.begin() + k, d.end());
  std::vector<int> out(k);
  for (int i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

RawPrediction knn_classif_predict(const Learner&, const WrappedModel& model,
                                  const Dataset& nd, Rng&) {
  const auto& st = std::any_cast<const KnnState&>(model.state);
  const Matrix m = to_matrix(nd);
  const int k = std::min(st.k, st.x.rows);
  RawPrediction raw;
  raw.prob = Matrix(m.rows, st.n_classes);
  raw.response_cls.resize(m.rows);
  for (int i = 0; i < m.rows; ++i) {
    std::vector<double> counts(st.n_classes, 0.0);
    for (int j : knn_neighbors(st, m, i, k)) counts[st.ycls[j]] += 1.0;
    for (int c = 0; c < st.n_classes; ++c)
      raw.prob.at(i, c) = counts[c] / static_cast<double>(k);
    raw.response_cls[i] = argmax_lowest(counts);
  }
  return raw;
}

RawPrediction knn_regr_predict(const Learner&, const WrappedModel& model,
                               const Dataset& nd, Rng&) {
  const auto& st = std::any_cast<const KnnState&>(model.state);
  const Matrix m = to_matrix(nd);
  const int k = std::min(st.k, st.x.rows);
  RawPrediction raw;
  raw.response_num.resize(m.rows);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0;
    for (int j : knn_neighbors(st, m, i, k)) s += st.ynum[j];
    raw.response_num[i] = s / static_cast<double>(k);
  }
  return raw;
}

// ---------- lda ----------

struct LdaState {
  Matrix means;                  // K x p
  Matrix sinv;                   // p x p
  std::vector<double> log_prior; // -inf for absent classes
};

std::any lda_fit(const Learner& lrn, const Task& task,
                 const std::vector<double>&, Rng&) {
  const Matrix x = feature_matrix(task);
  const auto y = target_codes(task);
  const int n = x.rows, p = x.cols, K = task.n_classes();
  const double ridge = lrn.par_num("ridge");

  std::vector<double> counts(K, 0.0);
  Matrix means(K, p);
  for (int i = 0; i < n; ++i) {
    counts[y[i]] += 1.0;
    for (int c = 0; c < p; ++c) means.at(y[i], c) += x.at(i, c);
  }
  int present = 0;
  for (int g = 0; g < K; ++g)
    if (counts[g] > 0) {
      ++present;
      for (int c = 0; c < p; ++c) means.at(g, c) /= counts[g];
    }
  if (present < 2) throw LearnerError("lda: need at least two observed classes");

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd d(p);
    for (int c = 0; c < p; ++c) d(c) = x.at(i, c) - means.at(y[i], c);
    s += d * d.transpose();
  }
  s /= static_cast<double>(std::max(1, n - present));
  s += ridge * Eigen::MatrixXd::Identity(p, p);

  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw LearnerError("lda: pooled covariance is singular; increase ridge");
  const Eigen::MatrixXd sinv = llt.solve(Eigen::MatrixXd::Identity(p, p));

  LdaState st;
  st.means = means;
  st.sinv = Matrix(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) st.sinv.at(i, j) = sinv(i, j);
  st.log_prior.assign(K, -kInf);
  for (int g = 0; g < K; ++g)
    if (counts[g] > 0) st.log_prior[g] = std::log(counts[g] / n);
  return st;
}

RawPrediction lda_predict(const Learner&, const WrappedModel& model,
                          const Dataset& nd, Rng&) {
  const auto& st = std::any_cast<const LdaState&>(model.state);
  const Matrix m = to_matrix(nd);
  const int K = st.means.rows, p = st.means.cols;
  RawPrediction raw;
  raw.prob = Matrix(m.rows, K);
  raw.response_cls.resize(m.rows);
  std::vector<double> score(K);
  std::vector<double> d(p);
  for (int i = 0; i < m.rows; ++i) {
    for (int g = 0; g < K; ++g) {
      if (st.log_prior[g] == -kInf) {
        score[g] = -kInf;
        continue;
      }
      for (int c = 0; c < p; ++c) d[c] = m.at(i, c) - st.means.at(g, c);
      double quad = 0;
      for (int a = 0; a < p; ++a) {
        double row = 0;
        for (int b = 0; b < p; ++b) row += st.sinv.at(a, b) * d[b];
        quad += d[a] * row;
      }
      score[g] = st.log_prior[g] - 0.5 * quad;
    }
    const double mx = *std::max_element(score.begin(), score.end());
    double total = 0;
    for (int g = 0; g < K; ++g) {
      const double e = score[g] == -kInf ? 0.0 : std::exp(score[g] - mx);
      raw.prob.at(i, g) = e;
      total += e;
    }
    for (int g = 0; g < K; ++g) raw.prob.at(i, g) /= total;
    std::vector<double> probs(raw.prob.row(i));
    raw.response_cls[i] = argmax_lowest(probs);
  }
  return raw;
}

// ---------- logreg ----------

struct LogregState {
  std::vector<double> beta;  // intercept first
  int pos = 1;               // positive class level index
  bool converged = true;
};

std::any logreg_fit(const Learner& lrn, const Task& task,
                    const std::vector<double>& weights, Rng&) {
  const Matrix xm = feature_matrix(task);
  const auto codes = target_codes(task);
  const auto w = unit_weights(task.n_rows(), weights);
  const int n = xm.rows, p = xm.cols;
  const int max_iter = static_cast<int>(lrn.par_int("max_iter"));
  const double tol = lrn.par_num("tol");
  const int pos = task.target_col().level_index(task.positive);
  if (pos < 0) throw LearnerError("logreg: task has no positive class");

  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n), wv(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int j = 0; j < p; ++j) x(i, j + 1) = xm.at(i, j);
    y(i) = codes[i] == pos ? 1.0 : 0.0;
    wv(i) = w[i];
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  bool converged = false;
  for (int it = 0; it < max_iter && !converged; ++it) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd mu(n), irls_w(n), z(n);
    for (int i = 0; i < n; ++i) {
      const double pi = std::clamp(1.0 / (1.0 + std::exp(-eta(i))), 1e-10,
                                   1.0 - 1e-10);
      mu(i) = pi;
      const double v = pi * (1.0 - pi);
      irls_w(i) = wv(i) * v;
      z(i) = eta(i) + (y(i) - pi) / v;
    }
    const Eigen::MatrixXd xtw = x.transpose() * irls_w.asDiagonal();
    Eigen::MatrixXd a = xtw * x;
    a.diagonal().array() += 1e-10;
    const Eigen::VectorXd beta_new = a.ldlt().solve(xtw * z);
    converged = (beta_new - beta).cwiseAbs().maxCoeff() < tol;
    beta = beta_new;
  }

  LogregState st;
  st.beta.assign(beta.data(), beta.data() + p + 1);
  st.pos = pos;
  st.converged = converged;
  if (!converged && lrn.config.show_info)
    std::fprintf(stderr, "Warning: logreg did not converge in %d iterations\n",
                 max_iter);
  return st;
}

RawPrediction logreg_predict(const Learner&, const WrappedModel& model,
                             const Dataset& nd, Rng&) {
  const auto& st = std::any_cast<const LogregState&>(model.state);
  const Matrix m = to_matrix(nd);
  const int K = static_cast<int>(model.task_desc.class_levels.size());
  RawPrediction raw;
  raw.prob = Matrix(m.rows, K);
  raw.response_cls.resize(m.rows);
  for (int i = 0; i < m.rows; ++i) {
    double eta = st.beta[0];
    for (int j = 0; j < m.cols; ++j) eta += st.beta[j + 1] * m.at(i, j);
    const double p = 1.0 / (1.0 + std::exp(-eta));
    for (int c = 0; c < K; ++c)
      raw.prob.at(i, c) = c == st.pos ? p : 1.0 - p;
    std::vector<double> probs(raw.prob.row(i));
    raw.response_cls[i] = argmax_lowest(probs);
  }
  return raw;
}

// ---------- cart ----------

struct CartNode {
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  std::vector<std::uint8_t> left_cats;  // factor splits: level -> goes left
  int left = -1, right = -1;
  std::vector<double> class_counts;  // classif leaves/internal
  double value = 0.0;                // regr mean
};

struct CartState {
  std::vector<CartNode> nodes;
  std::vector<ColKind> kinds;
  std::vector<std::string> features;
  std::map<std::string, double> importance;
  int n_classes = 0;
};

struct CartBuilder {
  const Matrix& x;
  const std::vector<ColKind>& kinds;
  const std::vector<int>& ycls;
  const std::vector<double>& ynum;
  const std::vector<double>& w;
  int n_classes;
  double minsplit, minbucket, cp;
  int maxdepth;
  double root_impurity = 0.0;
  CartState* st;

  bool classif() const { return n_classes > 0; }

  double impurity(const std::vector<int>& rows, std::vector<double>* counts_out,
                  double* mean_out, double* weight_out) const {
    double total = 0;
    if (classif()) {
      std::vector<double> counts(n_classes, 0.0);
      for (int i : rows) {
        counts[ycls[i]] += w[i];
        total += w[i];
      }
      double sq = 0;
      for (double c : counts) sq += c * c;
      if (counts_out) *counts_out = counts;
      if (weight_out) *weight_out = total;
      return total > 0 ? total - sq / total : 0.0;  // weighted gini
    }
    double s = 0;
    for (int i : rows) {
      s += w[i] * ynum[i];
      total += w[i];
    }
    const double mean = total > 0 ? s / total : 0.0;
    double sse = 0;
    for (int i : rows) sse += w[i] * (ynum[i] - mean) * (ynum[i] - mean);
    if (mean_out) *mean_out = mean;
    if (weight_out) *weight_out = total;
    return sse;
  }

  struct Split {
    double gain = -1.0;
    int feature = -1;
    double threshold = 0.0;
    std::vector<std::uint8_t> left_cats;
    std::vector<int> left_rows, right_rows;
  };

  // impurity of a weighted (count,sum,sumsq | class-count) accumulator
  double group_impurity(const std::vector<double>& counts, double total,
                        double sum, double sumsq) const {
    if (classif()) {
      double sq = 0;
      for (double c : counts) sq += c * c;
      return total > 0 ? total - sq / total : 0.0;
    }
    return total > 0 ? sumsq - sum * sum / total : 0.0;
  }

  void try_partition(Split& best, int f, const std::vector<int>& rows,
                     double node_impurity,
                     const std::vector<std::vector<int>>& order_groups,
                     bool is_factor, const std::vector<int>& group_levels) {
    // scan prefixes of order_groups as the left side
    std::vector<double> lcounts(classif() ? n_classes : 0, 0.0);
    std::vector<double> rcounts;
    double ltotal = 0, lsum = 0, lsumsq = 0;
    double rtotal = 0, rsum = 0, rsumsq = 0;
    if (classif()) {
      rcounts.assign(n_classes, 0.0);
      for (int i : rows) rcounts[ycls[i]] += w[i];
    }
    for (int i : rows) {
      rtotal += w[i];
      if (!classif()) {
        rsum += w[i] * ynum[i];
        rsumsq += w[i] * ynum[i] * ynum[i];
      }
    }
    for (std::size_t g = 0; g + 1 < order_groups.size(); ++g) {
      for (int i : order_groups[g]) {
        const double wi = w[i];
        ltotal += wi;
        rtotal -= wi;
        if (classif()) {
          lcounts[ycls[i]] += wi;
          rcounts[ycls[i]] -= wi;
        } else {
          lsum += wi * ynum[i];
          rsum -= wi * ynum[i];
          lsumsq += wi * ynum[i] * ynum[i];
          rsumsq -= wi * ynum[i] * ynum[i];
        }
      }
      if (ltotal < minbucket || rtotal < minbucket) continue;
      const double gain = node_impurity -
                          group_impurity(lcounts, ltotal, lsum, lsumsq) -
                          group_impurity(rcounts, rtotal, rsum, rsumsq);
      if (gain <= best.gain) continue;
      if (root_impurity <= 0 || gain / root_impurity < cp) continue;
      best.gain = gain;
      best.feature = f;
      best.left_rows.clear();
      best.right_rows.clear();
      for (std::size_t h = 0; h < order_groups.size(); ++h)
        for (int i : order_groups[h])
          (h <= g ? best.left_rows : best.right_rows).push_back(i);
      if (is_factor) {
        best.left_cats.clear();
        int max_level = 0;
        for (int lv : group_levels) max_level = std::max(max_level, lv);
        best.left_cats.assign(max_level + 1, 0);
        for (std::size_t h = 0; h <= g; ++h)
          best.left_cats[group_levels[h]] = 1;
        best.threshold = 0;
      } else {
        // midpoint between the last left value and the first right value
        const int a = order_groups[g].front();
        const int b = order_groups[g + 1].front();
        best.threshold = 0.5 * (x.at(a, f) + x.at(b, f));
        best.left_cats.clear();
      }
    }
  }

  Split best_split(const std::vector<int>& rows, double node_impurity) {
    Split best;
    for (int f = 0; f < x.cols; ++f) {
      if (kinds[f] == ColKind::Factor || kinds[f] == ColKind::Ordered) {
        std::map<int, std::vector<int>> by_level;
        for (int i : rows) by_level[static_cast<int>(x.at(i, f))].push_back(i);
        if (by_level.size() < 2) continue;
        if (classif() && n_classes > 2) {
          // one-vs-rest ordering per candidate class
          for (int c = 0; c < n_classes; ++c) {
            std::vector<std::pair<double, int>> keyed;
            for (const auto& [lv, lr] : by_level) {
              double wc = 0, total = 0;
              for (int i : lr) {
                total += w[i];
                if (ycls[i] == c) wc += w[i];
              }
              keyed.push_back({total > 0 ? wc / total : 0.0, lv});
            }
            std::sort(keyed.begin(), keyed.end());
            std::vector<std::vector<int>> groups;
            std::vector<int> levels;
            for (const auto& [key, lv] : keyed) {
              groups.push_back(by_level[lv]);
              levels.push_back(lv);
            }
            try_partition(best, f, rows, node_impurity, groups, true, levels);
          }
        } else {
          std::vector<std::pair<double, int>> keyed;
          for (const auto& [lv, lr] : by_level) {
            double s = 0, total = 0;
            for (int i : lr) {
              total += w[i];
              if (classif())
                s += ycls[i] == 0 ? w[i] : 0.0;
              else
                s += w[i] * ynum[i];
            }
            keyed.push_back({total > 0 ? s / total : 0.0, lv});
          }
          std::sort(keyed.begin(), keyed.end());
          std::vector<std::vector<int>> groups;
          std::vector<int> levels;
          for (const auto& [key, lv] : keyed) {
            groups.push_back(by_level[lv]);
            levels.push_back(lv);
          }
          try_partition(best, f, rows, node_impurity, groups, true, levels);
        }
      } else {
        std::vector<int> sorted = rows;
        std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
          if (x.at(a, f) != x.at(b, f)) return x.at(a, f) < x.at(b, f);
          return a < b;
        });
        std::vector<std::vector<int>> groups;
        for (int i : sorted) {
          if (groups.empty() ||
              x.at(groups.back().front(), f) != x.at(i, f))
            groups.push_back({});
          groups.back().push_back(i);
        }
        if (groups.size() < 2) continue;
        try_partition(best, f, rows, node_impurity, groups, false, {});
      }
    }
    return best;
  }

  int build(const std::vector<int>& rows, int depth) {
    std::vector<double> counts;
    double mean = 0, weight = 0;
    const double imp = impurity(rows, &counts, &mean, &weight);
    CartNode node;
    node.class_counts = counts;
    node.value = mean;
    const int idx = static_cast<int>(st->nodes.size());
    st->nodes.push_back(node);
    if (depth >= maxdepth || weight < minsplit || imp <= 0) return idx;
    Split sp = best_split(rows, imp);
    if (sp.feature < 0) return idx;
    st->importance[st->features[sp.feature]] += sp.gain;
    st->nodes[idx].feature = sp.feature;
    st->nodes[idx].threshold = sp.threshold;
    st->nodes[idx].left_cats = sp.left_cats;
    const int l = build(sp.left_rows, depth + 1);
    const int r = build(sp.right_rows, depth + 1);
    st->nodes[idx].left = l;
    st->nodes[idx].right = r;
    return idx;
  }
};

std::any cart_fit(const Learner& lrn, const Task& task,
                  const std::vector<double>& weights, Rng&) {
  const auto names = task.feature_names();
  const Dataset feats = task.data.select_cols(names);
  const Matrix x = to_matrix(feats);
  std::vector<ColKind> kinds;
  for (const auto& c : feats.columns) kinds.push_back(c.kind);
  const auto w = unit_weights(task.n_rows(), weights);

  std::vector<int> ycls;
  std::vector<double> ynum;
  int n_classes = 0;
  if (task.kind == TaskKind::Classif) {
    ycls = target_codes(task);
    n_classes = task.n_classes();
  } else {
    ynum = task.target_col().values;
  }

  auto st = std::make_shared<CartState>();
  st->kinds = kinds;
  st->features = names;
  st->n_classes = n_classes;
  for (const auto& n : names) st->importance[n] = 0.0;

  CartBuilder b{x,
                kinds,
                ycls,
                ynum,
                w,
                n_classes,
                lrn.par_num("minsplit"),
                lrn.par_num("minbucket"),
                lrn.par_num("cp"),
                static_cast<int>(lrn.par_int("maxdepth")),
                0.0,
                st.get()};
  std::vector<int> rows(task.n_rows());
  std::iota(rows.begin(), rows.end(), 0);
  b.root_impurity = b.impurity(rows, nullptr, nullptr, nullptr);
  b.build(rows, 0);
  return *st;
}

int cart_route(const CartState& st, const Matrix& m, int row) {
  int node = 0;
  while (st.nodes[node].feature >= 0) {
    const CartNode& nd = st.nodes[node];
    const double v = m.at(row, nd.feature);
    bool go_left;
    if (!nd.left_cats.empty()) {
      const int lv = static_cast<int>(v);
      go_left = lv >= 0 && lv < static_cast<int>(nd.left_cats.size()) &&
                nd.left_cats[lv] != 0;
    } else {
      go_left = v < nd.threshold;
    }
    node = go_left ? nd.left : nd.right;
  }
  return node;
}

RawPrediction cart_classif_predict(const Learner&, const WrappedModel& model,
                                   const Dataset& nd, Rng&) {
  const auto& st = std::any_cast<const CartState&>(model.state);
  const Matrix m = to_matrix(nd);
  RawPrediction raw;
  raw.prob = Matrix(m.rows, st.n_classes);
  raw.response_cls.resize(m.rows);
  for (int i = 0; i < m.rows; ++i) {
    const CartNode& leaf = st.nodes[cart_route(st, m, i)];
    double total = 0;
    for (double c : leaf.class_counts) total += c;
    for (int c = 0; c < st.n_classes; ++c)
      raw.prob.at(i, c) = total > 0 ? leaf.class_counts[c] / total : 0.0;
    std::vector<double> probs(raw.prob.row(i));
    raw.response_cls[i] = argmax_lowest(probs);
  }
  return raw;
}

RawPrediction cart_regr_predict(const Learner&, const WrappedModel& model,
                                const Dataset& nd, Rng&) {
  const auto& st = std::any_cast<const CartState&>(model.state);
  const Matrix m = to_matrix(nd);
  RawPrediction raw;
  raw.response_num.resize(m.rows);
  for (int i = 0; i < m.rows; ++i)
    raw.response_num[i] = st.nodes[cart_route(st, m, i)].value;
  return raw;
}

std::map<std::string, double> cart_featimp(const Learner&,
                                           const WrappedModel& model) {
  const auto& st = std::any_cast<const CartState&>(model.state);
  return st.importance;
}

// ---------- ols ----------

struct OlsState {
  std::vector<double> beta;  // intercept first
};

std::any ols_fit(const Learner&, const Task& task,
                 const std::vector<double>& weights, Rng&) {
  const Matrix xm = feature_matrix(task);
  const auto& tc = task.target_col();
  const auto w = unit_weights(task.n_rows(), weights);
  const int n = xm.rows, p = xm.cols;
  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double sw = std::sqrt(w[i]);
    x(i, 0) = sw;
    for (int j = 0; j < p; ++j) x(i, j + 1) = sw * xm.at(i, j);
    y(i) = sw * tc.values[i];
  }
  const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  OlsState st;
  st.beta.assign(beta.data(), beta.data() + p + 1);
  return st;
}

RawPrediction ols_predict(const Learner&, const WrappedModel& model,
                          const Dataset& nd, Rng&) {
  const auto& st = std::any_cast<const OlsState&>(model.state);
  const Matrix m = to_matrix(nd);
  RawPrediction raw;
  raw.response_num.resize(m.rows);
  for (int i = 0; i < m.rows; ++i) {
    double v = st.beta[0];
    for (int j = 0; j < m.cols; ++j) v += st.beta[j + 1] * m.at(i, j);
    raw.response_num[i] = v;
  }
  return raw;
}

// ---------- kmeans ----------

struct KmeansState {
  Matrix centers;
};

double sq_dist_to(const Matrix& a, int ra, const Matrix& b, int rb) {
  double s = 0;
  for (int c = 0; c < a.cols; ++c) {
    const double d = a.at(ra, c) - b.at(rb, c);
    s += d * d;
  }
  return s;
}

struct LloydResult {
  Matrix centers;
  double wss = kInf;
};

LloydResult kmeans_once(const Matrix& x, int k, int max_iter, Rng& rng) {
  const int n = x.rows, p = x.cols;
  Matrix centers(k, p);
  // k-means++ seeding
  std::vector<int> chosen;
  chosen.push_back(static_cast<int>(rng.unif_int(0, n - 1)));
  std::vector<double> d2(n, kInf);
  while (static_cast<int>(chosen.size()) < k) {
    const int last = chosen.back();
    double total = 0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist_to(x, i, x, last));
      total += d2[i];
    }
    int pick;
    if (total <= 0) {
      pick = static_cast<int>(rng.unif_int(0, n - 1));
    } else {
      const double u = rng.unif() * total;
      double acc = 0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
  }
  for (int g = 0; g < k; ++g)
    for (int c = 0; c < p; ++c) centers.at(g, c) = x.at(chosen[g], c);

  std::vector<int> assign(n, -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist_to(x, i, centers, 0);
      for (int g = 1; g < k; ++g) {
        const double d = sq_dist_to(x, i, centers, g);
        if (d < bd) {
          bd = d;
          best = g;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && it > 0) break;
    Matrix sums(k, p);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      counts[assign[i]] += 1;
      for (int c = 0; c < p; ++c) sums.at(assign[i], c) += x.at(i, c);
    }
    for (int g = 0; g < k; ++g) {
      if (counts[g] == 0) {
        // re-seed an empty cluster from the point farthest to its centroid
        int far = 0;
        double fd = -1;
        for (int i = 0; i < n; ++i) {
          const double d = sq_dist_to(x, i, centers, assign[i]);
          if (d > fd && counts[assign[i]] > 1) {
            fd = d;
            far = i;
          }
        }
        for (int c = 0; c < p; ++c) centers.at(g, c) = x.at(far, c);
        counts[assign[far]] -= 1;
        assign[far] = g;
        counts[g] = 1;
        continue;
      }
      for (int c = 0; c < p; ++c) centers.at(g, c) = sums.at(g, c) / counts[g];
    }
  }
  double wss = 0;
  for (int i = 0; i < n; ++i) wss += sq_dist_to(x, i, centers, assign[i]);
  return {centers, wss};
}

std::any kmeans_fit(const Learner& lrn, const Task& task,
                    const std::vector<double>&, Rng& rng) {
  const Matrix x = feature_matrix(task);
  const int k = static_cast<int>(lrn.par_int("centers"));
  const int max_iter = static_cast<int>(lrn.par_int("max_iter"));
  const int nstart = static_cast<int>(lrn.par_int("nstart"));
  if (k > x.rows)
    throw LearnerError("kmeans: more centers than observations");
  LloydResult best;
  for (int s = 0; s < nstart; ++s) {
    LloydResult r = kmeans_once(x, k, max_iter, rng);
    if (r.wss < best.wss) best = std::move(r);
  }
  return KmeansState{best.centers};
}

RawPrediction kmeans_predict(const Learner&, const WrappedModel& model,
                             const Dataset& nd, Rng&) {
  const auto& st = std::any_cast<const KmeansState&>(model.state);
  const Matrix m = to_matrix(nd);
  const int k = st.centers.rows;
  RawPrediction raw;
  raw.response_cls.resize(m.rows);
  raw.prob = Matrix(m.rows, k);
  raw.levels.resize(k);
  for (int g = 0; g < k; ++g) raw.levels[g] = std::to_string(g + 1);
  for (int i = 0; i < m.rows; ++i) {
    std::vector<double> d(k);
    int zero_at = -1;
    for (int g = 0; g < k; ++g) {
      d[g] = sq_dist_to(m, i, st.centers, g);
      if (d[g] == 0 && zero_at < 0) zero_at = g;
    }
    int best = 0;
    for (int g = 1; g < k; ++g)
      if (d[g] < d[best]) best = g;
    raw.response_cls[i] = best;
    if (zero_at >= 0) {
      for (int g = 0; g < k; ++g) raw.prob.at(i, g) = g == zero_at ? 1.0 : 0.0;
    } else {
      double total = 0;
      for (int g = 0; g < k; ++g) total += 1.0 / d[g];
      for (int g = 0; g < k; ++g) raw.prob.at(i, g) = (1.0 / d[g]) / total;
    }
  }
  return raw;
}

// ---------- registration ----------

Learner proto(const std::string& class_name, TaskKind kind,
              std::set<std::string> props, ParamSet ps,
              decltype(Learner::fit) fit, decltype(Learner::predict) predict,
              decltype(Learner::featimp) featimp = nullptr) {
  Learner l;
  l.id = class_name;
  l.class_name = class_name;
  l.kind = kind;
  l.properties = std::move(props);
  l.param_set = std::move(ps);
  l.fit = std::move(fit);
  l.predict = std::move(predict);
  l.featimp = std::move(featimp);
  return l;
}

ParamSet cart_params() {
  ParamSet ps;
  ps.add(make_integer_param("minsplit", 1, 1000000000, 20));
  ps.add(make_integer_param("minbucket", 1, 1000000000, 7));
  ps.add(make_integer_param("maxdepth", 1, 30, 30));
  ps.add(make_numeric_param("cp", 0.0, 1.0, 0.01));
  return ps;
}

}  // namespace

void register_builtin_learners() {
  static const bool done = [] {
    {
      ParamSet ps;
      register_learner_raw(proto(
          "classif.featureless", TaskKind::Classif,
          {"numerics", "factors", "missings", "weights", "prob", "twoclass",
           "multiclass"},
          ps, featureless_classif_fit, featureless_classif_predict));
    }
    {
      ParamSet ps;
      register_learner_raw(
          proto("regr.featureless", TaskKind::Regr,
                {"numerics", "factors", "missings", "weights"}, ps,
                featureless_regr_fit, featureless_regr_predict));
    }
    {
      ParamSet ps;
      ps.add(make_integer_param("k", 1, 1000000000, 5));
      register_learner_raw(
          proto("classif.knn", TaskKind::Classif,
                {"numerics", "prob", "twoclass", "multiclass"}, ps, knn_fit,
                knn_classif_predict));
    }
    {
      ParamSet ps;
      ps.add(make_integer_param("k", 1, 1000000000, 5));
      register_learner_raw(proto("regr.knn", TaskKind::Regr, {"numerics"}, ps,
                                 knn_fit, knn_regr_predict));
    }
    {
      ParamSet ps;
      ps.add(make_numeric_param("ridge", 0.0, kInf, 1e-8));
      register_learner_raw(
          proto("classif.lda", TaskKind::Classif,
                {"numerics", "prob", "twoclass", "multiclass"}, ps, lda_fit,
                lda_predict));
    }
    {
      ParamSet ps;
      ps.add(make_integer_param("max_iter", 1, 1000000, 50));
      ps.add(make_numeric_param("tol", 0.0, 1.0, 1e-8));
      register_learner_raw(
          proto("classif.logreg", TaskKind::Classif,
                {"numerics", "weights", "prob", "twoclass"}, ps, logreg_fit,
                logreg_predict));
    }
    register_learner_raw(proto(
        "classif.cart", TaskKind::Classif,
        {"numerics", "factors", "weights", "prob", "twoclass", "multiclass",
         "featimp"},
        cart_params(), cart_fit, cart_classif_predict, cart_featimp));
    register_learner_raw(
        proto("regr.cart", TaskKind::Regr,
              {"numerics", "factors", "weights", "featimp"}, cart_params(),
              cart_fit, cart_regr_predict, cart_featimp));
    {
      ParamSet ps;
      register_learner_raw(proto("regr.ols", TaskKind::Regr,
                                 {"numerics", "weights"}, ps, ols_fit,
                                 ols_predict));
    }
    {
      ParamSet ps;
      ps.add(make_integer_param("centers", 1, 1000000000, 2));
      ps.add(make_integer_param("max_iter", 1, 1000000000, 100));
      ps.add(make_integer_param("nstart", 1, 1000000, 1));
      register_learner_raw(proto("cluster.kmeans", TaskKind::Cluster,
                                 {"numerics", "prob"}, ps, kmeans_fit,
                                 kmeans_predict));
    }
    return true;
  }();
  (void)done;
}

}  // namespace mlkit
