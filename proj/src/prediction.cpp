#include "mlkit/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mlkit/error.hpp"

namespace mlkit {

std::string predict_type_name(PredictType t) {
  switch (t) {
    case PredictType::Response: return "response";
    case PredictType::Prob: return "prob";
    case PredictType::SE: return "se";
  }
  return "?";
}

PredictType predict_type_from_name(const std::string& name) {
  if (name == "response") return PredictType::Response;
  if (name == "prob") return PredictType::Prob;
  if (name == "se") return PredictType::SE;
  throw ValueError("unknown predict type: " + name);
}

int Prediction::n() const {
  if (!response_cls.empty()) return static_cast<int>(response_cls.size());
  if (!response_num.empty()) return static_cast<int>(response_num.size());
  if (!response_lbl.empty())
    return static_cast<int>(response_lbl.size()) / std::max(1, n_classes());
  if (!prob.empty()) return prob.rows;
  return 0;
}

bool Prediction::has_truth() const {
  return !truth_cls.empty() || !truth_num.empty() || !truth_lbl.empty();
}

int Prediction::positive_index() const {
  return level_index(positive);
}

int Prediction::level_index(const std::string& label) const {
  for (std::size_t i = 0; i < class_levels.size(); ++i)
    if (class_levels[i] == label) return static_cast<int>(i);
  return -1;
}

std::vector<double> Prediction::prob_of(const std::string& label) const {
  if (prob.empty()) throw ValueError("prediction has no probabilities");
  const int c = level_index(label);
  if (c < 0) throw ValueError("unknown class label: " + label);
  return prob.col(c);
}

Prediction Prediction::select(const std::vector<int>& positions) const {
  Prediction out = *this;
  const int L = n_classes();
  auto pick_i = [&](const std::vector<int>& src) {
    std::vector<int> dst;
    if (src.empty()) return dst;
    dst.reserve(positions.size());
    for (int p : positions) dst.push_back(src[p]);
    return dst;
  };
  auto pick_d = [&](const std::vector<double>& src) {
    std::vector<double> dst;
    if (src.empty()) return dst;
    dst.reserve(positions.size());
    for (int p : positions) dst.push_back(src[p]);
    return dst;
  };
  auto pick_b = [&](const std::vector<std::uint8_t>& src) {
    std::vector<std::uint8_t> dst;
    if (src.empty()) return dst;
    dst.reserve(positions.size());
    for (int p : positions) dst.push_back(src[p]);
    return dst;
  };
  auto pick_lbl = [&](const std::vector<std::uint8_t>& src) {
    std::vector<std::uint8_t> dst;
    if (src.empty()) return dst;
    dst.reserve(positions.size() * L);
    for (int p : positions)
      for (int l = 0; l < L; ++l) dst.push_back(src[static_cast<std::size_t>(p) * L + l]);
    return dst;
  };
  out.ids = pick_i(ids);
  out.truth_cls = pick_i(truth_cls);
  out.truth_num = pick_d(truth_num);
  out.truth_lbl = pick_lbl(truth_lbl);
  out.response_cls = pick_i(response_cls);
  out.response_num = pick_d(response_num);
  out.response_lbl = pick_lbl(response_lbl);
  out.se = pick_d(se);
  out.iters = pick_i(iters);
  out.on_train = pick_b(on_train);
  if (!prob.empty()) {
    Matrix m(static_cast<int>(positions.size()), prob.cols);
    for (std::size_t i = 0; i < positions.size(); ++i)
      for (int c = 0; c < prob.cols; ++c)
        m.at(static_cast<int>(i), c) = prob.at(positions[i], c);
    out.prob = std::move(m);
  }
  return out;
}

std::vector<int> Prediction::test_positions(int iter) const {
  std::vector<int> out;
  const int nn = n();
  for (int i = 0; i < nn; ++i) {
    if (!on_train.empty() && on_train[i]) continue;
    if (iter >= 0 && !iters.empty() && iters[i] != iter) continue;
    out.push_back(i);
  }
  return out;
}

namespace {

json cls_cell(const std::vector<std::string>& levels, int code) {
  if (code < 0) return nullptr;
  return levels[code];
}

json num_cell(double v) {
  if (is_missing(v)) return nullptr;
  return v;
}

}  // namespace

Table Prediction::as_table() const {
  Table t;
  const int nn = n();
  const int K = n_classes();
  if (!ids.empty()) t.columns.push_back("id");
  if (task_kind == TaskKind::Multilabel) {
    if (!truth_lbl.empty())
      for (const auto& l : class_levels) t.columns.push_back("truth." + l);
    if (!prob.empty())
      for (const auto& l : class_levels) t.columns.push_back("prob." + l);
    for (const auto& l : class_levels) t.columns.push_back("response." + l);
  } else {
    if (!truth_cls.empty() || !truth_num.empty()) t.columns.push_back("truth");
    t.columns.push_back("response");
    if (!prob.empty())
      for (const auto& l : class_levels) t.columns.push_back("prob." + l);
    if (!se.empty()) t.columns.push_back("se");
  }
  if (!iters.empty()) t.columns.push_back("iter");
  if (!on_train.empty()) t.columns.push_back("set");

  for (int i = 0; i < nn; ++i) {
    auto& row = t.add_row();
    int c = 0;
    if (!ids.empty()) row[c++] = ids[i];
    if (task_kind == TaskKind::Multilabel) {
      if (!truth_lbl.empty())
        for (int l = 0; l < K; ++l) {
          const auto v = truth_lbl[static_cast<std::size_t>(i) * K + l];
          row[c++] = v == 255 ? json() : json(v != 0);
        }
      if (!prob.empty())
        for (int l = 0; l < K; ++l) row[c++] = num_cell(prob.at(i, l));
      for (int l = 0; l < K; ++l) {
        const auto v = response_lbl[static_cast<std::size_t>(i) * K + l];
        row[c++] = v == 255 ? json() : json(v != 0);
      }
    } else {
      if (!truth_cls.empty())
        row[c++] = cls_cell(class_levels, truth_cls[i]);
      else if (!truth_num.empty())
        row[c++] = num_cell(truth_num[i]);
      if (!response_cls.empty())
        row[c++] = cls_cell(class_levels, response_cls[i]);
      else
        row[c++] = num_cell(response_num[i]);
      if (!prob.empty())
        for (int l = 0; l < K; ++l) row[c++] = num_cell(prob.at(i, l));
      if (!se.empty()) row[c++] = num_cell(se[i]);
    }
    if (!iters.empty()) row[c++] = iters[i];
    if (!on_train.empty()) row[c++] = on_train[i] ? "train" : "test";
  }
  return t;
}

std::string Prediction::to_csv() const { return as_table().to_csv(); }

namespace {

// Deterministic argmax of prob/threshold scores; for binary classif the
// positive class wins score ties so that "prob >= t" semantics hold.
int threshold_response(const Matrix& prob, int row,
                       const std::vector<double>& thr, int positive_idx) {
  const int K = prob.cols;
  if (K == 2 && positive_idx >= 0) {
    const double tp = thr[positive_idx];
    const double tsum = thr[0] + thr[1];
    const double cut = tsum > 0 ? tp / tsum : 0.5;
    return prob.at(row, positive_idx) >= cut ? positive_idx : 1 - positive_idx;
  }
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < K; ++c) {
    const double score = prob.at(row, c) / thr[c];
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::vector<double> default_threshold(int n_classes, int positive_index) {
  std::vector<double> t(n_classes, 1.0 / std::max(1, n_classes));
  if (n_classes == 2 && positive_index >= 0) t = {0.5, 0.5};
  return t;
}

std::vector<int> prob_to_response(const Matrix& prob,
                                  const std::vector<double>& threshold,
                                  int positive_index) {
  std::vector<int> out(prob.rows, -1);
  for (int i = 0; i < prob.rows; ++i) {
    if (is_missing(prob.at(i, 0))) continue;
    out[i] = threshold_response(prob, i, threshold, positive_index);
  }
  return out;
}

Prediction set_threshold(const Prediction& pred, const std::vector<double>& threshold) {
  if (pred.predict_type != PredictType::Prob || pred.prob.empty())
    throw ValueError("set_threshold requires a prob prediction");
  const int K = pred.n_classes();
  if (static_cast<int>(threshold.size()) != K)
    throw ValueError("threshold length must equal the number of classes");
  const bool binary = K == 2 && pred.positive_index() >= 0;
  for (double t : threshold) {
    if (is_missing(t)) throw ValueError("threshold must not be missing");
    if (!binary && t <= 0.0)
      throw ValueError("multiclass thresholds must be positive");
    if (binary && t < 0.0) throw ValueError("thresholds must be nonnegative");
  }
  Prediction out = pred;
  out.threshold = threshold;
  const int pos = pred.positive_index();
  for (int i = 0; i < pred.n(); ++i) {
    if (is_missing(pred.prob.at(i, 0))) {
      out.response_cls[i] = -1;
      continue;
    }
    out.response_cls[i] = threshold_response(pred.prob, i, threshold, pos);
  }
  return out;
}

Prediction set_threshold(const Prediction& pred, double positive_threshold) {
  const int pos = pred.positive_index();
  if (pred.n_classes() != 2 || pos < 0)
    throw ValueError("scalar threshold requires a binary prediction");
  std::vector<double> thr(2);
  thr[pos] = positive_threshold;
  thr[1 - pos] = 1.0 - positive_threshold;
  return set_threshold(pred, thr);
}

ConfusionMatrix confusion_matrix(const Prediction& pred, bool relative,
                                 bool sums) {
  if (pred.task_kind != TaskKind::Classif)
    throw ValueError("confusion matrix requires a classif prediction");
  if (pred.truth_cls.empty())
    throw ValueError("confusion matrix requires truth values");
  const int K = pred.n_classes();
  ConfusionMatrix cm;
  cm.levels = pred.class_levels;
  cm.absolute = Matrix(K, K);
  cm.relative = relative;
  cm.sums = sums;
  for (int i = 0; i < pred.n(); ++i) {
    const int t = pred.truth_cls[i];
    const int r = pred.response_cls[i];
    if (t < 0 || r < 0) continue;
    cm.absolute.at(t, r) += 1.0;
    cm.n += 1.0;
  }
  cm.err_row.assign(K, 0.0);
  cm.err_col.assign(K, 0.0);
  for (int t = 0; t < K; ++t)
    for (int r = 0; r < K; ++r)
      if (t != r) {
        cm.err_row[t] += cm.absolute.at(t, r);
        cm.err_col[r] += cm.absolute.at(t, r);
      }
  if (relative) {
    cm.relative_row = Matrix(K, K);
    cm.relative_col = Matrix(K, K);
    for (int t = 0; t < K; ++t) {
      double rs = 0.0;
      for (int r = 0; r < K; ++r) rs += cm.absolute.at(t, r);
      for (int r = 0; r < K; ++r)
        cm.relative_row.at(t, r) = rs > 0 ? cm.absolute.at(t, r) / rs : 0.0;
    }
    for (int r = 0; r < K; ++r) {
      double cs = 0.0;
      for (int t = 0; t < K; ++t) cs += cm.absolute.at(t, r);
      for (int t = 0; t < K; ++t)
        cm.relative_col.at(t, r) = cs > 0 ? cm.absolute.at(t, r) / cs : 0.0;
    }
  }
  if (sums) {
    cm.row_sums.assign(K, 0.0);
    cm.col_sums.assign(K, 0.0);
    for (int t = 0; t < K; ++t)
      for (int r = 0; r < K; ++r) {
        cm.row_sums[t] += cm.absolute.at(t, r);
        cm.col_sums[r] += cm.absolute.at(t, r);
      }
  }
  return cm;
}

std::string ConfusionMatrix::to_string() const {
  std::ostringstream os;
  const int K = static_cast<int>(levels.size());
  os << "        predicted\n";
  os << "true";
  for (const auto& l : levels) os << "  " << l;
  os << "  -err.-\n";
  for (int t = 0; t < K; ++t) {
    os << levels[t];
    for (int r = 0; r < K; ++r) os << "  " << format_number(absolute.at(t, r));
    os << "  " << format_number(err_row[t]) << "\n";
  }
  os << "-err.-";
  for (int r = 0; r < K; ++r) os << "  " << format_number(err_col[r]);
  double total_err = 0.0;
  for (double e : err_row) total_err += e;
  os << "  " << format_number(total_err) << "\n";
  return os.str();
}

RocMeasures roc_measures(const Prediction& pred) {
  if (pred.task_kind != TaskKind::Classif || pred.n_classes() != 2 ||
      pred.positive_index() < 0)
    throw ValueError("roc_measures requires a binary classif prediction");
  if (pred.truth_cls.empty()) throw ValueError("roc_measures requires truth");
  const int pos = pred.positive_index();
  double tp = 0, fn = 0, fp = 0, tn = 0;
  for (int i = 0; i < pred.n(); ++i) {
    const int t = pred.truth_cls[i];
    const int r = pred.response_cls[i];
    if (t < 0 || r < 0) continue;
    if (t == pos)
      (r == pos ? tp : fn) += 1.0;
    else
      (r == pos ? fp : tn) += 1.0;
  }
  auto ratio = [](double num, double den) {
    return den > 0 ? num / den : kMissing;
  };
  RocMeasures m{};
  m.tp = tp; m.fn = fn; m.fp = fp; m.tn = tn;
  m.tpr = ratio(tp, tp + fn);
  m.fnr = ratio(fn, tp + fn);
  m.fpr = ratio(fp, fp + tn);
  m.tnr = ratio(tn, fp + tn);
  m.ppv = ratio(tp, tp + fp);
  m.fdr = ratio(fp, tp + fp);
  m.npv = ratio(tn, tn + fn);
  m.for_ = ratio(fn, fn + tn);
  m.lrp = ratio(m.tpr, m.fpr);
  m.lrm = ratio(m.fnr, m.tnr);
  m.acc = ratio(tp + tn, tp + tn + fp + fn);
  m.dor = ratio(m.lrp, m.lrm);
  return m;
}

Table RocMeasures::as_table() const {
  Table t;
  t.columns = {"measure", "value"};
  const std::pair<const char*, double> entries[] = {
      {"tpr", tpr}, {"fnr", fnr}, {"fpr", fpr}, {"tnr", tnr},
      {"ppv", ppv}, {"for", for_}, {"fdr", fdr}, {"npv", npv},
      {"lrp", lrp}, {"lrm", lrm}, {"acc", acc}, {"dor", dor}};
  for (const auto& [name, value] : entries) {
    auto& row = t.add_row();
    row[0] = name;
    row[1] = is_missing(value) ? json() : json(value);
  }
  return t;
}

Prediction concat_predictions(const std::vector<Prediction>& parts) {
  if (parts.empty()) throw ValueError("cannot concatenate zero predictions");
  Prediction out = parts[0];
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const Prediction& q = parts[p];
    if (q.class_levels != out.class_levels || q.task_kind != out.task_kind)
      throw ValueError("prediction schemas differ; cannot concatenate");
    auto append_i = [](std::vector<int>& a, const std::vector<int>& b) {
      a.insert(a.end(), b.begin(), b.end());
    };
    auto append_d = [](std::vector<double>& a, const std::vector<double>& b) {
      a.insert(a.end(), b.begin(), b.end());
    };
    auto append_b = [](std::vector<std::uint8_t>& a,
                       const std::vector<std::uint8_t>& b) {
      a.insert(a.end(), b.begin(), b.end());
    };
    append_i(out.ids, q.ids);
    append_i(out.truth_cls, q.truth_cls);
    append_d(out.truth_num, q.truth_num);
    append_b(out.truth_lbl, q.truth_lbl);
    append_i(out.response_cls, q.response_cls);
    append_d(out.response_num, q.response_num);
    append_b(out.response_lbl, q.response_lbl);
    append_d(out.se, q.se);
    append_i(out.iters, q.iters);
    append_b(out.on_train, q.on_train);
    if (!q.prob.empty()) {
      out.prob.data.insert(out.prob.data.end(), q.prob.data.begin(),
                           q.prob.data.end());
      out.prob.rows += q.prob.rows;
    }
    if (!is_missing(q.predict_time))
      out.predict_time = (is_missing(out.predict_time) ? 0.0 : out.predict_time) +
                         q.predict_time;
  }
  return out;
}

}  // namespace mlkit
