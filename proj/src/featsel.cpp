#include "mlkit/featsel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "mlkit/error.hpp"
#include "mlkit/parallel.hpp"

namespace mlkit {

Table FeatSelResult::path_table() const {
  Table t;
  t.columns = feature_names;
  for (const auto& m : measure_names) t.columns.push_back(m);
  t.columns.push_back("dob");
  t.columns.push_back("error.message");
  t.columns.push_back("exec.time");
  for (const auto& r : rows) {
    auto& row = t.add_row();
    int c = 0;
    for (std::uint8_t b : r.bits) row[c++] = static_cast<int>(b);
    for (double v : r.y) row[c++] = is_missing(v) ? json() : json(v);
    row[c++] = r.dob;
    row[c++] = r.error_message.empty() ? json() : json(r.error_message);
    row[c++] = r.exec_time;
  }
  return t;
}

std::string FeatSelResult::path_csv() const { return path_table().to_csv(); }

json FeatSelResult::to_json() const {
  json j;
  j["x"] = x;
  json y_j = json::object();
  for (const auto& [name, v] : y) y_j[name] = is_missing(v) ? json() : json(v);
  j["y"] = std::move(y_j);
  j["feature.names"] = feature_names;
  j["measure.names"] = measure_names;
  json rows_j = json::array();
  for (const auto& r : rows) {
    json rj;
    json bits = json::array();
    for (std::uint8_t b : r.bits) bits.push_back(static_cast<int>(b));
    rj["bits"] = std::move(bits);
    json yv = json::array();
    for (double v : r.y) yv.push_back(is_missing(v) ? json() : json(v));
    rj["y"] = std::move(yv);
    rj["dob"] = r.dob;
    rj["error.message"] = r.error_message;
    rj["exec.time"] = r.exec_time;
    rows_j.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows_j);
  j["accepted"] = accepted;
  return j;
}

FeatSelResult featsel_result_from_json(const json& j) {
  FeatSelResult r;
  r.x = j.at("x").get<std::vector<std::string>>();
  for (auto it = j.at("y").begin(); it != j.at("y").end(); ++it)
    r.y.emplace_back(it.key(),
                     it.value().is_null() ? kMissing : it.value().get<double>());
  r.feature_names = j.at("feature.names").get<std::vector<std::string>>();
  r.measure_names = j.at("measure.names").get<std::vector<std::string>>();
  for (const auto& rj : j.at("rows")) {
    FeatSelPathRow row;
    for (const auto& b : rj.at("bits"))
      row.bits.push_back(static_cast<std::uint8_t>(b.get<int>()));
    for (const auto& v : rj.at("y"))
      row.y.push_back(v.is_null() ? kMissing : v.get<double>());
    row.dob = rj.at("dob").get<int>();
    row.error_message = rj.at("error.message").get<std::string>();
    row.exec_time = rj.at("exec.time").get<double>();
    r.rows.push_back(std::move(row));
  }
  r.accepted = j.at("accepted").get<std::vector<int>>();
  return r;
}

namespace {

using Bits = std::vector<std::uint8_t>;

Task task_with_features(const Task& task, const std::vector<std::string>& feats) {
  if (feats.empty()) return drop_features(task, task.feature_names());
  return subset_task(task, {}, feats);
}

struct SubsetEvaluator {
  const LearnerPtr& learner;
  const LearnerPtr featureless;
  const Task& task;
  const ResampleInstance& instance;
  const std::vector<Measure>& measures;
  const std::vector<std::string>& features;
  Rng& rng;
  int next_dob = 1;

  // evaluates a batch of subsets; dob assignment follows batch order
  std::vector<FeatSelPathRow> eval(const std::vector<Bits>& subsets) {
    std::vector<FeatSelPathRow> out(subsets.size());
    const int base = next_dob;
    next_dob += static_cast<int>(subsets.size());
    parallel_for("selectFeatures", static_cast<int>(subsets.size()),
                 [&](int i) {
                   out[i] = eval_one(subsets[i], base + i);
                 });
    return out;
  }

  FeatSelPathRow eval_one(const Bits& bits, int dob) {
    FeatSelPathRow row;
    row.bits = bits;
    row.dob = dob;
    row.y.assign(measures.size(), kMissing);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      std::vector<std::string> feats;
      for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) feats.push_back(features[i]);
      Rng ev_rng =
          rng.child(ExecLevel::SelectFeatures, static_cast<std::uint64_t>(dob));
      ResampleOpts opts;
      opts.measures = measures;
      opts.keep_pred = false;
      // the empty subset scores as the featureless baseline
      const LearnerPtr& lrn = feats.empty() ? featureless : learner;
      Task sub = task_with_features(task, feats);
      const ResampleResult rr = resample(lrn, sub, instance, opts, ev_rng);
      for (std::size_t j = 0; j < measures.size(); ++j)
        row.y[j] = rr.aggr[j].second;
      for (const auto& msg : rr.err_msgs)
        if (!msg.empty()) {
          row.error_message = msg;
          break;
        }
    } catch (const std::exception& e) {
      row.error_message = e.what();
    }
    row.exec_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return row;
  }
};

LearnerPtr make_featureless_like(const LearnerPtr& learner,
                                 const Task& task) {
  const std::string cls = task_kind_name(task.kind) + ".featureless";
  if (!learner_registered(cls))
    throw ValueError("empty feature sets need a " + cls + " baseline");
  LearnerPtr fl = make_learner(cls);
  if (learner->predict_type != fl->predict_type) {
    if (learner->predict_type == PredictType::Prob)
      fl = set_predict_type(fl, PredictType::Prob);
    else if (learner->predict_type == PredictType::SE)
      fl = set_predict_type(fl, PredictType::SE);
  }
  return fl;
}

int best_of(const std::vector<FeatSelPathRow>& rows, bool minimize) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    if (is_missing(rows[i].y[0])) continue;
    if (best < 0 || (minimize ? rows[i].y[0] < rows[best].y[0]
                              : rows[i].y[0] > rows[best].y[0]))
      best = i;
  }
  return best;
}

}  // namespace

FeatSelResult select_features(const LearnerPtr& learner, const Task& task,
                              const ResampleDesc& desc,
                              const FeatSelControl& control,
                              std::vector<Measure> measures, Rng rng) {
  if (measures.empty()) measures.push_back(get_default_measure(task));
  const std::vector<std::string> features = task.feature_names();
  const int p = static_cast<int>(features.size());
  const bool minimize = measures[0].minimize;

  const ResampleInstance instance =
      make_resample_instance(desc, task, rng.child(ExecLevel::Instance, 0));

  FeatSelResult res;
  res.feature_names = features;
  for (const auto& m : measures) res.measure_names.push_back(m.aggr_name());

  SubsetEvaluator ev{learner,
                     make_featureless_like(learner, task),
                     task,
                     instance,
                     measures,
                     features,
                     rng};

  if (control.method == "exhaustive") {
    if (p > 25)
      throw ValueError("exhaustive search is limited to 25 features");
    std::vector<Bits> subsets;
    const std::uint64_t total = 1ULL << p;
    for (std::uint64_t s = 0; s < total; ++s) {
      Bits b(p, 0);
      int on = 0;
      for (int j = 0; j < p; ++j)
        if (s >> j & 1ULL) {
          b[j] = 1;
          ++on;
        }
      if (control.max_features && on > *control.max_features) continue;
      subsets.push_back(std::move(b));
    }
    res.rows = ev.eval(subsets);
  } else if (control.method == "random") {
    Rng drng = rng.child(ExecLevel::Unit, 0);
    std::vector<Bits> subsets;
    for (int it = 0; it < control.maxit; ++it) {
      Bits b(p, 0);
      int on = 0;
      for (int j = 0; j < p; ++j)
        if (drng.unif() < control.prob) {
          b[j] = 1;
          ++on;
        }
      if (control.max_features && on > *control.max_features) {
        // trim uniformly down to the cap
        std::vector<int> onidx;
        for (int j = 0; j < p; ++j)
          if (b[j]) onidx.push_back(j);
        drng.shuffle(onidx);
        for (int k = *control.max_features; k < on; ++k) b[onidx[k]] = 0;
      }
      subsets.push_back(std::move(b));
    }
    res.rows = ev.eval(subsets);
  } else if (control.method == "sequential") {
    const bool forward = control.seq_method == "sfs";
    if (!forward && control.seq_method != "sbs")
      throw ValueError("seq_method must be sfs or sbs");
    Bits current(p, forward ? 0 : 1);
    auto init_rows = ev.eval({current});
    res.rows = init_rows;
    res.accepted = {0};
    double best_y = res.rows[0].y[0];
    while (true) {
      int on = static_cast<int>(
          std::count(current.begin(), current.end(), std::uint8_t(1)));
      if (forward && control.max_features && on >= *control.max_features)
        break;
      if (!forward && on == 0) break;
      std::vector<Bits> cands;
      std::vector<int> flipped;
      for (int j = 0; j < p; ++j) {
        if (current[j] == (forward ? 1 : 0)) continue;
        Bits b = current;
        b[j] = forward ? 1 : 0;
        cands.push_back(std::move(b));
        flipped.push_back(j);
      }
      if (cands.empty()) break;
      const int row0 = static_cast<int>(res.rows.size());
      auto batch = ev.eval(cands);
      for (auto& r : batch) res.rows.push_back(std::move(r));
      std::vector<FeatSelPathRow> view(res.rows.begin() + row0,
                                       res.rows.end());
      const int bi = best_of(view, minimize);
      if (bi < 0) break;
      const double cand_y = view[bi].y[0];
      const double delta = minimize ? best_y - cand_y : cand_y - best_y;
      const bool forced = !forward && control.max_features &&
                          on > *control.max_features;
      if (forward ? delta < control.alpha
                  : (-delta >= control.beta && !forced))
        break;
      current = view[bi].bits;
      best_y = cand_y;
      res.accepted.push_back(row0 + bi);
    }
    res.x.clear();
    for (int j = 0; j < p; ++j)
      if (current[j]) res.x.push_back(features[j]);
    const auto& final_row = res.rows[res.accepted.back()];
    for (std::size_t j = 0; j < measures.size(); ++j)
      res.y.emplace_back(res.measure_names[j], final_row.y[j]);
    return res;
  } else {
    throw ValueError("unknown feature-selection method: " + control.method);
  }

  const int bi = best_of(res.rows, minimize);
  const int chosen = bi < 0 ? 0 : bi;
  for (int j = 0; j < p; ++j)
    if (res.rows[chosen].bits[j]) res.x.push_back(features[j]);
  for (std::size_t j = 0; j < measures.size(); ++j)
    res.y.emplace_back(res.measure_names[j], res.rows[chosen].y[j]);
  return res;
}

namespace {

struct FeatSelWrapperState {
  ModelPtr inner;
  FeatSelResult result;
};

}  // namespace

LearnerPtr make_featsel_wrapper(const LearnerPtr& learner,
                                const ResampleDesc& desc,
                                const FeatSelControl& control,
                                std::vector<Measure> measures) {
  Learner w = *learner;
  w.id = learner->id + ".featsel";
  w.class_name = learner->class_name + ".featsel";
  w.next = learner;
  w.hyperpars = {};
  w.fit = [desc, control, measures](const Learner& lrn, const Task& task,
                                    const std::vector<double>& weights,
                                    Rng& rng) -> std::any {
    LearnerPtr inner = lrn.next;
    if (!lrn.hyperpars.empty()) inner = set_hyperpars(inner, lrn.hyperpars);
    if (inner->predict_type != lrn.predict_type)
      inner = set_predict_type(inner, lrn.predict_type);
    FeatSelResult fr = select_features(inner, task, desc, control, measures,
                                       rng.child(ExecLevel::Unit, 0));
    const LearnerPtr fitter =
        fr.x.empty() ? make_featureless_like(inner, task) : inner;
    ModelPtr m = train(fitter, task_with_features(task, fr.x), {}, weights,
                       rng.child(ExecLevel::Unit, 1));
    if (is_failure_model(m)) throw std::runtime_error(get_failure_message(*m));
    return FeatSelWrapperState{std::move(m), std::move(fr)};
  };
  w.predict = [](const Learner&, const WrappedModel& model,
                 const Dataset& newdata, Rng& rng) {
    const auto& st = std::any_cast<const FeatSelWrapperState&>(model.state);
    return raw_predict(*st.inner, newdata, rng);
  };
  w.featimp = [](const Learner&, const WrappedModel& model) {
    const auto& st = std::any_cast<const FeatSelWrapperState&>(model.state);
    return get_feature_importance(st.inner);
  };
  return std::make_shared<Learner>(std::move(w));
}

FeatSelResult get_featsel_result(const ModelPtr& model) {
  if (!model) throw ValueError("null model");
  const auto* st = std::any_cast<FeatSelWrapperState>(&model->state);
  if (st == nullptr)
    throw ValueError("model was not trained by a feature-selection wrapper");
  return st->result;
}

std::string analyze_featsel_result(const FeatSelResult& result) {
  std::ostringstream os;
  os << "Features         : " << result.x.size() << "\n";
  os << "Performance      : ";
  for (std::size_t j = 0; j < result.y.size(); ++j) {
    if (j) os << ", ";
    os << result.y[j].first << "=" << format_number(result.y[j].second);
  }
  os << "\n";
  if (!result.x.empty()) {
    os << "Selected         : ";
    for (std::size_t j = 0; j < result.x.size(); ++j) {
      if (j) os << ", ";
      os << result.x[j];
    }
    os << "\n";
  }
  if (result.accepted.empty()) return os.str();

  os << "\nPath to optimum:\n";
  const auto& rows = result.rows;
  double prev = kMissing;
  for (std::size_t s = 0; s < result.accepted.size(); ++s) {
    const auto& row = rows[result.accepted[s]];
    const int on = static_cast<int>(
        std::count(row.bits.begin(), row.bits.end(), std::uint8_t(1)));
    os << "- Features: " << on << "  ";
    if (s == 0) {
      os << "Init   : ";
    } else {
      const auto& prev_bits = rows[result.accepted[s - 1]].bits;
      std::string name = "?";
      bool added = false;
      for (std::size_t j = 0; j < row.bits.size(); ++j)
        if (row.bits[j] != prev_bits[j]) {
          name = result.feature_names[j];
          added = row.bits[j] == 1;
        }
      os << (added ? "Add    : " : "Remove : ") << name << "  ";
    }
    os << "Perf = " << format_number(row.y[0]);
    os << "  Diff: "
       << (s == 0 ? "NA" : format_number(prev - row.y[0]));
    os << "\n";
    prev = row.y[0];
  }
  return os.str();
}

}  // namespace mlkit
