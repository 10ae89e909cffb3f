#include "mlkit/benchmark.hpp"

#include <algorithm>
#include <set>

#include "mlkit/error.hpp"
#include "mlkit/parallel.hpp"
#include "mlkit/wrappers.hpp"

namespace mlkit {

namespace {

json cell_value(double v) { return is_missing(v) ? json() : json(v); }

bool keep_id(const std::vector<std::string>& wanted, const std::string& id) {
  return wanted.empty() ||
         std::find(wanted.begin(), wanted.end(), id) != wanted.end();
}

// best-effort wrapper-result extraction used when no extractor is given
json default_bmr_extract(const ModelPtr& m) {
  try {
    return get_tune_result(m).to_json();
  } catch (const std::exception&) {
  }
  try {
    return get_featsel_result(m).to_json();
  } catch (const std::exception&) {
  }
  return json();
}

void check_same_measures(const BenchmarkResult& a, const BenchmarkResult& b) {
  bool ok = a.measures.size() == b.measures.size();
  for (std::size_t i = 0; ok && i < a.measures.size(); ++i)
    ok = a.measures[i].aggr_name() == b.measures[i].aggr_name();
  if (!ok) throw ValueError("benchmark results measure different things");
}

}  // namespace

const ResampleResult& BenchmarkResult::at(const std::string& task_id,
                                          const std::string& learner_id) const {
  const auto t = results.find(task_id);
  if (t == results.end()) throw ValueError("no benchmark task: " + task_id);
  const auto l = t->second.find(learner_id);
  if (l == t->second.end())
    throw ValueError("no benchmark learner: " + learner_id);
  return l->second;
}

Table BenchmarkResult::aggr_table() const {
  Table t;
  t.columns = {"task.id", "learner.id"};
  for (const auto& m : measures) t.columns.push_back(m.aggr_name());
  for (const auto& tid : task_ids) {
    for (const auto& lid : learner_ids) {
      const ResampleResult& rr = at(tid, lid);
      auto& row = t.add_row();
      int c = 0;
      row[c++] = tid;
      row[c++] = lid;
      for (const auto& [name, v] : rr.aggr) {
        (void)name;
        row[c++] = cell_value(v);
      }
    }
  }
  return t;
}

json BenchmarkResult::to_json() const {
  json j;
  j["task.ids"] = task_ids;
  j["learner.ids"] = learner_ids;
  json ms = json::array();
  for (const auto& m : measures) {
    json mj;
    mj["id"] = m.id;
    mj["aggr"] = m.aggr.id;
    mj["minimize"] = m.minimize;
    ms.push_back(std::move(mj));
  }
  j["measures"] = std::move(ms);
  json res = json::object();
  for (const auto& tid : task_ids) {
    json per_task = json::object();
    for (const auto& lid : learner_ids) {
      const ResampleResult& rr = at(tid, lid);
      json cj;
      json aggr = json::object();
      for (const auto& [name, v] : rr.aggr) aggr[name] = cell_value(v);
      cj["aggr"] = std::move(aggr);
      auto dump_perf = [](const std::vector<std::vector<double>>& perf) {
        json rows = json::array();
        for (const auto& row : perf) {
          json r = json::array();
          for (double v : row) r.push_back(cell_value(v));
          rows.push_back(std::move(r));
        }
        return rows;
      };
      cj["perf.test"] = dump_perf(rr.perf_test);
      cj["perf.train"] = dump_perf(rr.perf_train);
      cj["err.msgs"] = rr.err_msgs;
      cj["runtime"] = rr.runtime;
      bool any_extract = false;
      for (const auto& e : rr.extracts) any_extract |= !e.is_null();
      if (any_extract) cj["extracts"] = rr.extracts;
      per_task[lid] = std::move(cj);
    }
    res[tid] = std::move(per_task);
  }
  j["results"] = std::move(res);
  return j;
}

BenchmarkResult benchmark_result_from_json(const json& j) {
  BenchmarkResult bmr;
  bmr.task_ids = j.at("task.ids").get<std::vector<std::string>>();
  bmr.learner_ids = j.at("learner.ids").get<std::vector<std::string>>();
  for (const auto& mj : j.at("measures")) {
    const std::string id = mj.at("id").get<std::string>();
    Measure m;
    if (measure_registered(id)) {
      m = get_measure(id);
    } else {
      m.id = id;
      m.name = id;
    }
    m.minimize = mj.at("minimize").get<bool>();
    m = set_aggregation(std::move(m), mj.at("aggr").get<std::string>());
    bmr.measures.push_back(std::move(m));
  }
  for (const auto& tid : bmr.task_ids) {
    for (const auto& lid : bmr.learner_ids) {
      const json& cj = j.at("results").at(tid).at(lid);
      ResampleResult rr;
      rr.task_id = tid;
      rr.learner_id = lid;
      rr.measures = bmr.measures;
      for (const auto& m : bmr.measures) {
        const auto& v = cj.at("aggr").at(m.aggr_name());
        rr.aggr.push_back({m.aggr_name(), v.is_null() ? kMissing
                                                      : v.get<double>()});
      }
      auto load_perf = [](const json& rows) {
        std::vector<std::vector<double>> perf;
        for (const auto& r : rows) {
          std::vector<double> row;
          for (const auto& v : r)
            row.push_back(v.is_null() ? kMissing : v.get<double>());
          perf.push_back(std::move(row));
        }
        return perf;
      };
      rr.perf_test = load_perf(cj.at("perf.test"));
      rr.perf_train = load_perf(cj.at("perf.train"));
      rr.err_msgs = cj.at("err.msgs").get<std::vector<std::string>>();
      rr.runtime = cj.at("runtime").get<double>();
      if (cj.contains("extracts"))
        rr.extracts = cj.at("extracts").get<std::vector<json>>();
      bmr.results[tid][lid] = std::move(rr);
    }
  }
  return bmr;
}

BenchmarkResult benchmark(const std::vector<LearnerPtr>& learners,
                          const std::vector<Task>& tasks,
                          const std::vector<ResampleInstance>& instances,
                          const BenchmarkOpts& opts, Rng rng) {
  if (learners.empty()) throw ValueError("benchmark needs at least one learner");
  if (tasks.empty()) throw ValueError("benchmark needs at least one task");
  if (instances.size() != tasks.size())
    throw ValueError("benchmark needs one resampling per task");
  std::set<std::string> seen;
  for (const auto& l : learners) {
    if (!l) throw ValueError("benchmark: learner is null");
    if (!seen.insert(l->id).second)
      throw ValueError("duplicate learner id: " + l->id);
  }
  seen.clear();
  for (const auto& t : tasks)
    if (!seen.insert(t.id).second)
      throw ValueError("duplicate task id: " + t.id);
  for (const auto& t : tasks)
    for (const auto& l : learners)
      if (l->kind != t.kind)
        throw LearnerError("learner " + l->id + " (" +
                           task_kind_name(l->kind) + ") does not match task " +
                           t.id + " (" + task_kind_name(t.kind) + ")");

  BenchmarkResult bmr;
  for (const auto& t : tasks) bmr.task_ids.push_back(t.id);
  for (const auto& l : learners) bmr.learner_ids.push_back(l->id);
  bmr.measures = opts.measures.empty()
                     ? std::vector<Measure>{get_default_measure(tasks[0])}
                     : opts.measures;

  ResampleOpts ropts;
  ropts.measures = bmr.measures;
  ropts.keep_pred = opts.keep_pred;
  ropts.models = opts.models;
  ropts.extract = opts.extract;
  ropts.extract_fn = opts.extract_fn;
  if (!ropts.extract_fn && ropts.extract.empty())
    ropts.extract_fn = default_bmr_extract;

  const int T = static_cast<int>(tasks.size());
  const int L = static_cast<int>(learners.size());
  std::vector<ResampleResult> cells(static_cast<std::size_t>(T) * L);
  parallel_for("benchmark", T * L, [&](int p) {
    const int t = p / L, l = p % L;
    cells[p] = resample(learners[l], tasks[t], instances[t], ropts,
                        rng.child(ExecLevel::Benchmark,
                                  static_cast<std::uint64_t>(p)));
  });
  for (int t = 0; t < T; ++t)
    for (int l = 0; l < L; ++l)
      bmr.results[tasks[t].id][learners[l]->id] =
          std::move(cells[static_cast<std::size_t>(t) * L + l]);
  return bmr;
}

BenchmarkResult benchmark(const std::vector<LearnerPtr>& learners,
                          const std::vector<Task>& tasks,
                          const std::vector<ResampleDesc>& descs,
                          const BenchmarkOpts& opts, Rng rng) {
  if (descs.size() != tasks.size() && descs.size() != 1)
    throw ValueError("benchmark needs one resampling desc, or one per task");
  std::vector<ResampleInstance> instances;
  instances.reserve(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const ResampleDesc& d = descs[descs.size() == 1 ? 0 : t];
    instances.push_back(make_resample_instance(
        d, tasks[t], rng.child(ExecLevel::Instance, t)));
  }
  return benchmark(learners, tasks, instances, opts, rng);
}

BenchmarkResult benchmark(const std::vector<LearnerPtr>& learners,
                          const std::vector<Task>& tasks,
                          const ResampleDesc& desc, const BenchmarkOpts& opts,
                          Rng rng) {
  return benchmark(learners, tasks, std::vector<ResampleDesc>{desc}, opts,
                   rng);
}

Table get_bmr_performances(const BenchmarkResult& bmr,
                           const BmrFilter& filter) {
  Table t;
  t.columns = {"task.id", "learner.id", "iter"};
  for (const auto& m : bmr.measures) t.columns.push_back(m.id);
  for (const auto& tid : bmr.task_ids) {
    if (!keep_id(filter.task_ids, tid)) continue;
    for (const auto& lid : bmr.learner_ids) {
      if (!keep_id(filter.learner_ids, lid)) continue;
      const ResampleResult& rr = bmr.at(tid, lid);
      for (std::size_t i = 0; i < rr.perf_test.size(); ++i) {
        auto& row = t.add_row();
        int c = 0;
        row[c++] = tid;
        row[c++] = lid;
        row[c++] = static_cast<int>(i) + 1;
        for (double v : rr.perf_test[i]) row[c++] = cell_value(v);
      }
    }
  }
  return t;
}

Table get_bmr_aggr_performances(const BenchmarkResult& bmr,
                                const BmrFilter& filter) {
  Table t;
  t.columns = {"task.id", "learner.id"};
  for (const auto& m : bmr.measures) t.columns.push_back(m.aggr_name());
  for (const auto& tid : bmr.task_ids) {
    if (!keep_id(filter.task_ids, tid)) continue;
    for (const auto& lid : bmr.learner_ids) {
      if (!keep_id(filter.learner_ids, lid)) continue;
      const ResampleResult& rr = bmr.at(tid, lid);
      auto& row = t.add_row();
      int c = 0;
      row[c++] = tid;
      row[c++] = lid;
      for (const auto& [name, v] : rr.aggr) {
        (void)name;
        row[c++] = cell_value(v);
      }
    }
  }
  return t;
}

std::vector<std::tuple<std::string, std::string, Prediction>>
get_bmr_predictions(const BenchmarkResult& bmr, const BmrFilter& filter) {
  std::vector<std::tuple<std::string, std::string, Prediction>> out;
  for (const auto& tid : bmr.task_ids) {
    if (!keep_id(filter.task_ids, tid)) continue;
    for (const auto& lid : bmr.learner_ids) {
      if (!keep_id(filter.learner_ids, lid)) continue;
      const ResampleResult& rr = bmr.at(tid, lid);
      if (rr.has_pred) out.push_back({tid, lid, rr.pred});
    }
  }
  return out;
}

std::vector<std::tuple<std::string, std::string, std::vector<ModelPtr>>>
get_bmr_models(const BenchmarkResult& bmr, const BmrFilter& filter) {
  std::vector<std::tuple<std::string, std::string, std::vector<ModelPtr>>> out;
  for (const auto& tid : bmr.task_ids) {
    if (!keep_id(filter.task_ids, tid)) continue;
    for (const auto& lid : bmr.learner_ids) {
      if (!keep_id(filter.learner_ids, lid)) continue;
      const ResampleResult& rr = bmr.at(tid, lid);
      if (!rr.models.empty()) out.push_back({tid, lid, rr.models});
    }
  }
  return out;
}

std::vector<std::string> get_bmr_task_ids(const BenchmarkResult& bmr) {
  return bmr.task_ids;
}

std::vector<std::string> get_bmr_learner_ids(const BenchmarkResult& bmr) {
  return bmr.learner_ids;
}

std::vector<std::string> get_bmr_measure_ids(const BenchmarkResult& bmr) {
  std::vector<std::string> out;
  for (const auto& m : bmr.measures) out.push_back(m.id);
  return out;
}

std::vector<std::tuple<std::string, std::string, std::vector<TuneResult>>>
get_bmr_tune_results(const BenchmarkResult& bmr, const BmrFilter& filter) {
  std::vector<std::tuple<std::string, std::string, std::vector<TuneResult>>>
      out;
  for (const auto& tid : bmr.task_ids) {
    if (!keep_id(filter.task_ids, tid)) continue;
    for (const auto& lid : bmr.learner_ids) {
      if (!keep_id(filter.learner_ids, lid)) continue;
      std::vector<TuneResult> trs;
      for (const auto& e : bmr.at(tid, lid).extracts)
        if (e.is_object() && e.contains("opt.path") && e.contains("x.trafo"))
          trs.push_back(tune_result_from_json(e));
      if (!trs.empty()) out.push_back({tid, lid, std::move(trs)});
    }
  }
  return out;
}

std::vector<std::tuple<std::string, std::string, std::vector<FeatSelResult>>>
get_bmr_featsel_results(const BenchmarkResult& bmr, const BmrFilter& filter) {
  std::vector<std::tuple<std::string, std::string, std::vector<FeatSelResult>>>
      out;
  for (const auto& tid : bmr.task_ids) {
    if (!keep_id(filter.task_ids, tid)) continue;
    for (const auto& lid : bmr.learner_ids) {
      if (!keep_id(filter.learner_ids, lid)) continue;
      std::vector<FeatSelResult> frs;
      for (const auto& e : bmr.at(tid, lid).extracts)
        if (e.is_object() && e.contains("feature.names"))
          frs.push_back(featsel_result_from_json(e));
      if (!frs.empty()) out.push_back({tid, lid, std::move(frs)});
    }
  }
  return out;
}

BenchmarkResult merge_benchmark_results_learner(const BenchmarkResult& a,
                                                const BenchmarkResult& b) {
  check_same_measures(a, b);
  if (a.task_ids != b.task_ids)
    throw ValueError("learner merge needs identical task sets");
  for (const auto& lid : b.learner_ids)
    if (std::find(a.learner_ids.begin(), a.learner_ids.end(), lid) !=
        a.learner_ids.end())
      throw ValueError("learner merge with overlapping learner id: " + lid);
  BenchmarkResult out = a;
  for (const auto& lid : b.learner_ids) out.learner_ids.push_back(lid);
  for (const auto& tid : out.task_ids)
    for (const auto& lid : b.learner_ids)
      out.results[tid][lid] = b.at(tid, lid);
  return out;
}

BenchmarkResult merge_benchmark_results_task(const BenchmarkResult& a,
                                             const BenchmarkResult& b) {
  check_same_measures(a, b);
  if (a.learner_ids != b.learner_ids)
    throw ValueError("task merge needs identical learner lists");
  for (const auto& tid : b.task_ids)
    if (std::find(a.task_ids.begin(), a.task_ids.end(), tid) !=
        a.task_ids.end())
      throw ValueError("task merge with overlapping task id: " + tid);
  BenchmarkResult out = a;
  for (const auto& tid : b.task_ids) {
    out.task_ids.push_back(tid);
    out.results[tid] = b.results.at(tid);
  }
  return out;
}

}  // namespace mlkit
