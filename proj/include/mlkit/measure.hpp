#pragma once

#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mlkit/prediction.hpp"
#include "mlkit/task.hpp"

namespace mlkit {

struct WrappedModel;
struct Measure;

struct Aggregation {
  std::string id;
  std::string name;
  std::set<std::string> properties;  // req.test, req.train
  std::function<double(const Measure&, const std::vector<double>& perf_test,
                       const std::vector<double>& perf_train,
                       const Prediction* pred)>
      fn;
};

struct Measure {
  std::string id;
  std::string name;
  std::set<std::string> properties;
  bool minimize = true;
  double best = 0.0;
  double worst = 1.0;
  std::function<double(const Task*, const WrappedModel*, const Prediction&)>
      fn;
  Aggregation aggr;
  json extra;  // e.g. the cost matrix of a cost measure

  bool has_property(const std::string& p) const {
    return properties.count(p) > 0;
  }
  std::string aggr_name() const { return id + "." + aggr.id; }
};

struct PerfValues {
  std::vector<std::pair<std::string, double>> values;

  double at(const std::string& id) const;
  bool has(const std::string& id) const;
};

PerfValues performance(const Prediction& pred,
                       const std::vector<Measure>& measures,
                       const Task* task = nullptr,
                       const WrappedModel* model = nullptr);
double performance(const Prediction& pred, const Measure& measure,
                   const Task* task = nullptr,
                   const WrappedModel* model = nullptr);

Aggregation get_aggregation(const std::string& id);
Measure set_aggregation(Measure measure, const Aggregation& aggr);
Measure set_aggregation(Measure measure, const std::string& aggr_id);

Measure make_measure(
    const std::string& id, const std::set<std::string>& properties,
    bool minimize, double best, double worst,
    std::function<double(const Task*, const WrappedModel*, const Prediction&)>
        fn);
Measure make_cost_measure(const Matrix& costs,
                          const std::vector<std::string>& class_levels,
                          double best, double worst,
                          const std::string& id = "costs");
void register_measure(const Measure& measure);

Measure get_measure(const std::string& id);
bool measure_registered(const std::string& id);
Measure get_default_measure(TaskKind kind);
Measure get_default_measure(const Task& task);

std::vector<Measure> list_measures(const std::set<std::string>& properties = {});
std::vector<Measure> list_measures(const Task& task);

}  // namespace mlkit
