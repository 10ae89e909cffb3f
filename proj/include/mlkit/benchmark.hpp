#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "mlkit/featsel.hpp"
#include "mlkit/resample.hpp"
#include "mlkit/tune.hpp"

namespace mlkit {

struct BenchmarkOpts {
  std::vector<Measure> measures;  // empty: default of the first task
  bool keep_pred = true;
  bool models = false;
  std::string extract;  // named extractor; default pulls tune/featsel results
  std::function<json(const ModelPtr&)> extract_fn;
};

// All learners crossed with all tasks, one shared ResampleInstance per task.
struct BenchmarkResult {
  std::vector<std::string> task_ids;     // run order
  std::vector<std::string> learner_ids;  // run order
  std::vector<Measure> measures;
  std::map<std::string, std::map<std::string, ResampleResult>> results;

  const ResampleResult& at(const std::string& task_id,
                           const std::string& learner_id) const;

  // (task.id, learner.id, <aggregated measure>...) rows in run order
  Table aggr_table() const;

  // everything except predictions and models; reloadable for the stats ops
  json to_json() const;
};

BenchmarkResult benchmark_result_from_json(const json& j);

BenchmarkResult benchmark(const std::vector<LearnerPtr>& learners,
                          const std::vector<Task>& tasks,
                          const ResampleDesc& desc,
                          const BenchmarkOpts& opts = {}, Rng rng = Rng(1));
BenchmarkResult benchmark(const std::vector<LearnerPtr>& learners,
                          const std::vector<Task>& tasks,
                          const std::vector<ResampleDesc>& descs,
                          const BenchmarkOpts& opts = {}, Rng rng = Rng(1));
BenchmarkResult benchmark(const std::vector<LearnerPtr>& learners,
                          const std::vector<Task>& tasks,
                          const std::vector<ResampleInstance>& instances,
                          const BenchmarkOpts& opts = {}, Rng rng = Rng(1));

struct BmrFilter {
  std::vector<std::string> task_ids;  // empty = all
  std::vector<std::string> learner_ids;
};

// (task.id, learner.id, iter, <measure>...) rows
Table get_bmr_performances(const BenchmarkResult& bmr,
                           const BmrFilter& filter = {});
// (task.id, learner.id, <aggregated measure>...) rows
Table get_bmr_aggr_performances(const BenchmarkResult& bmr,
                                const BmrFilter& filter = {});
std::vector<std::tuple<std::string, std::string, Prediction>>
get_bmr_predictions(const BenchmarkResult& bmr, const BmrFilter& filter = {});
std::vector<std::tuple<std::string, std::string, std::vector<ModelPtr>>>
get_bmr_models(const BenchmarkResult& bmr, const BmrFilter& filter = {});
std::vector<std::string> get_bmr_task_ids(const BenchmarkResult& bmr);
std::vector<std::string> get_bmr_learner_ids(const BenchmarkResult& bmr);
std::vector<std::string> get_bmr_measure_ids(const BenchmarkResult& bmr);
// per-iteration results extracted from tune/featsel wrappers; cells without
// any are omitted
std::vector<std::tuple<std::string, std::string, std::vector<TuneResult>>>
get_bmr_tune_results(const BenchmarkResult& bmr, const BmrFilter& filter = {});
std::vector<std::tuple<std::string, std::string, std::vector<FeatSelResult>>>
get_bmr_featsel_results(const BenchmarkResult& bmr,
                        const BmrFilter& filter = {});

// same tasks, disjoint learners / same learners, disjoint tasks; order is
// a then b
BenchmarkResult merge_benchmark_results_learner(const BenchmarkResult& a,
                                                const BenchmarkResult& b);
BenchmarkResult merge_benchmark_results_task(const BenchmarkResult& a,
                                             const BenchmarkResult& b);

// ---- comparison statistics ----

struct RankMatrixResult {
  std::vector<std::string> learner_ids;  // rows
  std::vector<std::string> task_ids;     // columns
  Matrix ranks;  // per task: 1 = best aggregated value, average ties

  std::vector<double> mean_ranks() const;
  Table as_table() const;
};

RankMatrixResult rank_matrix(const BenchmarkResult& bmr,
                             const Measure& measure);
RankMatrixResult rank_matrix(const BenchmarkResult& bmr);

struct FriedmanTestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

FriedmanTestResult friedman_test(const BenchmarkResult& bmr,
                                 const Measure& measure);
FriedmanTestResult friedman_test(const BenchmarkResult& bmr);

struct NemenyiResult {
  std::vector<std::string> learner_ids;
  std::vector<double> mean_ranks;
  Matrix p_values;  // symmetric, diagonal missing

  Table as_table() const;
};

NemenyiResult friedman_posthoc_nemenyi(const BenchmarkResult& bmr,
                                       const Measure& measure);
NemenyiResult friedman_posthoc_nemenyi(const BenchmarkResult& bmr);

struct CriticalDifferencesResult {
  std::string test;  // "nemenyi" | "bd"
  double alpha = 0.05;
  std::vector<std::string> learner_ids;
  std::vector<double> mean_ranks;
  double cd = 0.0;
  // nemenyi: learner index pairs (i < j) with |R_i - R_j| > cd
  std::vector<std::pair<int, int>> significant_pairs;
  // bd only: the baseline and its interval baseline_rank +- cd
  std::string baseline;
  double baseline_rank = kMissing;
  double interval_lo = kMissing;
  double interval_hi = kMissing;

  Table as_table() const;
};

// test: "nemenyi" (all pairs) or "bd" (Bonferroni-Dunn against a baseline
// learner id); alpha in {0.01, 0.05, 0.1}, 2..10 learners
CriticalDifferencesResult critical_differences(const BenchmarkResult& bmr,
                                               const Measure& measure,
                                               const std::string& test = "nemenyi",
                                               double alpha = 0.05,
                                               const std::string& baseline = "");

// tail helpers behind the tests above
double chi_square_upper_tail(double x, int df);
double studentized_range_cdf(double q, int k);  // infinite df

}  // namespace mlkit
