#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlkit/error.hpp"
#include "mlkit/params.hpp"

namespace mlkit::cli {

// Declarative experiment description. Parsing normalizes the document (scalar
// shorthands expanded, defaults filled) so parse -> serialize -> parse is a
// fixed point; every violation is reported with its config path.

struct TaskSpec {
  std::string id;
  std::string kind = "classif";
  std::string path;
  std::map<std::string, std::string> schema;  // column -> kind override
  std::vector<std::string> targets;
  std::string positive;
  std::string weights;                 // numeric weight column
  std::vector<std::string> cost_cols;  // costsens: per-class cost columns
};

struct WrapperSpec {
  std::string type;
  json args;  // object; validated per type, passed through verbatim
};

struct LearnerSpec {
  std::string class_name;
  std::string id;
  std::string predict_type;  // "" = learner default
  ParamMap hyperpars;
  std::vector<WrapperSpec> wrappers;  // first listed = outermost
};

struct ResamplingSpec {
  std::string method = "CV";
  int iters = 0;       // 0 = method default
  int reps = 0;        // RepCV
  double split = -1;   // Holdout/Subsample
  bool stratify = false;
  std::vector<std::string> stratify_cols;
  std::string predict = "test";
};

struct MeasureSpec {
  std::string id;
  std::string aggr;  // "" = measure default aggregation
};

struct ParamSpec {
  std::string id;
  std::string type = "numeric";  // numeric | integer | discrete | logical
  double lower = 0;
  double upper = 0;
  std::vector<json> values;  // discrete
  std::string trafo = "none";
};

struct TuningSpec {
  std::vector<ParamSpec> params;
  std::string method = "grid";
  int resolution = 10;
  int maxit = 100;
  std::optional<double> impute_val;
  bool tune_threshold = false;
  std::vector<MeasureSpec> measures;  // empty = top-level measures
};

struct FeatselSpec {
  std::string method = "sequential";
  int maxit = 100;
  double prob = 0.5;
  std::string seq_method = "sfs";
  double alpha = 0.01;
  double beta = 0.01;
  std::optional<int> max_features;
  std::vector<MeasureSpec> measures;
};

struct BenchmarkSpec {
  bool keep_pred = true;
  std::string extract;
  bool stats = false;  // ranks.csv + friedman.json
  bool cd = false;     // cd.json
  std::string cd_test = "nemenyi";
  double cd_alpha = 0.05;
  std::string cd_baseline;
};

struct InspectSpec {
  std::string type;  // threshperf | calibration | learningcurve | pdp | fanova
  int gridsize = 0;  // filled with the type default at parse time
  // threshperf
  bool aggregate = true;
  // calibration
  std::string breaks_rule;
  int bins = 0;
  std::vector<double> cuts;
  int groups = 0;
  // learningcurve
  std::vector<double> percs;
  // pdp / fanova
  std::vector<std::string> features;
  bool interaction = false;
  bool individual = false;
  bool derivative = false;
  std::string fun = "mean";
  std::vector<double> quantiles = {0.25, 0.5, 0.75};
  std::map<std::string, double> fmin;
  std::map<std::string, double> fmax;
  std::map<std::string, double> center;
  std::vector<double> bounds = {-1.96, 1.96};
  int depth = 1;
};

struct OptionsSpec {
  std::string on_learner_error = "stop";  // stop | warn
  bool show_info = false;
};

struct ExperimentConfig {
  std::vector<TaskSpec> tasks;
  std::vector<LearnerSpec> learners;
  std::optional<ResamplingSpec> resampling;
  std::vector<MeasureSpec> measures;
  std::optional<TuningSpec> tuning;
  std::optional<FeatselSpec> featsel;
  std::optional<BenchmarkSpec> benchmark;
  std::optional<InspectSpec> inspect;
  long long seed = 1;
  int workers = 1;
  OptionsSpec options;
};

ExperimentConfig parse_config(const json& doc);
json serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config_file(const std::string& path);

// shared with the tune/featsel wrapper specs inside learner chains
ResamplingSpec parse_resampling(const json& j, const std::string& path);
std::vector<MeasureSpec> parse_measures(const json& j, const std::string& path);
std::vector<ParamSpec> parse_params(const json& j, const std::string& path);
TuningSpec parse_tuning_block(const json& j, const std::string& path);
FeatselSpec parse_featsel_block(const json& j, const std::string& path);

}  // namespace mlkit::cli
