#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlkit/measure.hpp"
#include "mlkit/model.hpp"
#include "mlkit/resample.hpp"

namespace mlkit {

struct FeatSelControl {
  std::string method = "sequential";  // exhaustive | random | sequential
  int maxit = 100;                    // random subsets
  double prob = 0.5;                  // random inclusion probability
  std::string seq_method = "sfs";     // sfs | sbs
  double alpha = 0.01;  // sfs: minimal improvement to accept an Add
  double beta = 0.01;   // sbs: tolerated worsening per Remove
  std::optional<int> max_features;
};

struct FeatSelPathRow {
  std::vector<std::uint8_t> bits;  // one flag per feature, task order
  std::vector<double> y;
  int dob = 0;
  std::string error_message;
  double exec_time = 0.0;
};

struct FeatSelResult {
  std::vector<std::string> x;  // selected feature names
  std::vector<std::pair<std::string, double>> y;
  std::vector<std::string> feature_names;
  std::vector<std::string> measure_names;
  std::vector<FeatSelPathRow> rows;
  // row indices of the accepted sequential path (Init first); empty for
  // exhaustive/random search
  std::vector<int> accepted;

  Table path_table() const;  // one 0/1 column per feature + measures + dob
  std::string path_csv() const;
  json to_json() const;
};

FeatSelResult featsel_result_from_json(const json& j);

FeatSelResult select_features(const LearnerPtr& learner, const Task& task,
                              const ResampleDesc& desc,
                              const FeatSelControl& control,
                              std::vector<Measure> measures = {},
                              Rng rng = Rng(1));

LearnerPtr make_featsel_wrapper(const LearnerPtr& learner,
                                const ResampleDesc& desc,
                                const FeatSelControl& control,
                                std::vector<Measure> measures = {});

FeatSelResult get_featsel_result(const ModelPtr& model);

std::string analyze_featsel_result(const FeatSelResult& result);

}  // namespace mlkit
