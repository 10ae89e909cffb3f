#pragma once

#include <map>
#include <string>
#include <vector>

#include "mlkit/learner.hpp"
#include "mlkit/matrix.hpp"
#include "mlkit/model.hpp"
#include "mlkit/task.hpp"

namespace mlkit {

// Class-dependent misclassification costs: rows are true classes, columns
// predicted classes.
struct CostMatrix {
  std::vector<std::string> levels;
  Matrix costs;

  int index_of(const std::string& label) const;
  double at(const std::string& truth, const std::string& predicted) const;
};

// Validates the shape; warns when a row is not minimized on its diagonal.
CostMatrix make_cost_matrix(std::vector<std::string> levels, Matrix costs);

// Optimal positive-class probability threshold for binary class-dependent
// costs. The matrix follows the CostMatrix convention.
double theoretical_threshold(const Matrix& costs, int positive_index = 0);
double theoretical_threshold(const CostMatrix& costs,
                             const std::string& positive);

// Factor by which the positive-class weight has to change so that the
// default threshold t0 acts like threshold t.
double theoretical_weight(double t, double t0 = 0.5);

// Per-class thresholds 2 / rowSums(costs) for set_threshold's division
// rule. A heuristic, not an optimum.
std::vector<double> multiclass_cost_thresholds(const Matrix& costs);
std::map<std::string, double> multiclass_cost_thresholds(
    const CostMatrix& costs);

// Example-dependent costs: features plus one cost column per class.
Task make_costsens_task(Dataset data, Matrix costs,
                        std::vector<std::string> classes,
                        const std::string& id = "costsens");

// Reductions from example-dependent costs to ordinary learning problems.
// The classif wrapper coerces the costs into argmin class labels, the regr
// wrapper fits one model per cost column and predicts the cheapest class,
// and the pairs wrapper fits a weighted binary model per class pair and
// lets the pair winners vote.
LearnerPtr make_costsens_classif_wrapper(const LearnerPtr& learner);
LearnerPtr make_costsens_regr_wrapper(const LearnerPtr& learner);
LearnerPtr make_costsens_weighted_pairs_wrapper(const LearnerPtr& learner);

// Fitted inner models (classif: one; regr: one per class; pairs: one per
// class pair in lexicographic order).
std::vector<ModelPtr> get_costsens_models(const ModelPtr& model);

}  // namespace mlkit
