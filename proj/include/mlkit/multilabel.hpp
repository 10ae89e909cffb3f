#pragma once

#include <string>
#include <vector>

#include "mlkit/learner.hpp"
#include "mlkit/measure.hpp"
#include "mlkit/model.hpp"
#include "mlkit/table.hpp"
#include "mlkit/task.hpp"

namespace mlkit {

// Targets must be logical columns; every other column is a feature.
Task make_multilabel_task(Dataset data, std::vector<std::string> targets,
                          const std::string& id = "multilabel");

// Problem-transformation wrappers over a binary classif base learner.
// binary_relevance fits one independent model per label; classifier_chains
// augments label j's inputs with the true previous labels (predicted ones
// at prediction time); nested_stacking chains on the models' own
// training-set predictions; dbr trains each label on the true other labels
// and predicts from a binary relevance first stage; stacking is dbr with
// the first stage's training-set predictions as inputs.
LearnerPtr make_multilabel_binary_relevance_wrapper(const LearnerPtr& learner);
LearnerPtr make_multilabel_classifier_chains_wrapper(
    const LearnerPtr& learner, const std::vector<std::string>& order = {});
LearnerPtr make_multilabel_nested_stacking_wrapper(
    const LearnerPtr& learner, const std::vector<std::string>& order = {});
LearnerPtr make_multilabel_dbr_wrapper(const LearnerPtr& learner);
LearnerPtr make_multilabel_stacking_wrapper(const LearnerPtr& learner);

// Per-label models: chain wrappers in chain order, dbr/stacking the
// second stage.
std::vector<ModelPtr> get_multilabel_models(const ModelPtr& model);

// One row per label with each measure evaluated on the label's binary
// prediction (columns: label, then one per measure id).
Table multilabel_binary_performances(const Prediction& pred,
                                     const std::vector<Measure>& measures);

}  // namespace mlkit
