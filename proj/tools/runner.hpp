#pragma once

#include <optional>
#include <set>
#include <string>

#include "config.hpp"
#include "mlkit/benchmark.hpp"
#include "mlkit/table.hpp"

namespace mlkit::cli {

struct RunContext {
  ExperimentConfig cfg;
  std::string out_dir;
  long long seed = 1;
  int workers = 1;
  std::string level = "resample";
};

// flag/env overrides already resolved by the caller; nullopt = use the config
RunContext make_run_context(const std::string& config_path,
                            const std::string& out_dir,
                            std::optional<long long> seed = std::nullopt,
                            std::optional<int> workers = std::nullopt,
                            std::optional<std::string> level = std::nullopt);

Task build_task(const TaskSpec& spec, const std::string& path);
LearnerPtr build_learner(const LearnerSpec& spec, const OptionsSpec& options,
                         const std::string& path);
ResampleDesc build_resampling(const ResamplingSpec& spec,
                              const std::string& path);
std::vector<Measure> build_measures(const std::vector<MeasureSpec>& specs,
                                    const std::string& path);
ParamSet build_param_set(const std::vector<ParamSpec>& specs,
                         const std::string& path);

// volatile fields (wall-clock times) zeroed so result files are replayable
json sanitize_volatile(json j);

void cmd_resample(const RunContext& ctx);
void cmd_tune(const RunContext& ctx);
void cmd_benchmark(const RunContext& ctx);
void cmd_featsel(const RunContext& ctx);
void cmd_inspect(const RunContext& ctx, const std::string& subcommand = "");
Table cmd_list(const std::string& what, const std::string& kind = "",
               const std::set<std::string>& properties = {});

}  // namespace mlkit::cli
