#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "runner.hpp"

namespace {

constexpr const char* kLevelHelp =
    "parallelization level: benchmark, resample, selectFeatures or tuneParams";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlkit: declarative machine-learning experiments over CSV data"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "mlkit-out";
  long long seed = 0;
  int workers = 0;
  std::string level;

  const std::vector<std::string> run_commands = {"resample", "tune",
                                                 "benchmark", "featsel",
                                                 "inspect"};
  for (const auto& name : run_commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("-o,--out", out_dir, "output directory");
    sub->add_option("-s,--seed", seed, "master seed override")
        ->envname("MLKIT_SEED");
    sub->add_option("-w,--workers", workers, "worker count override")
        ->envname("MLKIT_WORKERS");
    sub->add_option("-l,--level", level, kLevelHelp);
  }
  app.get_subcommand("resample")->description(
      "resample one learner on one task");
  app.get_subcommand("tune")->description("tune hyperparameters");
  app.get_subcommand("benchmark")->description(
      "cross learners with tasks under a shared resampling");
  app.get_subcommand("featsel")->description("select features");
  app.get_subcommand("inspect")->description(
      "model/prediction inspection tables");

  std::string inspect_type;
  app.get_subcommand("inspect")
      ->add_option("type", inspect_type,
                   "threshperf|calibration|learningcurve|pdp|fanova "
                   "(defaults to the config's inspect type)");

  std::string list_what;
  std::string list_kind;
  std::vector<std::string> list_props;
  std::string list_out;
  CLI::App* list_cmd = app.add_subcommand("list", "registry contents");
  list_cmd->add_option("what", list_what, "learners|measures|filters")
      ->required();
  list_cmd->add_option("-k,--kind", list_kind, "task kind filter");
  list_cmd->add_option("-p,--property", list_props, "required property");
  list_cmd->add_option("-o,--out", list_out, "also write list.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub == list_cmd) {
      const mlkit::Table t = mlkit::cli::cmd_list(
          list_what, list_kind,
          std::set<std::string>(list_props.begin(), list_props.end()));
      std::cout << t.to_csv();
      if (!list_out.empty()) {
        std::filesystem::create_directories(list_out);
        mlkit::write_text_file(
            (std::filesystem::path(list_out) / "list.csv").string(),
            t.to_csv());
      }
      return 0;
    }

    const mlkit::cli::RunContext ctx = mlkit::cli::make_run_context(
        config_path, out_dir,
        sub->count("--seed") ? std::optional<long long>(seed) : std::nullopt,
        sub->count("--workers") ? std::optional<int>(workers) : std::nullopt,
        sub->count("--level") ? std::optional<std::string>(level)
                              : std::nullopt);
    const std::string name = sub->get_name();
    if (name == "resample")
      mlkit::cli::cmd_resample(ctx);
    else if (name == "tune")
      mlkit::cli::cmd_tune(ctx);
    else if (name == "benchmark")
      mlkit::cli::cmd_benchmark(ctx);
    else if (name == "featsel")
      mlkit::cli::cmd_featsel(ctx);
    else
      mlkit::cli::cmd_inspect(ctx, inspect_type);
    return 0;
  } catch (const mlkit::ConfigError& e) {
    std::cerr << "mlkit: config error: " << e.what() << "\n";
    return 2;
  } catch (const mlkit::LearnerError& e) {
    std::cerr << "mlkit: learner error: " << e.what() << "\n";
    return 3;
  } catch (const mlkit::ValueError& e) {
    std::cerr << "mlkit: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mlkit: error: " << e.what() << "\n";
    return 1;
  }
}
