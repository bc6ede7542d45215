#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "nutrunner/experiment.hpp"
#include "nutrunner/model.hpp"

namespace {

std::string default_model_path() {
  return std::string(NUTRUNNER_SOURCE_DIR) + "/models/iiwa14.model";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nutrunner — autonomous nut-fastening simulation harness"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run an experiment scenario");
  std::string scenario = "nominal";
  std::string config_file;
  std::string out_dir;
  std::string model_file;
  std::uint64_t seed = 0;
  double dt = 0.0;
  int turns = 0;
  double limit = -1.0;
  int trials = 0;
  int log_stride = 0;
  bool serial = false;
  bool dump_plans = false;

  auto* opt_scenario =
      run->add_option("--scenario", scenario, "Scenario to run (nominal, ablation, robustness)")
          ->check(CLI::IsMember({"nominal", "ablation", "robustness"}));
  auto* opt_seed = run->add_option("--seed", seed, "Master RNG seed");
  auto* opt_dt = run->add_option("--dt", dt, "Simulation step [s]")->check(CLI::PositiveNumber);
  auto* opt_turns =
      run->add_option("--turns", turns, "Commanded fastening turns")->check(CLI::PositiveNumber);
  auto* opt_limit = run->add_option(
      "--limit", limit, "Per-axis disturbance limit [m] (nominal and ablation trials)");
  auto* opt_trials = run->add_option("--trials", trials, "Trials per robustness limit")
                         ->check(CLI::PositiveNumber);
  run->add_option("--config", config_file, "Key=value configuration file")
      ->check(CLI::ExistingFile);
  auto* opt_out = run->add_option("--out", out_dir, "Output directory");
  auto* opt_model = run->add_option("--model", model_file, "Robot model file");
  auto* opt_stride =
      run->add_option("--log-stride", log_stride, "Steps between log samples")
          ->check(CLI::PositiveNumber);
  run->add_flag("--serial", serial, "Disable parallel trial execution");
  run->add_flag("--dump-plans", dump_plans, "Write the solved keyframe plans to plans.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    nutrunner::KeyValueFile kv = config_file.empty()
                                     ? nutrunner::KeyValueFile::parse_string("", "<cli>")
                                     : nutrunner::KeyValueFile::parse_file(config_file);
    // Command-line flags override file values.
    if (opt_scenario->count() > 0) kv.set("scenario", scenario);
    if (opt_seed->count() > 0) kv.set("seed", std::to_string(seed));
    if (opt_dt->count() > 0) kv.set("dt", nutrunner::format_number(dt));
    if (opt_turns->count() > 0) kv.set("turn_count", std::to_string(turns));
    if (opt_limit->count() > 0) kv.set("disturbance_limit", nutrunner::format_number(limit));
    if (opt_trials->count() > 0) kv.set("n_trials", std::to_string(trials));
    if (opt_out->count() > 0) kv.set("out_dir", out_dir);
    if (opt_model->count() > 0) kv.set("model_file", model_file);
    if (opt_stride->count() > 0) kv.set("log_stride", std::to_string(log_stride));
    if (serial) kv.set("parallel", "false");
    if (dump_plans) kv.set("dump_plans", "true");

    const nutrunner::ExperimentConfig config = nutrunner::load_config(kv);
    const std::string model_path =
        config.model_file.empty() ? default_model_path() : config.model_file;
    const nutrunner::ChainModel model = nutrunner::load_chain_model(model_path);

    switch (config.scenario) {
      case nutrunner::Scenario::kNominal: return nutrunner::run_nominal(model, config);
      case nutrunner::Scenario::kAblation: return nutrunner::run_ablation(model, config);
      case nutrunner::Scenario::kRobustness: return nutrunner::run_robustness(model, config);
    }
    return 0;
  } catch (const nutrunner::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const nutrunner::ModelError& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
