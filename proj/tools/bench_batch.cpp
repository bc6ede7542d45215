#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nutrunner/experiment.hpp"
#include "nutrunner/model.hpp"

namespace {

bool same_result(const nutrunner::TrialResult& a, const nutrunner::TrialResult& b) {
  return a.variant == b.variant && a.limit == b.limit && a.trial_index == b.trial_index &&
         a.success == b.success && a.turns_completed == b.turns_completed &&
         a.termination == b.termination && a.plan_checksum == b.plan_checksum &&
         std::memcmp(&a.pitch_progress, &b.pitch_progress, sizeof(double)) == 0;
}

double run_timed(const nutrunner::ChainModel& model, const nutrunner::ExperimentConfig& config,
                 bool parallel, std::vector<nutrunner::TrialResult>& out) {
  const auto t0 = std::chrono::steady_clock::now();
  out = nutrunner::run_robustness_batch(model, config, parallel);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bench_batch — serial vs parallel robustness batch benchmark"};
  std::uint64_t seed = 0;
  int trials = 4;
  int turns = 1;
  std::vector<double> limits{0.10, 0.15};
  std::string model_file;
  app.add_option("--seed", seed, "Master RNG seed");
  app.add_option("--trials", trials, "Trials per limit")->check(CLI::PositiveNumber);
  app.add_option("--turns", turns, "Commanded turns per trial")->check(CLI::PositiveNumber);
  app.add_option("--limits", limits, "Disturbance limits [m]");
  app.add_option("--model", model_file, "Robot model file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    nutrunner::ExperimentConfig config = nutrunner::default_config();
    config.seed = seed;
    config.n_trials = trials;
    config.turn_count = turns;
    config.robustness_limits = limits;
    const std::string model_path = model_file.empty()
                                       ? std::string(NUTRUNNER_SOURCE_DIR) + "/models/iiwa14.model"
                                       : model_file;
    const nutrunner::ChainModel model = nutrunner::load_chain_model(model_path);

    std::vector<nutrunner::TrialResult> serial_results;
    std::vector<nutrunner::TrialResult> parallel_results;
    const double t_serial = run_timed(model, config, false, serial_results);
    const double t_parallel = run_timed(model, config, true, parallel_results);

    bool identical = serial_results.size() == parallel_results.size();
    for (size_t i = 0; identical && i < serial_results.size(); ++i) {
      identical = same_result(serial_results[i], parallel_results[i]);
    }

    int successes = 0;
    for (const auto& r : serial_results) successes += r.success ? 1 : 0;

    std::printf("trials               : %zu\n", serial_results.size());
    std::printf("successes (serial)   : %d\n", successes);
    std::printf("serial batch         : %.3f s\n", t_serial);
    std::printf("parallel batch       : %.3f s\n", t_parallel);
    std::printf("speedup              : %.2fx\n", t_parallel > 0.0 ? t_serial / t_parallel : 0.0);
    std::printf("results identical    : %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
