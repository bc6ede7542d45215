#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nutrunner/config.hpp"
#include "nutrunner/control.hpp"
#include "nutrunner/logs.hpp"
#include "nutrunner/metrics.hpp"
#include "nutrunner/planner.hpp"
#include "nutrunner/rng.hpp"
#include "nutrunner/world.hpp"

namespace nutrunner {

enum class Scenario { kNominal, kAblation, kRobustness };
enum class Variant { kBaseline, kHybrid };
enum class Termination { kNormal, kExceptional, kNonFinite };

const char* scenario_name(Scenario s);
const char* variant_name(Variant v);
const char* termination_name(Termination t);
Scenario parse_scenario(const std::string& name);  // throws ConfigError

// Systematic error of the perception pipeline: the believed bolt pose is the
// true pose composed with this fixed local offset (translation in the bolt
// frame, tilt about an in-plane axis at the given azimuth, yaw about the
// thread axis).
struct PerceptionModel {
  Vec3 position_bias{Vec3::Zero()};  // m, bolt frame
  double tilt_bias{0.0};             // rad, about an axis perpendicular to the thread
  double tilt_azimuth{0.0};          // rad, direction of that axis in the bolt x-z plane
  double yaw_bias{0.0};              // rad, about the thread axis

  Pose believed_pose(const Pose& true_pose) const;
};

struct ExperimentConfig {
  Scenario scenario{Scenario::kNominal};
  uint64_t seed{0};
  double disturbance_limit{0.0};  // m; nominal/ablation trials
  std::vector<double> robustness_limits{0.10, 0.125, 0.15};
  int n_trials{10};
  int turn_count{3};
  double dt{1e-4};
  int log_stride{100};
  bool parallel{true};
  bool dump_plans{false};
  std::string out_dir{"out"};
  std::string model_file;  // robot description; empty = models/iiwa14.model

  Gains gains;
  BoltModel bolt;  // true nominal bolt (pose + thread + resistance)
  WorldParams world;
  PlannerParams planner;
  PerceptionModel perception;
  // Assumed residual off-axis load feeding the planner's advance predictor.
  double offaxis_load_estimate{0.2};
  JointVector q_home{JointVector::Zero()};  // nominal start configuration
};

// Defaults reproduce the nominal desk-scale scene; load_config applies
// key=value overrides from a config file on top of them. Throws ConfigError
// on malformed or inconsistent values.
ExperimentConfig default_config();
ExperimentConfig load_config(const KeyValueFile& kv);
void validate_config(const ExperimentConfig& config);

struct TrialResult {
  Variant variant{Variant::kHybrid};
  double limit{0.0};
  int trial_index{0};

  bool success{false};
  int turns_completed{0};
  Termination termination{Termination::kNormal};
  Stage failure_stage{Stage::kApproach};  // valid when termination != normal
  std::string failure_reason;

  double pitch_progress{0.0};
  SignalMetrics metrics;
  uint64_t plan_checksum{0};

  // Retained only when the trial ran with keep_logs.
  std::vector<StateLogRow> state_rows;
  std::vector<ControllerLogRow> controller_rows;
  std::vector<PlanDumpRow> plan_rows;
  PlannedTimeline timeline;
};

// Runs one trial: draws the per-axis disturbances from the trial's RNG
// stream, solves IK for the disturbed start pose, then executes the greedy
// feedback-free stage machine to termination under the selected controller.
TrialResult run_trial(const ChainModel& model, const ExperimentConfig& config, Variant variant,
                      double limit, uint64_t stream_label, int trial_index, bool keep_logs);

// Scenario drivers; each writes its output files under config.out_dir and
// returns the process exit code (0 normal, 2 exceptional in nominal).
int run_nominal(const ChainModel& model, const ExperimentConfig& config);
int run_ablation(const ChainModel& model, const ExperimentConfig& config);
int run_robustness(const ChainModel& model, const ExperimentConfig& config);

// Robustness batch kernel, exposed for the benchmark tool: runs the full
// limits x trials grid and returns results in deterministic (limit, trial)
// order regardless of parallelism.
std::vector<TrialResult> run_robustness_batch(const ChainModel& model,
                                              const ExperimentConfig& config, bool parallel);

}  // namespace nutrunner
