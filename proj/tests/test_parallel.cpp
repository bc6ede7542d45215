// Parallel execution must be a pure throughput knob: the robustness batch and
// the grasp-candidate evaluation return bit-identical results either way.
#include <cmath>
#include <vector>

#include "doctest.h"
#include "nutrunner/experiment.hpp"
#include "nutrunner/planner.hpp"
#include "nutrunner/rng.hpp"
#include "test_util.hpp"

namespace nutrunner {
namespace {

bool same_bits(const JointVector& a, const JointVector& b) {
  for (int i = 0; i < kDof; ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

TEST_CASE("robustness batch is invariant to parallel execution") {
  const ChainModel& model = testutil::model();
  ExperimentConfig config = default_config();
  config.robustness_limits = {0.0, 0.08};
  config.n_trials = 2;
  config.turn_count = 1;
  config.seed = 81;

  const std::vector<TrialResult> serial = run_robustness_batch(model, config, false);
  const std::vector<TrialResult> parallel = run_robustness_batch(model, config, true);

  REQUIRE(serial.size() == 4);
  REQUIRE(parallel.size() == serial.size());

  for (size_t i = 0; i < serial.size(); ++i) {
    const TrialResult& s = serial[i];
    const TrialResult& p = parallel[i];
    CAPTURE(i);

    // Results arrive in deterministic (limit, trial) order.
    const size_t li = i / 2, trial = i % 2;
    CHECK(s.limit == config.robustness_limits[li]);
    CHECK(s.trial_index == static_cast<int>(trial));
    CHECK(s.variant == Variant::kHybrid);

    CHECK(p.limit == s.limit);
    CHECK(p.trial_index == s.trial_index);
    CHECK(p.variant == s.variant);
    CHECK(p.success == s.success);
    CHECK(p.turns_completed == s.turns_completed);
    CHECK(p.termination == s.termination);
    if (s.termination != Termination::kNormal) {
      CHECK(p.failure_stage == s.failure_stage);
    }
    CHECK(p.failure_reason == s.failure_reason);
    CHECK(p.pitch_progress == s.pitch_progress);
    CHECK(p.plan_checksum == s.plan_checksum);
    CHECK(p.metrics.mean_my == s.metrics.mean_my);
    CHECK(p.metrics.mean_abs_my == s.metrics.mean_abs_my);
    CHECK(p.metrics.peak_abs_my == s.metrics.peak_abs_my);
    CHECK(p.metrics.my_slope == s.metrics.my_slope);
    CHECK(p.metrics.grasped_samples == s.metrics.grasped_samples);
    CHECK(p.metrics.mean_translation_err == s.metrics.mean_translation_err);
    CHECK(p.metrics.peak_translation_err == s.metrics.peak_translation_err);
    CHECK(p.metrics.mean_rotation_err == s.metrics.mean_rotation_err);
    CHECK(p.metrics.peak_rotation_err == s.metrics.peak_rotation_err);
  }

  // At limit zero every disturbance draw collapses to exactly zero, so the
  // two trials share one plan; a nonzero limit must actually perturb it.
  CHECK(serial[0].plan_checksum == serial[1].plan_checksum);
  CHECK(serial[2].plan_checksum != serial[0].plan_checksum);
}

TEST_CASE("grasp selection is invariant to parallel evaluation") {
  const ChainModel& model = testutil::model();
  const ExperimentConfig config = default_config();
  PlannerParams serial_params = config.planner;
  serial_params.parallel = false;
  PlannerParams parallel_params = config.planner;
  parallel_params.parallel = true;

  CounterRng rng(82);
  for (int trial = 0; trial < 6; ++trial) {
    SceneEstimate scene;
    scene.bolt_pose = config.bolt.base_pose;
    if (trial > 0) {
      for (int i = 0; i < 3; ++i) {
        scene.bolt_pose.translation[i] += rng.uniform(-0.05, 0.05);
      }
      scene.nut_theta = rng.uniform(0.0, 2.0 * M_PI);
    }

    const GraspSelection s =
        select_grasp_direction(model, scene, config.bolt, serial_params, config.q_home);
    const GraspSelection p =
        select_grasp_direction(model, scene, config.bolt, parallel_params, config.q_home);

    CAPTURE(trial);
    CHECK(p.feasible == s.feasible);
    CHECK(p.direction == s.direction);
    CHECK(p.distance == s.distance);
    CHECK(same_bits(p.q_grasp, s.q_grasp));
    for (int k = 0; k < 6; ++k) {
      CHECK(p.candidate_feasible[k] == s.candidate_feasible[k]);
      CHECK(p.candidate_distance[k] == s.candidate_distance[k]);
    }
  }

  // Unreachable scene: both modes agree that nothing is feasible.
  SceneEstimate far;
  far.bolt_pose = config.bolt.base_pose;
  far.bolt_pose.translation += Vec3(5.0, 0.0, 0.0);
  const GraspSelection s = select_grasp_direction(model, far, config.bolt, serial_params,
                                                  config.q_home);
  const GraspSelection p = select_grasp_direction(model, far, config.bolt, parallel_params,
                                                  config.q_home);
  CHECK(!s.feasible);
  CHECK(p.feasible == s.feasible);
  for (int k = 0; k < 6; ++k) {
    CHECK(s.candidate_feasible[k] == false);
    CHECK(p.candidate_feasible[k] == s.candidate_feasible[k]);
  }
}

}  // namespace
}  // namespace nutrunner
