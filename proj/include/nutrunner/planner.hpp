#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "nutrunner/ik.hpp"
#include "nutrunner/stage.hpp"
#include "nutrunner/trajectory.hpp"
#include "nutrunner/world.hpp"

namespace nutrunner {

enum class GripperAction { kNone, kClose, kOpen };

inline const char* gripper_action_name(GripperAction a) {
  switch (a) {
    case GripperAction::kNone: return "none";
    case GripperAction::kClose: return "close";
    case GripperAction::kOpen: return "open";
  }
  return "none";
}

// A desired gripper pose reached duration_from_prev seconds after the
// previous keyframe (always > 0; the first keyframe's duration counts from
// the stage start). A gripper action runs during the segment ending at this
// keyframe; such segments hold the arm stationary by construction (the pose
// equals the previous pose, so the first-order hold is constant).
struct Keyframe {
  Pose pose;
  double duration_from_prev{0.0};
  GripperAction action{GripperAction::kNone};
  bool tight_tolerance{false};  // contact-critical keyframes get tighter IK
  // Commanded aperture at this keyframe; NaN holds the previous value. Set
  // by the plan builders whenever action != none.
  double aperture_target{std::numeric_limits<double>::quiet_NaN()};
  // Planned sweep about the believed bolt axis reached at this keyframe
  // (nonzero only on screw-stage keyframes).
  double sweep_angle{0.0};
};

struct KeyframePlan {
  Stage stage{Stage::kApproach};
  std::vector<Keyframe> keyframes;
};

// What the planner believes about the scene: the perceived bolt pose and the
// running estimate of the nut angle. The harness builds this once per trial
// from its perception model; the planner never reads simulator internals.
struct SceneEstimate {
  Pose bolt_pose;
  double nut_theta{0.0};
};

struct PlannerParams {
  double settle_duration{0.5};        // s hold at the first keyframe of a stage
  double pre_grasp_offset{0.10};      // m radial standoff before the grasp
  double approach_leg_duration{2.0};  // s per free-space leg
  double screw_duration{4.0};         // s for the turning arc
  double gripper_window{1.0};         // s stationary close/open windows
  double turn_angle{M_PI / 6.0};      // rad commanded per fastening turn
  int arc_segments{6};
  double open_aperture{0.09};  // m commanded while open
  double close_fraction{0.8};  // close command as a fraction of across-flats
  // Planner's estimate of how far the nut actually advances per commanded
  // turn (the hybrid force channel trades a small steady rate error for the
  // applied moment, so the true advance falls short of turn_angle). Set from
  // predicted_turn_advance(); negative means "assume the full turn_angle".
  double per_turn_advance{-1.0};
  // Optional mode: shrink the commanded turn until every arc knot keeps
  // Jacobian manipulability above the floor (off by default).
  bool adaptive_turn_angle{false};
  double manipulability_floor{5e-3};
  bool parallel{true};     // evaluate the six grasp candidates concurrently
  IkOptions transit_ik{};  // free-space keyframes
  IkOptions contact_ik{};  // grasp/arc keyframes (tightened in ctor below)

  PlannerParams() {
    contact_ik.position_tolerance = 1.5e-3;
    contact_ik.rotation_tolerance = 0.5 * M_PI / 180.0;
  }

  double effective_turn_advance() const {
    return per_turn_advance >= 0.0 ? per_turn_advance : turn_angle;
  }
};

// Steady-state screw advance per commanded turn under the hybrid force
// channel: the channel balances kfp(rho_d - M) + kfd(rate_d - rate) = M
// against the resistance M = c + viscous*rate, where c is the Coulomb level
// at an assumed residual off-axis load. Pure function of configuration so
// both ablation arms plan identically.
double predicted_turn_advance(const PlannerParams& params, const BoltModel& bolt, double kfp,
                              double kfd, double rho_d, double offaxis_load_estimate = 0.2);

// Nut pose implied by the scene estimate at angle theta (y-advance follows
// the screw coupling exactly).
Pose estimated_nut_pose(const SceneEstimate& scene, const BoltModel& bolt, double theta);

// World-frame grasp pose for hex direction k under the scene estimate, swept
// forward by phi from the believed nut angle (phi also advances the nut
// axially per the screw coupling).
Pose planned_grasp_pose(const SceneEstimate& scene, const BoltModel& bolt, int direction,
                        double phi = 0.0);

// World-frame radial retreat direction (the gripper's finger axis) for hex
// direction k at sweep phi.
Vec3 grasp_radial_direction(const SceneEstimate& scene, const BoltModel& bolt, int direction,
                            double phi = 0.0);

struct GraspSelection {
  bool feasible{false};
  int direction{-1};
  JointVector q_grasp{JointVector::Zero()};
  double distance{0.0};
  std::array<bool, 6> candidate_feasible{};
  std::array<double, 6> candidate_distance{};
};

// Tries all six hex approach directions (optionally in parallel) and picks
// the feasible grasp whose IK solution is closest to the current
// configuration. Ties break toward the lowest direction index so the result
// never depends on scheduling.
GraspSelection select_grasp_direction(const ChainModel& model, const SceneEstimate& scene,
                                      const BoltModel& bolt, const PlannerParams& params,
                                      const JointVector& q_now);

// Keyframe builders (pure construction). Approach: settle at the current
// pose, pre-grasp radially offset from the grasp, grasp. Screw: stationary
// close window at the grasp, arc sweeping the configured turn about the
// believed bolt axis with the matching screw advance, stationary open
// window. Retract: the approach keyframes reversed, evaluated at the swept
// nut angle (theta + turn), returning to the commanded home pose.
KeyframePlan plan_approach(const SceneEstimate& scene, const BoltModel& bolt,
                           const PlannerParams& params, const Pose& current_pose, int direction);
KeyframePlan plan_screw(const SceneEstimate& scene, const BoltModel& bolt,
                        const PlannerParams& params, int direction, double turn_angle);
KeyframePlan plan_retract(const SceneEstimate& scene, const BoltModel& bolt,
                          const PlannerParams& params, const Pose& home_pose, int direction,
                          double turn_angle);

// A keyframe plan resolved to joint space: IK at every keyframe, each seeded
// by the previous knot (the stage start configuration for the first), plus
// first-order-hold trajectories for the arm and the gripper aperture. The
// trajectories carry an implicit breakpoint at t=0 holding q_start /
// aperture_start, so every keyframe keeps a positive duration.
struct StagePlanResult {
  bool feasible{false};
  KeyframePlan plan;
  std::vector<JointVector> knots;  // one per keyframe (excludes the t=0 start)
  JointTrajectory joints{std::vector<double>{0.0}, std::vector<JointVector>{JointVector::Zero()}};
  ScalarTrajectory aperture{std::vector<double>{0.0}, std::vector<double>{0.0}};
  // Planned sweep angle about the believed bolt axis vs stage-local time
  // (zero everywhere except across a screw stage's arc). Controllers use it
  // to place the believed manipuland frame.
  ScalarTrajectory sweep{std::vector<double>{0.0}, std::vector<double>{0.0}};
  double duration{0.0};
  std::string failure;  // empty when feasible; else e.g. "Diverged at keyframe 2"
};

StagePlanResult solve_plan(const ChainModel& model, const PlannerParams& params,
                           const KeyframePlan& plan, const JointVector& q_start,
                           double aperture_start);

// Greedy, feedback-free per-stage planning for a whole trial. The belief is
// chained through planned end states only: the gripper pose and seed
// configuration advance to each stage's planned terminus, and the believed
// nut angle advances by per_turn_advance after every retract. The true world
// is never consulted.
struct PlannerBelief {
  SceneEstimate scene;
  Pose gripper;   // planned current gripper pose
  Pose home;      // commanded start pose; the retract target every turn
  JointVector q{JointVector::Zero()};
  double aperture{0.0};
  int direction{-1};        // grasp direction for the current turn
  double arc_angle{0.0};    // commanded sweep chosen for the current turn
};

PlannerBelief make_belief(const SceneEstimate& scene, const ChainModel& model,
                          const JointVector& q_start, double aperture_start);

// Plans one stage from the current belief and, on success, advances the
// belief to the stage's planned end state. Failure leaves the belief
// untouched and reports the reason in the result.
StagePlanResult plan_stage(const ChainModel& model, const BoltModel& bolt,
                           const PlannerParams& params, Stage stage, PlannerBelief& belief);

// Sequencing of one trial: Approach -> Screw -> Retract per commanded turn.
struct StageMachine {
  Stage stage{Stage::kApproach};
  int turn{0};
  bool finished{false};

  void advance(int commanded_turns) {
    switch (stage) {
      case Stage::kApproach:
        stage = Stage::kScrew;
        break;
      case Stage::kScrew:
        stage = Stage::kRetract;
        break;
      case Stage::kRetract:
        ++turn;
        if (turn >= commanded_turns) {
          finished = true;
        } else {
          stage = Stage::kApproach;
        }
        break;
    }
  }
};

}  // namespace nutrunner
