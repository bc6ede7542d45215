#include "nutrunner/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nutrunner/kinematics.hpp"

namespace nutrunner {

double predicted_turn_advance(const PlannerParams& params, const BoltModel& bolt, double kfp,
                              double kfd, double rho_d, double offaxis_load_estimate) {
  const double rate_d = params.turn_angle / params.screw_duration;
  if (kfd <= 0.0) return params.turn_angle;
  const double c = bolt.resistance.coulomb + bolt.resistance.load_friction * offaxis_load_estimate;
  const double rate = (kfp * rho_d + kfd * rate_d - (1.0 + kfp) * c) /
                      (kfd + (1.0 + kfp) * bolt.resistance.viscous);
  const double advance = rate * params.screw_duration;
  return std::clamp(advance, 0.0, params.turn_angle);
}

Pose estimated_nut_pose(const SceneEstimate& scene, const BoltModel& bolt, double theta) {
  BoltModel believed = bolt;
  believed.base_pose = scene.bolt_pose;
  NutState nut;
  nut.theta = theta;
  nut.y_advance = theta * bolt.thread_pitch / (2.0 * M_PI);
  return nut_pose(believed, nut);
}

Pose planned_grasp_pose(const SceneEstimate& scene, const BoltModel& bolt, int direction,
                        double phi) {
  return estimated_nut_pose(scene, bolt, scene.nut_theta + phi) * grasp_pose_in_nut(direction);
}

Vec3 grasp_radial_direction(const SceneEstimate& scene, const BoltModel& bolt, int direction,
                            double phi) {
  // The gripper approaches along its own +y (radially inward), so the
  // retreat/standoff direction is -y of the grasp pose.
  return -(planned_grasp_pose(scene, bolt, direction, phi).rotation * Vec3::UnitY());
}

GraspSelection select_grasp_direction(const ChainModel& model, const SceneEstimate& scene,
                                      const BoltModel& bolt, const PlannerParams& params,
                                      const JointVector& q_now) {
  // Each face is scored at half the commanded sweep so the winning face's
  // whole tightening arc sits centred inside the reachable wedge, not just
  // its initial grasp yaw.
  const double phi_mid = 0.5 * params.turn_angle;
  std::array<IkResult, 6> candidates;
#pragma omp parallel for schedule(static) if (params.parallel)
  for (int k = 0; k < 6; ++k) {
    candidates[static_cast<std::size_t>(k)] = solve_keyframe_ik(
        model, planned_grasp_pose(scene, bolt, k, phi_mid), q_now, params.contact_ik);
  }

  GraspSelection selection;
  for (int k = 0; k < 6; ++k) {
    const auto& cand = candidates[static_cast<std::size_t>(k)];
    const bool ok = cand.status == IkStatus::kConverged;
    const double distance = (cand.q - q_now).norm();
    selection.candidate_feasible[static_cast<std::size_t>(k)] = ok;
    selection.candidate_distance[static_cast<std::size_t>(k)] = distance;
    if (!ok) continue;
    if (!selection.feasible || distance < selection.distance) {
      selection.feasible = true;
      selection.direction = k;
      selection.q_grasp = cand.q;
      selection.distance = distance;
    }
  }
  return selection;
}

KeyframePlan plan_approach(const SceneEstimate& scene, const BoltModel& bolt,
                           const PlannerParams& params, const Pose& current_pose, int direction) {
  const Pose grasp = planned_grasp_pose(scene, bolt, direction);
  Pose pre_grasp = grasp;
  pre_grasp.translation += params.pre_grasp_offset * grasp_radial_direction(scene, bolt, direction);

  KeyframePlan plan;
  plan.stage = Stage::kApproach;
  plan.keyframes.push_back({current_pose, params.settle_duration, GripperAction::kNone, false});
  plan.keyframes.push_back({pre_grasp, params.approach_leg_duration, GripperAction::kNone, false});
  plan.keyframes.push_back({grasp, params.approach_leg_duration, GripperAction::kNone, true});
  return plan;
}

KeyframePlan plan_screw(const SceneEstimate& scene, const BoltModel& bolt,
                        const PlannerParams& params, int direction, double turn_angle) {
  KeyframePlan plan;
  plan.stage = Stage::kScrew;

  Keyframe close_window{planned_grasp_pose(scene, bolt, direction), params.gripper_window,
                        GripperAction::kClose, true};
  close_window.aperture_target = params.close_fraction * bolt.across_flats();
  plan.keyframes.push_back(close_window);

  const int segments = std::max(1, params.arc_segments);
  for (int i = 1; i <= segments; ++i) {
    const double phi = turn_angle * static_cast<double>(i) / static_cast<double>(segments);
    Keyframe arc{planned_grasp_pose(scene, bolt, direction, phi),
                 params.screw_duration / static_cast<double>(segments), GripperAction::kNone,
                 true};
    arc.sweep_angle = phi;
    plan.keyframes.push_back(arc);
  }

  Keyframe open_window{planned_grasp_pose(scene, bolt, direction, turn_angle),
                       params.gripper_window, GripperAction::kOpen, true};
  open_window.aperture_target = params.open_aperture;
  open_window.sweep_angle = turn_angle;
  plan.keyframes.push_back(open_window);
  return plan;
}

KeyframePlan plan_retract(const SceneEstimate& scene, const BoltModel& bolt,
                          const PlannerParams& params, const Pose& home_pose, int direction,
                          double turn_angle) {
  const Pose grasp = planned_grasp_pose(scene, bolt, direction, turn_angle);
  Pose pre_grasp = grasp;
  pre_grasp.translation +=
      params.pre_grasp_offset * grasp_radial_direction(scene, bolt, direction, turn_angle);

  KeyframePlan plan;
  plan.stage = Stage::kRetract;
  plan.keyframes.push_back({grasp, params.settle_duration, GripperAction::kNone, true});
  plan.keyframes.push_back({pre_grasp, params.approach_leg_duration, GripperAction::kNone, false});
  plan.keyframes.push_back({home_pose, params.approach_leg_duration, GripperAction::kNone, false});
  return plan;
}

StagePlanResult solve_plan(const ChainModel& model, const PlannerParams& params,
                           const KeyframePlan& plan, const JointVector& q_start,
                           double aperture_start) {
  StagePlanResult result;
  result.plan = plan;

  std::vector<double> times{0.0};
  std::vector<JointVector> joint_knots{q_start};
  std::vector<double> aperture_knots{aperture_start};
  std::vector<double> sweep_knots{0.0};

  JointVector seed = q_start;
  double t = 0.0;
  double aperture = aperture_start;
  for (std::size_t i = 0; i < plan.keyframes.size(); ++i) {
    const Keyframe& kf = plan.keyframes[i];
    const IkOptions& options = kf.tight_tolerance ? params.contact_ik : params.transit_ik;
    const IkResult ik = solve_keyframe_ik(model, kf.pose, seed, options);
    if (ik.status != IkStatus::kConverged) {
      result.failure = "Diverged at keyframe " + std::to_string(i);
      return result;
    }
    seed = ik.q;
    t += kf.duration_from_prev;
    if (std::isfinite(kf.aperture_target)) aperture = kf.aperture_target;
    times.push_back(t);
    joint_knots.push_back(ik.q);
    aperture_knots.push_back(aperture);
    sweep_knots.push_back(kf.sweep_angle);
    result.knots.push_back(ik.q);
  }

  result.feasible = true;
  result.duration = t;
  result.joints = JointTrajectory(times, joint_knots);
  result.aperture = ScalarTrajectory(times, aperture_knots);
  result.sweep = ScalarTrajectory(times, sweep_knots);
  return result;
}

PlannerBelief make_belief(const SceneEstimate& scene, const ChainModel& model,
                          const JointVector& q_start, double aperture_start) {
  PlannerBelief belief;
  belief.scene = scene;
  belief.gripper = forward_kinematics(model, q_start);
  belief.home = belief.gripper;
  belief.q = q_start;
  belief.aperture = aperture_start;
  return belief;
}

namespace {

double manipulability(const ChainModel& model, const JointVector& q) {
  const SpatialJacobian jac = jacobian(model, q);
  return std::sqrt(std::max(0.0, (jac * jac.transpose()).determinant()));
}

bool arc_clears_floor(const ChainModel& model, const PlannerParams& params,
                      const StagePlanResult& solved) {
  for (const JointVector& knot : solved.knots) {
    if (manipulability(model, knot) < params.manipulability_floor) return false;
  }
  return true;
}

}  // namespace

StagePlanResult plan_stage(const ChainModel& model, const BoltModel& bolt,
                           const PlannerParams& params, Stage stage, PlannerBelief& belief) {
  StagePlanResult result;
  switch (stage) {
    case Stage::kApproach: {
      const GraspSelection selection =
          select_grasp_direction(model, belief.scene, bolt, params, belief.q);
      if (!selection.feasible) {
        result.plan.stage = Stage::kApproach;
        result.failure = "NoFeasibleGrasp";
        return result;
      }
      const KeyframePlan plan =
          plan_approach(belief.scene, bolt, params, belief.gripper, selection.direction);
      result = solve_plan(model, params, plan, belief.q, belief.aperture);
      if (result.feasible) belief.direction = selection.direction;
      break;
    }
    case Stage::kScrew: {
      double angle = params.turn_angle;
      result = solve_plan(
          model, params, plan_screw(belief.scene, bolt, params, belief.direction, angle),
          belief.q, belief.aperture);
      if (params.adaptive_turn_angle) {
        // Shrink the commanded sweep until the whole arc keeps a margin from
        // kinematic singularity (coarse backtracking search; off by default).
        const double full = angle;
        double fraction = 1.0;
        while ((!result.feasible || !arc_clears_floor(model, params, result)) &&
               fraction > 0.25 + 1e-12) {
          fraction -= 0.25;
          angle = full * fraction;
          result = solve_plan(
              model, params, plan_screw(belief.scene, bolt, params, belief.direction, angle),
              belief.q, belief.aperture);
        }
      }
      if (result.feasible) belief.arc_angle = angle;
      break;
    }
    case Stage::kRetract: {
      const KeyframePlan plan = plan_retract(belief.scene, bolt, params, belief.home,
                                             belief.direction, belief.arc_angle);
      result = solve_plan(model, params, plan, belief.q, belief.aperture);
      if (result.feasible) {
        // The believed nut angle advances by the predicted per-turn progress,
        // shifted if an adaptive sweep shortened the commanded arc.
        belief.scene.nut_theta +=
            params.effective_turn_advance() - (params.turn_angle - belief.arc_angle);
      }
      break;
    }
  }
  if (result.feasible) {
    belief.gripper = result.plan.keyframes.back().pose;
    belief.q = result.knots.back();
    belief.aperture = result.aperture.knots().back();
  }
  return result;
}

}  // namespace nutrunner
