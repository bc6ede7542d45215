#include "doctest.h"

#include <cmath>

#include "nutrunner/planner.hpp"
#include "test_util.hpp"

using namespace nutrunner;

namespace {

bool same_pose_bits(const Pose& a, const Pose& b) {
  return (a.translation - b.translation).cwiseAbs().maxCoeff() == 0.0 &&
         (a.rotation.coeffs() - b.rotation.coeffs()).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

TEST_CASE("predicted advance satisfies the steady-state force balance") {
  const auto& fx = testutil::grasp_fixture();
  const PlannerParams& params = fx.config.planner;
  const BoltModel& bolt = fx.config.bolt;
  const Gains& gains = fx.config.gains;

  const double advance = predicted_turn_advance(params, bolt, gains.kfp, gains.kfd, gains.rho_d,
                                                fx.config.offaxis_load_estimate);
  REQUIRE(advance > 0.0);
  REQUIRE(advance < params.turn_angle);

  // At the predicted steady rate the force channel output equals the thread
  // resistance exactly: kfp (rho_d - M) + kfd (rate_d - rate) = M with
  // M = c + viscous * rate.
  const double rate = advance / params.screw_duration;
  const double rate_d = params.turn_angle / params.screw_duration;
  const double c = bolt.resistance.coulomb +
                   bolt.resistance.load_friction * fx.config.offaxis_load_estimate;
  const double moment = c + bolt.resistance.viscous * rate;
  const double residual =
      gains.kfp * (gains.rho_d - moment) + gains.kfd * (rate_d - rate) - moment;
  CHECK(std::abs(residual) < 1e-9);
}

TEST_CASE("predicted advance edge cases") {
  const auto& fx = testutil::grasp_fixture();
  const PlannerParams& params = fx.config.planner;
  BoltModel bolt = fx.config.bolt;

  // no rate feedback: the predictor cannot trade rate for moment
  CHECK(predicted_turn_advance(params, bolt, 0.2, 0.0, 0.2) == params.turn_angle);
  CHECK(predicted_turn_advance(params, bolt, 0.2, -1.0, 0.2) == params.turn_angle);

  // frictionless thread: the force term pushes past the commanded rate; clamp
  bolt.resistance.coulomb = 0.0;
  bolt.resistance.viscous = 0.0;
  bolt.resistance.load_friction = 0.0;
  CHECK(predicted_turn_advance(params, bolt, 0.2, 10.0, 0.2) == params.turn_angle);

  // overwhelming friction: the channel stalls; clamp at zero
  bolt.resistance.coulomb = 100.0;
  CHECK(predicted_turn_advance(params, bolt, 0.2, 10.0, 0.2) == 0.0);

  // monotone in the moment setpoint inside the open interval
  BoltModel nominal = fx.config.bolt;
  const double low = predicted_turn_advance(params, nominal, 0.2, 10.0, 0.1);
  const double high = predicted_turn_advance(params, nominal, 0.2, 10.0, 0.3);
  CHECK(low < high);
}

TEST_CASE("estimated nut pose follows the believed screw coupling") {
  const auto& fx = testutil::grasp_fixture();
  const BoltModel& bolt = fx.config.bolt;
  SceneEstimate scene;
  scene.bolt_pose = bolt.base_pose;
  const Vec3 axis = scene.bolt_pose.rotation * Vec3::UnitY();

  const double theta = 2.1;
  const Pose p = estimated_nut_pose(scene, bolt, theta);
  const double y = theta * bolt.thread_pitch / (2.0 * M_PI);
  const Vec3 expect_t = scene.bolt_pose.translation + scene.bolt_pose.rotation * Vec3(0.0, y, 0.0);
  CHECK((p.translation - expect_t).norm() < 1e-15);

  // axial progress between two angles is exactly the thread advance
  const Pose p2 = estimated_nut_pose(scene, bolt, theta + 1.0);
  CHECK((p2.translation - p.translation).dot(axis) ==
        doctest::Approx(bolt.thread_pitch / (2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("planned grasp poses: radial standoff geometry") {
  const auto& fx = testutil::grasp_fixture();
  const BoltModel& bolt = fx.config.bolt;
  SceneEstimate scene;
  scene.bolt_pose = bolt.base_pose;
  const Vec3 axis = scene.bolt_pose.rotation * Vec3::UnitY();

  for (int k = 0; k < 6; ++k) {
    const double phi = 0.3 * k;
    const Pose grasp = planned_grasp_pose(scene, bolt, k, phi);
    const Vec3 radial = grasp_radial_direction(scene, bolt, k, phi);
    CHECK(radial.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(radial.dot(axis)) < 1e-12);
    // the grasp origin sits at the (advanced) nut centre
    const Pose nut = estimated_nut_pose(scene, bolt, scene.nut_theta + phi);
    CHECK((grasp.translation - nut.translation).norm() < 1e-15);
    // and the standoff moves strictly radially outward
    const Vec3 standoff = grasp.translation + 0.1 * radial - nut.translation;
    CHECK(standoff.norm() == doctest::Approx(0.1).epsilon(1e-12));
  }
}

TEST_CASE("a 60-degree nut rotation relabels the grasp faces") {
  const auto& fx = testutil::grasp_fixture();
  const BoltModel& bolt = fx.config.bolt;
  SceneEstimate scene;
  scene.bolt_pose = bolt.base_pose;
  SceneEstimate rotated = scene;
  rotated.nut_theta = M_PI / 3.0;

  for (int k = 0; k < 5; ++k) {
    const Pose a = planned_grasp_pose(rotated, bolt, k);
    const Pose b = planned_grasp_pose(scene, bolt, k + 1);
    CHECK(rotation_angle_between(a.matrix(), b.matrix()) < 1e-9);
    // identical orientation; the rotated scene also advanced along the thread
    const Vec3 diff = a.translation - b.translation;
    const Vec3 expect = (M_PI / 3.0) * bolt.thread_pitch / (2.0 * M_PI) * bolt.axis_world();
    CHECK((diff - expect).norm() < 1e-12);
  }
}

TEST_CASE("grasp direction selection is an argmin over per-face IK distance") {
  const auto& fx = testutil::grasp_fixture();
  const BoltModel& bolt = fx.config.bolt;
  PlannerParams params = fx.config.planner;
  params.parallel = false;
  SceneEstimate scene;
  scene.bolt_pose = bolt.base_pose;
  const JointVector q_now = fx.config.q_home;

  const GraspSelection sel = select_grasp_direction(testutil::model(), scene, bolt, params, q_now);
  REQUIRE(sel.feasible);

  // brute-force replication, face by face
  const double phi_mid = 0.5 * params.turn_angle;
  int best = -1;
  double best_distance = 0.0;
  for (int k = 0; k < 6; ++k) {
    const IkResult ik = solve_keyframe_ik(
        testutil::model(), planned_grasp_pose(scene, bolt, k, phi_mid), q_now, params.contact_ik);
    const bool ok = ik.status == IkStatus::kConverged;
    CHECK(sel.candidate_feasible[static_cast<std::size_t>(k)] == ok);
    if (ok) {
      CHECK(sel.candidate_distance[static_cast<std::size_t>(k)] == (ik.q - q_now).norm());
      if (best < 0 || (ik.q - q_now).norm() < best_distance) {
        best = k;
        best_distance = (ik.q - q_now).norm();
      }
    }
  }
  REQUIRE(best >= 0);
  CHECK(sel.direction == best);
  CHECK(sel.distance == best_distance);

  // the parallel path must produce the identical selection
  PlannerParams par = params;
  par.parallel = true;
  const GraspSelection sel_par =
      select_grasp_direction(testutil::model(), scene, bolt, par, q_now);
  CHECK(sel_par.feasible == sel.feasible);
  CHECK(sel_par.direction == sel.direction);
  CHECK((sel_par.q_grasp - sel.q_grasp).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sel_par.distance == sel.distance);
  for (int k = 0; k < 6; ++k) {
    CHECK(sel_par.candidate_feasible[static_cast<std::size_t>(k)] ==
          sel.candidate_feasible[static_cast<std::size_t>(k)]);
    CHECK(sel_par.candidate_distance[static_cast<std::size_t>(k)] ==
          sel.candidate_distance[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("approach plan: settle, radial standoff, grasp") {
  const auto& fx = testutil::grasp_fixture();
  const BoltModel& bolt = fx.config.bolt;
  const PlannerParams& params = fx.config.planner;
  const SceneEstimate scene = fx.scene;
  const Pose current = forward_kinematics(testutil::model(), fx.config.q_home);

  const KeyframePlan plan = plan_approach(scene, bolt, params, current, fx.direction);
  CHECK(plan.stage == Stage::kApproach);
  REQUIRE(plan.keyframes.size() == 3);

  CHECK(same_pose_bits(plan.keyframes[0].pose, current));
  CHECK(plan.keyframes[0].duration_from_prev == params.settle_duration);
  CHECK(plan.keyframes[1].duration_from_prev == params.approach_leg_duration);
  CHECK(plan.keyframes[2].duration_from_prev == params.approach_leg_duration);
  for (const Keyframe& kf : plan.keyframes) {
    CHECK(kf.action == GripperAction::kNone);
    CHECK(std::isnan(kf.aperture_target));
    CHECK(kf.sweep_angle == 0.0);
  }
  CHECK_FALSE(plan.keyframes[1].tight_tolerance);
  CHECK(plan.keyframes[2].tight_tolerance);

  const Pose grasp = planned_grasp_pose(scene, bolt, fx.direction);
  CHECK(same_pose_bits(plan.keyframes[2].pose, grasp));
  // pre-grasp differs from the grasp only by the radial standoff
  const Vec3 radial = grasp_radial_direction(scene, bolt, fx.direction);
  const Vec3 diff = plan.keyframes[1].pose.translation - grasp.translation;
  CHECK((diff - params.pre_grasp_offset * radial).norm() < 1e-15);
  CHECK(rotation_angle_between(plan.keyframes[1].pose.matrix(), grasp.matrix()) == 0.0);
}

TEST_CASE("screw plan: stationary gripper windows around a thread-true arc") {
  const auto& fx = testutil::grasp_fixture();
  const BoltModel& bolt = fx.config.bolt;
  const PlannerParams& params = fx.config.planner;
  const SceneEstimate scene = fx.scene;
  const double turn = params.turn_angle;

  const KeyframePlan plan = plan_screw(scene, bolt, params, fx.direction, turn);
  CHECK(plan.stage == Stage::kScrew);
  const int segments = params.arc_segments;
  REQUIRE(plan.keyframes.size() == static_cast<std::size_t>(segments) + 2);

  const Keyframe& close = plan.keyframes.front();
  CHECK(close.action == GripperAction::kClose);
  CHECK(close.aperture_target == params.close_fraction * bolt.across_flats());
  CHECK(close.duration_from_prev == params.gripper_window);
  CHECK(close.sweep_angle == 0.0);
  CHECK(same_pose_bits(close.pose, planned_grasp_pose(scene, bolt, fx.direction)));

  for (int i = 1; i <= segments; ++i) {
    const Keyframe& arc = plan.keyframes[static_cast<std::size_t>(i)];
    const double phi = turn * static_cast<double>(i) / static_cast<double>(segments);
    CHECK(arc.sweep_angle == phi);
    CHECK(arc.action == GripperAction::kNone);
    CHECK(arc.tight_tolerance);
    CHECK(same_pose_bits(arc.pose, planned_grasp_pose(scene, bolt, fx.direction, phi)));
  }

  const Keyframe& open = plan.keyframes.back();
  CHECK(open.action == GripperAction::kOpen);
  CHECK(open.aperture_target == params.open_aperture);
  CHECK(open.sweep_angle == turn);
  // open window is stationary: same pose as the final arc keyframe
  CHECK(same_pose_bits(open.pose, plan.keyframes[static_cast<std::size_t>(segments)].pose));

  // the arc advances along the believed axis by exactly the thread coupling
  const Vec3 axis = scene.bolt_pose.rotation * Vec3::UnitY();
  const double progress = (open.pose.translation - close.pose.translation).dot(axis);
  CHECK(progress == doctest::Approx(turn * bolt.thread_pitch / (2.0 * M_PI)).epsilon(1e-9));

  // the screw stage starts exactly where the approach ends
  const Pose current = forward_kinematics(testutil::model(), fx.config.q_home);
  const KeyframePlan approach = plan_approach(scene, bolt, params, current, fx.direction);
  CHECK(same_pose_bits(approach.keyframes.back().pose, close.pose));
}

TEST_CASE("retract plan mirrors the approach at the swept nut angle") {
  const auto& fx = testutil::grasp_fixture();
  const BoltModel& bolt = fx.config.bolt;
  const PlannerParams& params = fx.config.planner;
  const SceneEstimate scene = fx.scene;
  const double turn = params.turn_angle;
  Pose home;
  home.translation = Vec3(0.4, 0.0, 0.9);

  const KeyframePlan plan = plan_retract(scene, bolt, params, home, fx.direction, turn);
  CHECK(plan.stage == Stage::kRetract);
  REQUIRE(plan.keyframes.size() == 3);

  const Pose grasp = planned_grasp_pose(scene, bolt, fx.direction, turn);
  CHECK(same_pose_bits(plan.keyframes[0].pose, grasp));
  CHECK(plan.keyframes[0].duration_from_prev == params.settle_duration);
  CHECK(plan.keyframes[0].tight_tolerance);

  const Vec3 radial = grasp_radial_direction(scene, bolt, fx.direction, turn);
  const Vec3 diff = plan.keyframes[1].pose.translation - grasp.translation;
  CHECK((diff - params.pre_grasp_offset * radial).norm() < 1e-15);
  CHECK(same_pose_bits(plan.keyframes[2].pose, home));
}

TEST_CASE("solve_plan resolves keyframes to in-box knots with chained timing") {
  const auto& fx = testutil::grasp_fixture();
  const ChainModel& m = testutil::model();
  const BoltModel& bolt = fx.config.bolt;
  const PlannerParams& params = fx.config.planner;
  const Pose current = forward_kinematics(m, fx.config.q_home);

  const KeyframePlan plan = plan_approach(fx.scene, bolt, params, current, fx.direction);
  const double start_aperture = 0.08;
  const StagePlanResult solved = solve_plan(m, params, plan, fx.config.q_home, start_aperture);
  REQUIRE(solved.feasible);
  CHECK(solved.failure.empty());
  REQUIRE(solved.knots.size() == 3);

  // implicit start knot at t = 0 holding the entry state
  CHECK(solved.joints.times()[0] == 0.0);
  CHECK((solved.joints.knots()[0] - fx.config.q_home).cwiseAbs().maxCoeff() == 0.0);
  CHECK(solved.aperture.knots()[0] == start_aperture);

  // cumulative breakpoints
  const double t1 = params.settle_duration;
  const double t2 = t1 + params.approach_leg_duration;
  const double t3 = t2 + params.approach_leg_duration;
  CHECK(solved.joints.times()[1] == t1);
  CHECK(solved.joints.times()[2] == t2);
  CHECK(solved.joints.times()[3] == t3);
  CHECK(solved.duration == t3);

  // every knot satisfies the keyframe's pose box (the planner promise)
  const IkOptions box;  // default: 0.01 m per axis, 0.5 degrees
  for (std::size_t i = 0; i < solved.knots.size(); ++i) {
    const Pose reached = forward_kinematics(m, solved.knots[i]);
    const Pose& target = plan.keyframes[i].pose;
    CHECK((reached.translation - target.translation).cwiseAbs().maxCoeff() <
          box.position_tolerance);
    CHECK(rotation_angle_between(reached.matrix(), target.matrix()) < box.rotation_tolerance);
    CHECK(within_limits(m, solved.knots[i]));
  }

  // no gripper action anywhere: the aperture command holds the entry value
  for (double a : solved.aperture.knots()) CHECK(a == start_aperture);
  // approach sweeps nothing
  for (double s : solved.sweep.knots()) CHECK(s == 0.0);
}

TEST_CASE("solve_plan: screw stage aperture and sweep trajectories") {
  const auto& fx = testutil::grasp_fixture();
  const ChainModel& m = testutil::model();
  const BoltModel& bolt = fx.config.bolt;
  const PlannerParams& params = fx.config.planner;
  const double turn = params.turn_angle;

  const KeyframePlan plan = plan_screw(fx.scene, bolt, params, fx.direction, turn);
  const StagePlanResult solved = solve_plan(m, params, plan, fx.q_grasp, params.open_aperture);
  REQUIRE(solved.feasible);

  const int segments = params.arc_segments;
  const std::size_t n_knots = static_cast<std::size_t>(segments) + 2;
  REQUIRE(solved.knots.size() == n_knots);

  // aperture: open at entry, closed through the whole arc, open at the end
  const double closed = params.close_fraction * bolt.across_flats();
  const auto& ap = solved.aperture.knots();
  CHECK(ap.front() == params.open_aperture);
  for (std::size_t i = 1; i + 1 < ap.size(); ++i) CHECK(ap[i] == closed);
  CHECK(ap.back() == params.open_aperture);

  // sweep: linear ramp across the arc, flat in the gripper windows
  const auto& sw = solved.sweep.knots();
  CHECK(sw[0] == 0.0);
  CHECK(sw[1] == 0.0);  // close window
  for (int i = 1; i <= segments; ++i) {
    CHECK(sw[static_cast<std::size_t>(i) + 1] ==
          turn * static_cast<double>(i) / static_cast<double>(segments));
  }
  CHECK(sw.back() == turn);

  // mid-arc sample interpolates the sweep linearly
  const double t_mid = params.gripper_window + 0.5 * params.screw_duration;
  CHECK(solved.sweep.sample(t_mid) == doctest::Approx(0.5 * turn).epsilon(1e-12));
}

TEST_CASE("solve_plan reports the diverging keyframe") {
  const auto& fx = testutil::grasp_fixture();
  const ChainModel& m = testutil::model();
  const PlannerParams& params = fx.config.planner;

  SceneEstimate far = fx.scene;
  far.bolt_pose.translation += Vec3(3.0, 0.0, 0.0);
  const Pose current = forward_kinematics(m, fx.config.q_home);
  const KeyframePlan plan = plan_approach(far, fx.config.bolt, params, current, 0);
  const StagePlanResult solved = solve_plan(m, params, plan, fx.config.q_home, 0.09);
  CHECK_FALSE(solved.feasible);
  CHECK(solved.failure == "Diverged at keyframe 1");
}

TEST_CASE("plan_stage chains the belief through planned end states only") {
  const auto& fx = testutil::grasp_fixture();
  const ChainModel& m = testutil::model();
  const BoltModel& bolt = fx.config.bolt;
  const PlannerParams& params = fx.config.planner;

  PlannerBelief belief = make_belief(fx.scene, m, fx.config.q_home, params.open_aperture);
  CHECK(same_pose_bits(belief.home, forward_kinematics(m, fx.config.q_home)));

  // Approach
  StagePlanResult approach = plan_stage(m, bolt, params, Stage::kApproach, belief);
  REQUIRE(approach.feasible);
  CHECK(belief.direction >= 0);
  CHECK(same_pose_bits(belief.gripper, approach.plan.keyframes.back().pose));
  CHECK((belief.q - approach.knots.back()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(belief.aperture == params.open_aperture);  // no gripper action yet
  CHECK(belief.scene.nut_theta == 0.0);

  // Screw
  StagePlanResult screw = plan_stage(m, bolt, params, Stage::kScrew, belief);
  REQUIRE(screw.feasible);
  CHECK(belief.arc_angle == params.turn_angle);
  CHECK(belief.aperture == params.open_aperture);  // open again at the end
  CHECK(belief.scene.nut_theta == 0.0);            // advances only after retract

  // Retract
  const double theta_before = belief.scene.nut_theta;
  StagePlanResult retract = plan_stage(m, bolt, params, Stage::kRetract, belief);
  REQUIRE(retract.feasible);
  CHECK(belief.scene.nut_theta == theta_before + params.effective_turn_advance());
  CHECK(same_pose_bits(belief.gripper, belief.home));
}

TEST_CASE("plan_stage failure leaves the belief untouched") {
  const auto& fx = testutil::grasp_fixture();
  const ChainModel& m = testutil::model();
  const PlannerParams& params = fx.config.planner;

  SceneEstimate far = fx.scene;
  far.bolt_pose.translation += Vec3(5.0, 0.0, 0.0);
  PlannerBelief belief = make_belief(far, m, fx.config.q_home, params.open_aperture);
  const PlannerBelief before = belief;

  const StagePlanResult result = plan_stage(m, fx.config.bolt, params, Stage::kApproach, belief);
  CHECK_FALSE(result.feasible);
  CHECK(result.failure == "NoFeasibleGrasp");
  CHECK((belief.q - before.q).cwiseAbs().maxCoeff() == 0.0);
  CHECK(same_pose_bits(belief.gripper, before.gripper));
  CHECK(belief.aperture == before.aperture);
  CHECK(belief.direction == before.direction);
  CHECK(belief.scene.nut_theta == before.scene.nut_theta);
}

TEST_CASE("stage machine sequences approach-screw-retract per turn") {
  StageMachine sm;
  const int turns = 2;
  CHECK(sm.stage == Stage::kApproach);
  CHECK_FALSE(sm.finished);

  sm.advance(turns);
  CHECK(sm.stage == Stage::kScrew);
  sm.advance(turns);
  CHECK(sm.stage == Stage::kRetract);
  sm.advance(turns);
  CHECK(sm.stage == Stage::kApproach);
  CHECK(sm.turn == 1);
  CHECK_FALSE(sm.finished);

  sm.advance(turns);
  sm.advance(turns);
  sm.advance(turns);
  CHECK(sm.turn == 2);
  CHECK(sm.finished);
}
