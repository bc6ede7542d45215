#include "nutrunner/world.hpp"

#include <algorithm>
#include <cmath>

namespace nutrunner {
namespace {

double smooth_sign(double v, double eps) { return std::tanh(v / eps); }

// Loads transmitted through a latched grasp, evaluated at the current state.
struct GraspLoads {
  Vec3 force_world{Vec3::Zero()};   // applied by the gripper on the nut
  Vec3 moment_world{Vec3::Zero()};  // about the nut centre, world axes
  double offaxis_load{0.0};         // transmitted off-axis load, N equivalent
};

GraspLoads grasp_loads(const BoltModel& bolt, const WorldParams& params, const WorldState& state,
                       const Pose& grip, const SpatialJacobian& jac) {
  GraspLoads out;
  const Vec3 axis = bolt.axis_world();
  const Pose npose = nut_pose(bolt, state.nut);
  const Pose rest = npose * state.attach.grip_in_nut;

  const Vec3 delta = grip.translation - rest.translation;
  const Vec3 rho = so3_log(grip.matrix() * rest.matrix().transpose());
  const Vec3 rho_off = rho - rho.dot(axis) * axis;

  const Twist v = jac * state.qdot;
  const Vec3 omega_grip = v.head<3>();
  const Vec3 vel_grip = v.tail<3>();

  const double advance_rate = bolt.thread_pitch / (2.0 * M_PI);
  const Vec3 omega_nut = state.nut.theta_dot * axis;
  const Vec3 vel_rest = omega_nut.cross(rest.translation - bolt.base_pose.translation) +
                        advance_rate * state.nut.theta_dot * axis;
  const Vec3 delta_dot = vel_grip - vel_rest;
  const Vec3 omega_rel = omega_grip - omega_nut;
  const Vec3 omega_off = omega_rel - omega_rel.dot(axis) * axis;

  const GraspCoupling& c = params.coupling;
  const Vec3 force = c.k_translation * delta + c.d_translation * delta_dot;
  const Vec3 moment_off = c.k_rotation * rho_off + c.d_rotation * omega_off;

  const Vec3 force_off = force - force.dot(axis) * axis;
  out.offaxis_load = force_off.norm() + moment_off.norm() / c.load_radius;

  const ResistanceModel& r = bolt.resistance;
  const double coulomb_level = r.coulomb + r.load_friction * out.offaxis_load;
  const double resistance = coulomb_level * smooth_sign(state.nut.theta_dot, r.smooth_sign_eps) +
                            r.viscous * state.nut.theta_dot;
  const double axis_moment = bolt.nut_inertia * state.attach.theta_ddot + resistance;

  out.force_world = force;
  out.moment_world = axis_moment * axis + moment_off;
  return out;
}

}  // namespace

Pose nut_pose(const BoltModel& bolt, const NutState& nut) {
  Pose local;
  local.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(nut.theta, Vec3::UnitY()));
  local.translation = Vec3(0.0, nut.y_advance, 0.0);
  return bolt.base_pose * local;
}

Pose grasp_pose_in_nut(int direction) {
  // Base grasp (direction 0): gripper x across a flat pair, y radially
  // inward along nut +x, z along the thread axis (+y of the nut frame).
  Mat3 base;
  base.col(0) = Vec3(0.0, 0.0, 1.0);
  base.col(1) = Vec3(1.0, 0.0, 0.0);
  base.col(2) = Vec3(0.0, 1.0, 0.0);
  const double yaw = (M_PI / 3.0) * static_cast<double>(direction);
  const Mat3 r = axis_angle(Vec3::UnitY(), yaw) * base;
  return make_pose(r, Vec3::Zero());
}

bool grasp_pose_check(const Pose& gripper, const BoltModel& bolt, const NutState& nut,
                      const GraspTolerances& tol) {
  const Pose npose = nut_pose(bolt, nut);
  if ((gripper.translation - npose.translation).norm() > tol.position) return false;

  const Vec3 axis = bolt.axis_world();
  const Vec3 grip_z = gripper.rotation * Vec3::UnitZ();
  const double cos_axis = std::clamp(grip_z.dot(axis), -1.0, 1.0);
  if (std::acos(cos_axis) > tol.axis_alignment) return false;

  // Finger closing axis vs the nearest of the three flat pairs (60 deg
  // symmetry about the thread axis).
  const Mat3 in_nut = npose.matrix().transpose() * gripper.matrix();
  const Vec3 finger = in_nut * Vec3::UnitX();
  const double psi = std::atan2(finger.x(), finger.z());
  const double defect = std::abs(std::remainder(psi, M_PI / 3.0));
  return defect <= tol.yaw_alignment;
}

bool grasp_check(const ChainModel& model, const WorldState& state, const BoltModel& bolt,
                 const GraspTolerances& tol) {
  if (state.gripper_aperture > bolt.across_flats() + tol.aperture_slack) return false;
  return grasp_pose_check(forward_kinematics(model, state.q), bolt, state.nut, tol);
}

void force_latch(const ChainModel& model, const BoltModel& bolt, WorldState& state) {
  const Pose grip = forward_kinematics(model, state.q);
  state.grasped = true;
  state.attach = GraspAttachment{};
  state.attach.grip_in_nut = nut_pose(bolt, state.nut).inverse() * grip;
  state.attach.prev_theta_dot = state.nut.theta_dot;
  state.gripper_aperture = bolt.across_flats();
}

Wrench sense_wrench(const ChainModel& model, const BoltModel& bolt, const WorldParams& params,
                    const WorldState& state) {
  if (!state.grasped) return Wrench::Zero();
  const Pose grip = forward_kinematics(model, state.q);
  const SpatialJacobian jac = jacobian(model, state.q);
  const GraspLoads loads = grasp_loads(bolt, params, state, grip, jac);

  Wrench world_at_nut;
  world_at_nut.head<3>() = loads.moment_world;
  world_at_nut.tail<3>() = loads.force_world;
  const Pose npose = nut_pose(bolt, state.nut);
  return transport_wrench(world_at_nut, Mat3::Identity(), npose.translation, grip.matrix(),
                          grip.translation);
}

void step(const ChainModel& model, const BoltModel& bolt, const WorldParams& params,
          WorldState& state, const JointVector& tau, double aperture_cmd, double dt) {
  if (!tau.allFinite() || !std::isfinite(aperture_cmd)) {
    throw NonFiniteError("world step received non-finite inputs");
  }

  const Pose grip_before = forward_kinematics(model, state.q);
  const SpatialJacobian jac_before = jacobian(model, state.q);

  JointVector tau_ext = JointVector::Zero();
  if (state.grasped) {
    const GraspLoads loads = grasp_loads(bolt, params, state, grip_before, jac_before);
    // Reaction on the gripper: equal and opposite, moved to the gripper
    // origin where the Jacobian lives.
    const Pose npose = nut_pose(bolt, state.nut);
    Wrench reaction;
    reaction.head<3>() = -(loads.moment_world +
                           (npose.translation - grip_before.translation).cross(loads.force_world));
    reaction.tail<3>() = -loads.force_world;
    tau_ext = jac_before.transpose() * reaction;
  }

  const JointMatrix m = mass_matrix(model, state.q);
  const JointVector bias = bias_forces(model, state.q, state.qdot);
  const JointVector qddot = m.ldlt().solve(tau + tau_ext - bias);

  state.qdot += dt * qddot;
  state.q += dt * state.qdot;
  for (int i = 0; i < kDof; ++i) {
    const LinkParams& link = model.links[static_cast<std::size_t>(i)];
    if (state.q[i] < link.lower_limit) {
      state.q[i] = link.lower_limit;
      state.qdot[i] = std::max(state.qdot[i], 0.0);
    } else if (state.q[i] > link.upper_limit) {
      state.q[i] = link.upper_limit;
      state.qdot[i] = std::min(state.qdot[i], 0.0);
    }
  }

  // Finger aperture slews toward the command; a latched nut blocks the jaws.
  const double aperture_before = state.gripper_aperture;
  const double slew = std::clamp(aperture_cmd - aperture_before, -params.aperture_rate * dt,
                                 params.aperture_rate * dt);
  state.gripper_aperture = std::clamp(aperture_before + slew, 0.0, params.max_aperture);
  const double flats = bolt.across_flats();
  if (state.grasped) {
    state.gripper_aperture = std::max(state.gripper_aperture, flats);
  }

  const Pose grip_after = forward_kinematics(model, state.q);

  if (state.grasped) {
    // The screw coordinate is slaved to the gripper's rotation about the
    // thread axis; advance follows the thread exactly.
    const Vec3 axis = bolt.axis_world();
    const Vec3 drot = so3_log(grip_after.matrix() * grip_before.matrix().transpose());
    const double dtheta = drot.dot(axis);
    const double theta_dot_before = state.nut.theta_dot;
    state.nut.theta += dtheta;
    const SpatialJacobian jac_after = jacobian(model, state.q);
    const Twist v_after = jac_after * state.qdot;
    state.nut.theta_dot = v_after.head<3>().dot(axis);
    state.nut.y_advance = state.nut.theta * bolt.thread_pitch / (2.0 * M_PI);
    state.attach.theta_ddot = (state.nut.theta_dot - theta_dot_before) / dt;
    state.attach.prev_theta_dot = theta_dot_before;

    if (state.gripper_aperture > flats + params.release_band) {
      state.grasped = false;
      state.attach = GraspAttachment{};
      state.nut.theta_dot = 0.0;  // kinetic friction parks the free nut
    }
  } else if (aperture_cmd < aperture_before &&
             state.gripper_aperture <= flats + params.latch_band &&
             state.gripper_aperture >= flats - 1e-9) {
    if (grasp_pose_check(grip_after, bolt, state.nut, params.grasp_tolerances)) {
      state.grasped = true;
      state.attach = GraspAttachment{};
      const Pose npose = nut_pose(bolt, state.nut);
      state.attach.grip_in_nut = npose.inverse() * grip_after;
      state.attach.prev_theta_dot = state.nut.theta_dot;
      state.gripper_aperture = flats;
    }
  }

  state.time += dt;
  if (!state.q.allFinite() || !state.qdot.allFinite() || !std::isfinite(state.nut.theta) ||
      !std::isfinite(state.nut.theta_dot)) {
    throw NonFiniteError("world state became non-finite");
  }
}

}  // namespace nutrunner
