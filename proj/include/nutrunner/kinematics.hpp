#pragma once

#include <array>

#include "nutrunner/model.hpp"

namespace nutrunner {

// World poses of every link frame plus the tool frame, computed in one pass.
struct FramePoses {
  std::array<Pose, kDof> link;  // link i frame (after joint rotation), world
  Pose tool;                    // gripper frame G, world
};

FramePoses link_poses(const ChainModel& model, const JointVector& q);

// Pose of the gripper frame G in world coordinates.
Pose forward_kinematics(const ChainModel& model, const JointVector& q);

// Spatial Jacobian of the gripper frame: rows (angular; linear), expressed in
// world axes, reference point at the gripper origin. J * qdot gives the
// gripper twist (w; v).
SpatialJacobian jacobian(const ChainModel& model, const JointVector& q);

// Re-expresses a world Jacobian in a frame whose world rotation is r_wf.
// Only the coordinate axes change; the reference point stays at the gripper
// origin.
inline SpatialJacobian express_jacobian(const SpatialJacobian& j_world, const Mat3& r_wf) {
  SpatialJacobian out;
  out.topRows<3>() = r_wf.transpose() * j_world.topRows<3>();
  out.bottomRows<3>() = r_wf.transpose() * j_world.bottomRows<3>();
  return out;
}

// World positions of every link COM (used by potential-energy checks).
std::array<Vec3, kDof> com_positions(const ChainModel& model, const JointVector& q);

}  // namespace nutrunner
