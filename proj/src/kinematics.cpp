#include "nutrunner/kinematics.hpp"

namespace nutrunner {

FramePoses link_poses(const ChainModel& model, const JointVector& q) {
  FramePoses out;
  Pose t = Pose::Identity();
  for (int i = 0; i < kDof; ++i) {
    const LinkParams& l = model.links[i];
    Pose joint;
    joint.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(q[i], l.axis));
    t = t * l.offset * joint;
    out.link[i] = t;
  }
  out.tool = t * model.tool_offset;
  return out;
}

Pose forward_kinematics(const ChainModel& model, const JointVector& q) {
  return link_poses(model, q).tool;
}

SpatialJacobian jacobian(const ChainModel& model, const JointVector& q) {
  const FramePoses frames = link_poses(model, q);
  const Vec3 p_tool = frames.tool.translation;
  SpatialJacobian j;
  for (int i = 0; i < kDof; ++i) {
    const Vec3 axis_world = frames.link[i].rotation * model.links[i].axis;
    const Vec3 origin = frames.link[i].translation;
    j.col(i).head<3>() = axis_world;
    j.col(i).tail<3>() = axis_world.cross(p_tool - origin);
  }
  return j;
}

std::array<Vec3, kDof> com_positions(const ChainModel& model, const JointVector& q) {
  const FramePoses frames = link_poses(model, q);
  std::array<Vec3, kDof> out;
  for (int i = 0; i < kDof; ++i) out[i] = frames.link[i] * model.links[i].com;
  return out;
}

}  // namespace nutrunner
