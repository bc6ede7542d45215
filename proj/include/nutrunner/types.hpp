#pragma once

#include <Eigen/Dense>

namespace nutrunner {

inline constexpr int kDof = 7;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using JointVector = Eigen::Matrix<double, kDof, 1>;
using JointMatrix = Eigen::Matrix<double, kDof, kDof>;

// 6-vectors follow the moments-first convention used throughout:
//   wrench  w = (m_x, m_y, m_z, f_x, f_y, f_z)
//   twist   v = (w_x, w_y, w_z, v_x, v_y, v_z)
// Task coordinates x = (alpha, beta, gamma, t_x, t_y, t_z) use the same
// angular-then-linear ordering, so a spatial Jacobian maps joint rates to
// twists and its transpose maps wrenches to joint torques consistently.
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Wrench = Vec6;
using Twist = Vec6;
using SpatialJacobian = Eigen::Matrix<double, 6, kDof>;

}  // namespace nutrunner
